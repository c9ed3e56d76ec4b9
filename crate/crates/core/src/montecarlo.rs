//! Streaming Monte Carlo path ensembles: Brownian, compensated Poisson, and
//! truncated heavy-tail families, normalized so E[M,M]_1 = 1 per path
//! regardless of dimension. Statistics are accumulated per path in index
//! order, so a fixed seed reproduces every report bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::report::InequalityReport;

/// Hard cap on n_paths * n_steps * dim for streaming runs.
pub const STREAM_CAP: u128 = 4_000_000_000;
/// Cap for materialized ensembles (`simulate`), in f64 values.
pub const MATERIALIZE_CAP: u128 = 1 << 24;

pub const DEFAULT_AUX_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathFamily {
    Brownian,
    CompensatedPoisson { rate: f64 },
    StableTruncated { alpha: f64, cap: f64 },
}

impl PathFamily {
    fn label(&self) -> String {
        match self {
            PathFamily::Brownian => "brownian".into(),
            PathFamily::CompensatedPoisson { rate } => format!("compensated_poisson({rate})"),
            PathFamily::StableTruncated { alpha, cap } => {
                format!("stable_truncated({alpha}, {cap})")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: PathFamily,
    pub n_paths: usize,
    pub n_steps: usize,
    pub dim: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 || self.dim == 0 {
            return Err(EngineError::Structural(
                "n_paths, n_steps, dim must all be >= 1".into(),
            ));
        }
        match self.family {
            PathFamily::CompensatedPoisson { rate } if !(rate > 0.0) => {
                return Err(EngineError::Structural("Poisson rate must be positive".into()));
            }
            PathFamily::StableTruncated { alpha, cap } if !(alpha > 0.0 && alpha < 2.0) || !(cap > 0.0) => {
                return Err(EngineError::Structural(
                    "stable family needs alpha in (0,2) and a positive cap".into(),
                ));
            }
            _ => {}
        }
        let total = self.n_paths as u128 * self.n_steps as u128 * self.dim as u128;
        if total > STREAM_CAP {
            return Err(EngineError::Capacity(format!(
                "{total} increments exceed the streaming cap {STREAM_CAP}"
            )));
        }
        Ok(())
    }

    fn dt(&self) -> f64 {
        1.0 / self.n_steps as f64
    }
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add((path as u64).wrapping_mul(0x9E3779B97F4A7C15)))
}

/// One increment vector, normalized so the per-step variance sums to dt
/// across coordinates.
fn draw_increment(rng: &mut ChaCha8Rng, family: PathFamily, dim: usize, dt: f64, out: &mut [f64]) {
    match family {
        PathFamily::Brownian => {
            let sd = (dt / dim as f64).sqrt();
            for v in out.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *v = sd * z;
            }
        }
        PathFamily::CompensatedPoisson { rate } => {
            let mean = rate * dt;
            let size = 1.0 / (rate * dim as f64).sqrt();
            let dist = Poisson::new(mean).expect("validated rate");
            for v in out.iter_mut() {
                let k: f64 = dist.sample(rng);
                *v = size * (k - mean);
            }
        }
        PathFamily::StableTruncated { alpha, cap } => {
            let scale = dt.powf(1.0 / alpha) / (dim as f64).powf(1.0 / alpha);
            for v in out.iter_mut() {
                let u: f64 = rng.gen_range(1e-12..1.0);
                let mag = u.powf(-1.0 / alpha).min(cap);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                *v = sign * scale * mag;
            }
        }
    }
}

/// Streams every path in index order, calling `visit(path, step, increment)`
/// for each step. Step 0 marks the start of a fresh path.
pub fn stream_paths<V>(spec: &EnsembleSpec, mut visit: V) -> Result<()>
where
    V: FnMut(usize, usize, &[f64]),
{
    spec.validate()?;
    let dt = spec.dt();
    let mut inc = vec![0.0; spec.dim];
    for path in 0..spec.n_paths {
        let mut rng = path_rng(spec.seed, path);
        for step in 0..spec.n_steps {
            draw_increment(&mut rng, spec.family, spec.dim, dt, &mut inc);
            visit(path, step, &inc);
        }
    }
    Ok(())
}

/// Materialized ensemble for inspection and small experiments;
/// `paths[path][step * dim + coord]` holds the cumulative position.
#[derive(Clone, Debug)]
pub struct PathEnsemble {
    pub spec: EnsembleSpec,
    pub paths: Vec<Vec<f64>>,
}

pub fn simulate(spec: &EnsembleSpec) -> Result<PathEnsemble> {
    spec.validate()?;
    let total = spec.n_paths as u128 * spec.n_steps as u128 * spec.dim as u128;
    if total > MATERIALIZE_CAP {
        return Err(EngineError::Capacity(format!(
            "{total} values exceed the materialization cap {MATERIALIZE_CAP}; use the streaming API"
        )));
    }
    let mut paths = vec![vec![0.0; spec.n_steps * spec.dim]; spec.n_paths];
    let mut pos = vec![0.0; spec.dim];
    stream_paths(spec, |path, step, inc| {
        if step == 0 {
            pos.iter_mut().for_each(|v| *v = 0.0);
        }
        for j in 0..spec.dim {
            pos[j] += inc[j];
            paths[path][step * spec.dim + j] = pos[j];
        }
    })?;
    Ok(PathEnsemble { spec: *spec, paths })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    fn from_sums(sum: f64, sumsq: f64, n: usize) -> Self {
        let mean = sum / n as f64;
        let var = ((sumsq - sum * mean) / (n.saturating_sub(1).max(1)) as f64).max(0.0);
        Self {
            value: mean,
            std_error: (var / n as f64).sqrt(),
            n,
        }
    }
}

/// One-sided MC inequality row with 3-standard-error slack.
fn mc_row(
    name: &str,
    family: &str,
    p: f64,
    lhs: &McEstimate,
    rhs: &McEstimate,
    tracked: Option<f64>,
    cap: f64,
) -> InequalityReport {
    let c = tracked.unwrap_or(cap);
    let slack = 3.0 * (lhs.std_error + c * rhs.std_error);
    let pass = lhs.value <= c * rhs.value * (1.0 + 1e-9) + slack + 1e-12;
    let ratio = if rhs.value == 0.0 {
        f64::INFINITY
    } else {
        lhs.value / rhs.value
    };
    InequalityReport {
        name: name.into(),
        family: family.into(),
        p,
        lhs: lhs.value,
        rhs: rhs.value,
        ratio,
        tracked_constant: tracked,
        pass,
    }
}

#[derive(Clone, Debug)]
pub struct McBdgReport {
    /// E (sup ||X||)^p with its standard error.
    pub sup_moment: McEstimate,
    /// E [X,X]^{p/2} with its standard error.
    pub qv_moment: McEstimate,
    pub upper: InequalityReport,
    pub lower: InequalityReport,
}

impl McBdgReport {
    pub fn pass(&self) -> bool {
        self.upper.pass && self.lower.pass
    }
}

/// Two-sided moment comparison E sup^p vs E qv^{p/2}. The tracked constants
/// are the L_p-norm-level constants raised to the power p (the sides here
/// are p-th moments): upper 4 sqrt(2/p) for p <= 2, lower 2/p for p < 2 and
/// sqrt(p/2) for p > 2; above 2 the upper side is gated by `cap` only.
pub fn bdg_mc_report(spec: &EnsembleSpec, p: f64, cap: f64) -> Result<McBdgReport> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(EngineError::Domain(format!("p must lie in (0, inf), got {p}")));
    }
    if p < 1.0 && spec.family != PathFamily::Brownian {
        return Err(EngineError::Domain(
            "p < 1 is covered only for the continuous (brownian) family".into(),
        ));
    }
    let mut pos = vec![0.0; spec.dim];
    let mut sup = 0.0f64;
    let mut qv = 0.0f64;
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    let (mut q1, mut q2) = (0.0f64, 0.0f64);
    let last = spec.n_steps - 1;
    stream_paths(spec, |_, step, inc| {
        if step == 0 {
            pos.iter_mut().for_each(|v| *v = 0.0);
            sup = 0.0;
            qv = 0.0;
        }
        let mut nsq = 0.0;
        let mut isq = 0.0;
        for j in 0..inc.len() {
            pos[j] += inc[j];
            nsq += pos[j] * pos[j];
            isq += inc[j] * inc[j];
        }
        qv += isq;
        sup = sup.max(nsq.sqrt());
        if step == last {
            let x = sup.powf(p);
            let y = qv.powf(p / 2.0);
            s1 += x;
            s2 += x * x;
            q1 += y;
            q2 += y * y;
        }
    })?;

    let sup_moment = McEstimate::from_sums(s1, s2, spec.n_paths);
    let qv_moment = McEstimate::from_sums(q1, q2, spec.n_paths);
    let family = format!(
        "{} x {} steps, d = {}, {}",
        spec.n_paths,
        spec.n_steps,
        spec.dim,
        spec.family.label()
    );
    let upper_c = if p <= 2.0 {
        Some((4.0 * (2.0 / p).sqrt()).powf(p))
    } else {
        None
    };
    let lower_c = if p < 2.0 {
        Some((2.0 / p).powf(p))
    } else if p == 2.0 {
        Some(1.0)
    } else {
        Some((p / 2.0).powf(p / 2.0))
    };
    let upper = mc_row("bdg-mc-upper", &family, p, &sup_moment, &qv_moment, upper_c, cap);
    let lower = mc_row("bdg-mc-lower", &family, p, &qv_moment, &sup_moment, lower_c, cap);
    Ok(McBdgReport {
        sup_moment,
        qv_moment,
        upper,
        lower,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxConstruction {
    /// H = sqrt(p/2) (eps + [M,M])^{p/4 - 1/2}, p <= 2: M* <= 2 H_inf^{-1} N*.
    Ub2c,
    /// H = (eps + M*)^{p/2 - 1}, p < 2: N* <= (2/p)(eps + M*)^{p/2}.
    Lb2c,
    /// Same H as ub2c for p > 2: [N,N] tracks [M,M]^{p/2}, N* <= 2 H_inf M*.
    LbpGt2,
}

#[derive(Clone, Debug)]
pub struct AuxReport {
    pub which: &'static str,
    pub p: f64,
    pub eps: f64,
    /// Fraction of paths on which the pathwise inequality held.
    pub pass_fraction: f64,
    /// Worst relative overshoot among failing paths (0 when none fail).
    pub max_overshoot: f64,
    /// lbp_gt2 only: worst relative error of [N,N] against [M,M]^{p/2}.
    pub max_qv_rel_err: f64,
    pub ok: bool,
}

impl AuxReport {
    /// Row form: lhs = failure fraction against the 1% allowance.
    pub fn to_report(&self, family: &str) -> InequalityReport {
        InequalityReport::evaluate(
            &format!("aux-{}", self.which),
            family,
            self.p,
            1.0 - self.pass_fraction,
            0.01,
            Some(1.0),
        )
    }
}

pub fn auxiliary_construction_check(
    spec: &EnsembleSpec,
    p: f64,
    which: AuxConstruction,
    eps: f64,
) -> Result<AuxReport> {
    if !(eps > 0.0) {
        return Err(EngineError::Domain("eps must be positive".into()));
    }
    match which {
        AuxConstruction::Ub2c if !(p > 0.0 && p <= 2.0) => {
            return Err(EngineError::Domain(format!("ub2c needs p in (0, 2], got {p}")));
        }
        AuxConstruction::Lb2c if !(p > 0.0 && p < 2.0) => {
            return Err(EngineError::Domain(format!("lb2c needs p in (0, 2), got {p}")));
        }
        AuxConstruction::LbpGt2 if !(p > 2.0 && p.is_finite()) => {
            return Err(EngineError::Domain(format!("this route needs p > 2, got {p}")));
        }
        _ => {}
    }

    let dim = spec.dim;
    let mut pos = vec![0.0; dim];
    let mut nvec = vec![0.0; dim];
    let (mut sup, mut nsup, mut qv, mut qv_n, mut h_last) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut passes = 0usize;
    let mut max_overshoot = 0.0f64;
    let mut max_qv_rel_err = 0.0f64;
    let h_qv_exp = p / 4.0 - 0.5;
    let last = spec.n_steps - 1;

    stream_paths(spec, |_, step, inc| {
        if step == 0 {
            pos.iter_mut().for_each(|v| *v = 0.0);
            nvec.iter_mut().for_each(|v| *v = 0.0);
            sup = 0.0;
            nsup = 0.0;
            qv = 0.0;
            qv_n = 0.0;
            h_last = 0.0;
        }
        let mut possq = 0.0;
        let mut isq = 0.0;
        for j in 0..inc.len() {
            pos[j] += inc[j];
            possq += pos[j] * pos[j];
            isq += inc[j] * inc[j];
        }
        // The bracket-driven routes use the pre-increment bracket
        // (predictable H). The maximal-function route evaluates H at the
        // current running max: the continuous-time integrand sees M*_t,
        // and only this reading keeps the summation-by-parts bound exact
        // after discretization — the lagged variant overshoots by
        // ~ eps^{p/2-1} * |first increment| on every path.
        let h = match which {
            AuxConstruction::Ub2c | AuxConstruction::LbpGt2 => {
                (p / 2.0).sqrt() * (eps + qv).powf(h_qv_exp)
            }
            AuxConstruction::Lb2c => {
                sup = sup.max(possq.sqrt());
                (eps + sup).powf(p / 2.0 - 1.0)
            }
        };
        h_last = h;
        let mut nsq = 0.0;
        for j in 0..inc.len() {
            nvec[j] += h * inc[j];
            nsq += nvec[j] * nvec[j];
        }
        qv += isq;
        qv_n += h * h * isq;
        sup = sup.max(possq.sqrt());
        nsup = nsup.max(nsq.sqrt());
        if step == last {
            let (lhs, rhs) = match which {
                AuxConstruction::Ub2c => (sup, 2.0 * nsup / h_last),
                AuxConstruction::Lb2c => (nsup, (2.0 / p) * (eps + sup).powf(p / 2.0)),
                AuxConstruction::LbpGt2 => {
                    let target = (eps + qv).powf(p / 2.0) - eps.powf(p / 2.0);
                    if target > 0.0 {
                        let rel = ((qv_n - target) / target).abs();
                        if rel > max_qv_rel_err {
                            max_qv_rel_err = rel;
                        }
                    }
                    (nsup, 2.0 * h_last * sup)
                }
            };
            if lhs <= rhs * (1.0 + 1e-9) + 1e-12 {
                passes += 1;
            } else if rhs > 0.0 {
                max_overshoot = max_overshoot.max(lhs / rhs - 1.0);
            } else {
                max_overshoot = f64::INFINITY;
            }
        }
    })?;

    let pass_fraction = passes as f64 / spec.n_paths as f64;
    let ok = pass_fraction >= 0.99;
    Ok(AuxReport {
        which: match which {
            AuxConstruction::Ub2c => "ub2c",
            AuxConstruction::Lb2c => "lb2c",
            AuxConstruction::LbpGt2 => "lbp-gt2",
        },
        p,
        eps,
        pass_fraction,
        max_overshoot,
        max_qv_rel_err,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(family: PathFamily, seed: u64) -> EnsembleSpec {
        EnsembleSpec {
            family,
            n_paths: 400,
            n_steps: 300,
            dim: 1,
            seed,
        }
    }

    #[test]
    fn determinism_and_capacity() {
        let spec = small(PathFamily::Brownian, 9);
        let a = bdg_mc_report(&spec, 1.0, 64.0).unwrap();
        let b = bdg_mc_report(&spec, 1.0, 64.0).unwrap();
        assert_eq!(a.sup_moment.value.to_bits(), b.sup_moment.value.to_bits());
        assert_eq!(a.qv_moment.value.to_bits(), b.qv_moment.value.to_bits());
        let huge = EnsembleSpec {
            n_paths: usize::MAX / 2,
            ..spec
        };
        assert!(matches!(huge.validate(), Err(EngineError::Capacity(_))));
    }

    #[test]
    fn brownian_isometry_and_qv_normalization() {
        let spec = small(PathFamily::Brownian, 21);
        let r = bdg_mc_report(&spec, 2.0, 64.0).unwrap();
        // E [X,X]_1 = 1 exactly in expectation.
        assert!((r.qv_moment.value - 1.0).abs() < 5.0 * r.qv_moment.std_error + 0.02);
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn poisson_and_stable_families_are_centered() {
        for family in [
            PathFamily::CompensatedPoisson { rate: 3.0 },
            PathFamily::StableTruncated { alpha: 1.5, cap: 50.0 },
        ] {
            let spec = EnsembleSpec { dim: 2, ..small(family, 33) };
            let ens = simulate(&spec).unwrap();
            let last = spec.n_steps - 1;
            let mean: f64 = ens
                .paths
                .iter()
                .map(|p| p[last * spec.dim])
                .sum::<f64>()
                / spec.n_paths as f64;
            assert!(mean.abs() < 0.2, "{family:?}: terminal mean {mean}");
            let r = bdg_mc_report(&spec, 2.0, 64.0).unwrap();
            assert!(r.pass(), "{family:?}: {r:?}");
        }
        let spec = small(PathFamily::CompensatedPoisson { rate: 1.0 }, 2);
        assert!(bdg_mc_report(&spec, 0.5, 64.0).is_err());
    }

    #[test]
    fn small_p_two_sided() {
        let spec = EnsembleSpec {
            n_paths: 1500,
            ..small(PathFamily::Brownian, 77)
        };
        for p in [0.5, 1.0] {
            let r = bdg_mc_report(&spec, p, 64.0).unwrap();
            assert!(r.pass(), "p = {p}: {r:?}");
        }
    }

    #[test]
    fn aux_constructions() {
        let spec = EnsembleSpec {
            n_paths: 500,
            ..small(PathFamily::Brownian, 55)
        };
        // p = 2: H is constant, the bound collapses to an exact pathwise fact.
        let r = auxiliary_construction_check(&spec, 2.0, AuxConstruction::Ub2c, 1e-6).unwrap();
        assert!((r.pass_fraction - 1.0).abs() < 1e-12, "{r:?}");
        let r = auxiliary_construction_check(&spec, 1.0, AuxConstruction::Ub2c, 1e-6).unwrap();
        assert!(r.ok, "{r:?}");
        let r = auxiliary_construction_check(&spec, 1.0, AuxConstruction::Lb2c, 1e-6).unwrap();
        assert!(r.ok, "{r:?}");
        let r = auxiliary_construction_check(&spec, 4.0, AuxConstruction::LbpGt2, 1e-6).unwrap();
        assert!(r.ok, "{r:?}");
        assert!(r.max_qv_rel_err < 0.5, "{r:?}");
        assert!(auxiliary_construction_check(&spec, 3.0, AuxConstruction::Ub2c, 1e-6).is_err());
    }
}
