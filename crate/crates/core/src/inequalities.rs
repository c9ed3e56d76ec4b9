//! Two-sided maximal-function/quadratic-variation bounds on the exact
//! engine, the conditional bounds under a predictable jump dominator, and
//! the duality/interpolation chain checks.

use crate::calculus::{covariation, maximal, quadratic_variation};
use crate::error::{EngineError, Result};
use crate::norms::{conjugate, lp_norm};
use crate::prob_space::{check_dominance, cond_expect_slice, FilteredSpace, Process};
use crate::report::InequalityReport;

/// Default cap asserted where only a qualitative `<=_p` bound exists.
pub const DEFAULT_CONSTANT_CAP: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// `upper`: ||M*_T||_p vs ||[M,M]_T^{1/2}||_p; `lower`: the reverse.
/// At p = 2 the constants 2 (Doob) and 1 (isometry) are tracked; elsewhere
/// the configured cap gates the pass.
pub fn bdg_report(
    space: &FilteredSpace,
    m: &Process,
    p: f64,
    side: Side,
    cap: f64,
) -> Result<InequalityReport> {
    if p < 1.0 {
        return Err(EngineError::Domain(format!(
            "the exact engine requires p >= 1 (got {p}); use the path simulator below 1"
        )));
    }
    let sup = maximal(m);
    let qv = quadratic_variation(m);
    let qv_sqrt: Vec<f64> = qv.terminal_slice().iter().map(|v| v.sqrt()).collect();
    let sup_norm = lp_norm(space, sup.terminal_slice(), p)?;
    let qv_norm = lp_norm(space, &qv_sqrt, p)?;
    let (name, lhs, rhs) = match side {
        Side::Upper => ("bdg-upper", sup_norm, qv_norm),
        Side::Lower => ("bdg-lower", qv_norm, sup_norm),
    };
    let family = format!("martingale, d = {}", m.dim());
    Ok(if p == 2.0 {
        let c = if side == Side::Upper { 2.0 } else { 1.0 };
        InequalityReport::evaluate(name, &family, p, lhs, rhs, Some(c))
    } else {
        InequalityReport::evaluate_capped(name, &family, p, lhs, rhs, cap)
    })
}

/// Doob: ||M*_T||_p <= p' ||M_T||_p.
pub fn doob_report(space: &FilteredSpace, m: &Process, p: f64) -> Result<InequalityReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(EngineError::Domain(format!(
            "Doob's inequality needs p in (1, inf), got {p}"
        )));
    }
    let sup = maximal(m);
    let t = space.horizon();
    let terminal: Vec<f64> = (0..space.n_atoms()).map(|a| m.norm(t, a)).collect();
    let lhs = lp_norm(space, sup.terminal_slice(), p)?;
    let rhs = lp_norm(space, &terminal, p)?;
    Ok(InequalityReport::evaluate(
        "doob",
        &format!("martingale, d = {}", m.dim()),
        p,
        lhs,
        rhs,
        Some(conjugate(p)),
    ))
}

/// `|E ||M_T||^2 - E [M,M]_T|` relative to `E [M,M]_T` (or absolute when
/// the quadratic variation vanishes).
pub fn isometry_residual(space: &FilteredSpace, m: &Process) -> f64 {
    let qv = quadratic_variation(m);
    let t = space.horizon();
    let mut e_sq = 0.0;
    let mut e_qv = 0.0;
    for a in 0..space.n_atoms() {
        let n = m.norm(t, a);
        e_sq += space.prob(a) * n * n;
        e_qv += space.prob(a) * qv.terminal(a);
    }
    (e_sq - e_qv).abs() / e_qv.max(1.0)
}

/// Worst pathwise excess of `sum_k |(dM_k, dN_k)|` over
/// `[M,M]_T^{1/2} [N,N]_T^{1/2}`; nonpositive when Cauchy-Schwarz holds.
pub fn kunita_watanabe_excess(m: &Process, n: &Process) -> Result<f64> {
    let qm = quadratic_variation(m);
    let qn = quadratic_variation(n);
    let t = m.n_times() - 1;
    let mut worst = f64::NEG_INFINITY;
    for a in 0..m.n_atoms() {
        let abs_cov: f64 = (0..=t).map(|k| m.delta_dot(n, k, a).abs()).sum();
        let bound = (qm.terminal(a) * qn.terminal(a)).sqrt();
        worst = worst.max(abs_cov - bound * (1.0 + 1e-12) - 1e-12);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionalBound {
    /// p = 1 lower bound, constant 2 (the p <= 2 bound specialized).
    Clb1,
    /// p = 1 upper bound, constant 4 sqrt(2).
    Cub1,
    /// p <= 2 lower bound, constant 2/p.
    Clb2Minus,
    /// p <= 2 upper bound, constant 4 sqrt(2/p).
    Cub2Minus,
    /// p >= 2 lower bound with split right side
    /// `2^{p/2+2} ||M*||_p + ||D||_p`; the tracked constant is 1.
    Clb2Plus,
}

/// Bounds between `[M,M]^{1/2}` and `M*` in the presence of an increasing
/// adapted `D` with `|dM_n| <= D_{n-1}` pathwise (validated before use).
pub fn conditional_bound_report(
    space: &FilteredSpace,
    m: &Process,
    d: &Process,
    p: f64,
    which: ConditionalBound,
) -> Result<InequalityReport> {
    if d.dim() != 1 {
        return Err(EngineError::Structural("dominator D must be scalar".into()));
    }
    check_dominance(space, m, d)?;
    for n in 1..=space.horizon() {
        for a in 0..space.n_atoms() {
            if d.scalar(n, a) < d.scalar(n - 1, a) - 1e-12 {
                return Err(EngineError::Validation(format!(
                    "dominator decreases at time {n}, atom {a}"
                )));
            }
        }
    }
    let t = space.horizon();
    let sup = maximal(m);
    let qv = quadratic_variation(m);
    let qv_sqrt: Vec<f64> = qv.terminal_slice().iter().map(|v| v.sqrt()).collect();
    let d_term: Vec<f64> = (0..space.n_atoms()).map(|a| d.scalar(t, a)).collect();
    let sum_md: Vec<f64> = (0..space.n_atoms())
        .map(|a| sup.terminal(a) + d_term[a])
        .collect();
    let sum_qd: Vec<f64> = (0..space.n_atoms())
        .map(|a| qv_sqrt[a] + d_term[a])
        .collect();
    let family = format!("dominated pair, d = {}", m.dim());

    let in_range = |lo: f64, hi: f64| -> Result<()> {
        if p < lo || p > hi {
            Err(EngineError::Domain(format!(
                "p = {p} outside the proposition's range [{lo}, {hi}]"
            )))
        } else {
            Ok(())
        }
    };

    match which {
        ConditionalBound::Clb1 => {
            in_range(1.0, 1.0)?;
            Ok(InequalityReport::evaluate(
                "clb1",
                &family,
                p,
                lp_norm(space, &qv_sqrt, 1.0)?,
                lp_norm(space, &sum_md, 1.0)?,
                Some(2.0),
            ))
        }
        ConditionalBound::Cub1 => {
            in_range(1.0, 1.0)?;
            Ok(InequalityReport::evaluate(
                "cub1",
                &family,
                p,
                lp_norm(space, sup.terminal_slice(), 1.0)?,
                lp_norm(space, &sum_qd, 1.0)?,
                Some(4.0 * 2f64.sqrt()),
            ))
        }
        ConditionalBound::Clb2Minus => {
            in_range(f64::MIN_POSITIVE, 2.0)?;
            Ok(InequalityReport::evaluate(
                "clb2minus",
                &family,
                p,
                lp_norm(space, &qv_sqrt, p)?,
                lp_norm(space, &sum_md, p)?,
                Some(2.0 / p),
            ))
        }
        ConditionalBound::Cub2Minus => {
            in_range(f64::MIN_POSITIVE, 2.0)?;
            Ok(InequalityReport::evaluate(
                "cub2minus",
                &family,
                p,
                lp_norm(space, sup.terminal_slice(), p)?,
                lp_norm(space, &sum_qd, p)?,
                Some(4.0 * (2.0 / p).sqrt()),
            ))
        }
        ConditionalBound::Clb2Plus => {
            in_range(2.0, f64::INFINITY)?;
            let rhs = 2f64.powf(p / 2.0 + 2.0) * lp_norm(space, sup.terminal_slice(), p)?
                + lp_norm(space, &d_term, p)?;
            Ok(InequalityReport::evaluate(
                "clb2plus",
                &family,
                p,
                lp_norm(space, &qv_sqrt, p)?,
                rhs,
                Some(1.0),
            ))
        }
    }
}

/// Replays the duality chain turning lower bounds into upper bounds: with
/// `xi` the maximizer of the L_{p'} duality for ||M_T|| and `N_n = E_n xi`,
///   ||M_T||_p = E(M_T, xi) = E [M,N]_T
///             <= E [M,M]^{1/2} [N,N]^{1/2}
///             <= ||[M,M]^{1/2}||_p ||[N,N]^{1/2}||_{p'}.
/// Equality links are required to 1e-9; the inequality links pathwise.
pub fn duality_lower_to_upper_check(
    space: &FilteredSpace,
    m: &Process,
    p: f64,
) -> Result<InequalityReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(EngineError::Domain(format!(
            "duality chain needs p in (1, inf), got {p}"
        )));
    }
    let pp = conjugate(p);
    let t = space.horizon();
    let dim = m.dim();
    let n_atoms = space.n_atoms();
    let w: Vec<f64> = (0..n_atoms).map(|a| m.norm(t, a)).collect();
    let name = "duality-chain";
    let family = format!("martingale, d = {dim}");
    let m_norm = lp_norm(space, &w, p)?;
    if m_norm == 0.0 {
        return Ok(InequalityReport::evaluate(name, &family, p, 0.0, 0.0, Some(1.0)));
    }

    // xi = ||M_T||^{p-2} M_T, scaled to unit L_{p'} norm.
    let mut xi = vec![0.0; n_atoms * dim];
    for a in 0..n_atoms {
        if w[a] > 0.0 {
            let scale = w[a].powf(p - 2.0);
            for j in 0..dim {
                xi[a * dim + j] = scale * m.coord(t, a, j);
            }
        }
    }
    let xi_norms: Vec<f64> = (0..n_atoms)
        .map(|a| {
            xi[a * dim..(a + 1) * dim]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let xi_scale = lp_norm(space, &xi_norms, pp)?;
    for v in &mut xi {
        *v /= xi_scale;
    }
    let n_values: Vec<Vec<f64>> = (0..=t)
        .map(|k| cond_expect_slice(space, &xi, dim, k))
        .collect();
    let n_proc = Process::new(space, dim, n_values, crate::prob_space::Adaptedness::Adapted)?;

    let mut pairing = 0.0;
    for a in 0..n_atoms {
        let dot: f64 = (0..dim).map(|j| m.coord(t, a, j) * xi[a * dim + j]).sum();
        pairing += space.prob(a) * dot;
    }
    let cov = covariation(m, &n_proc)?;
    let e_cov = space.expectation(cov.terminal_slice());

    let qm = quadratic_variation(m);
    let qn = quadratic_variation(&n_proc);
    let kw: Vec<f64> = (0..n_atoms)
        .map(|a| (qm.terminal(a) * qn.terminal(a)).sqrt())
        .collect();
    let e_kw = space.expectation(&kw);
    let qm_sqrt: Vec<f64> = qm.terminal_slice().iter().map(|v| v.sqrt()).collect();
    let qn_sqrt: Vec<f64> = qn.terminal_slice().iter().map(|v| v.sqrt()).collect();
    let rhs = lp_norm(space, &qm_sqrt, p)? * lp_norm(space, &qn_sqrt, pp)?;

    let scale = m_norm.max(1.0);
    let links_ok = (pairing - m_norm).abs() <= 1e-9 * scale
        && (pairing - e_cov).abs() <= 1e-9 * scale
        && e_cov <= e_kw * (1.0 + 1e-12) + 1e-12
        && e_kw <= rhs * (1.0 + 1e-12) + 1e-12;
    let rep = InequalityReport::evaluate(name, &family, p, m_norm, rhs, Some(1.0));
    Ok(if links_ok { rep } else { rep.force_fail() })
}

/// Given ensemble-wide constants measured at `p1` and `p2` for the lower
/// bound `||[M,M]^{1/2}||_q <= C_q ||M_T||_q`, checks the interpolated bound
/// at `p` with `C = C1^{1-theta} C2^theta` for every member. The report's
/// lhs is the worst member ratio at `p` against tracked constant `C`.
pub fn interpolation_lower_check(
    ensemble: &[(FilteredSpace, Process)],
    p1: f64,
    p2: f64,
    p: f64,
) -> Result<InequalityReport> {
    if !(1.0 < p1 && p1 < p && p < p2) || !p2.is_finite() {
        return Err(EngineError::Domain(format!(
            "need 1 < p1 < p < p2 < inf, got ({p1}, {p}, {p2})"
        )));
    }
    if ensemble.is_empty() {
        return Err(EngineError::Structural("empty ensemble".into()));
    }
    let theta = (1.0 / p1 - 1.0 / p) / (1.0 / p1 - 1.0 / p2);
    let ratio_at = |space: &FilteredSpace, m: &Process, q: f64| -> Result<Option<f64>> {
        let t = space.horizon();
        let w: Vec<f64> = (0..space.n_atoms()).map(|a| m.norm(t, a)).collect();
        let denom = lp_norm(space, &w, q)?;
        if denom == 0.0 {
            return Ok(None);
        }
        let qv = quadratic_variation(m);
        let qv_sqrt: Vec<f64> = qv.terminal_slice().iter().map(|v| v.sqrt()).collect();
        Ok(Some(lp_norm(space, &qv_sqrt, q)? / denom))
    };
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    let mut worst = 0.0f64;
    for (space, m) in ensemble {
        if let Some(r) = ratio_at(space, m, p1)? {
            c1 = c1.max(r);
        }
        if let Some(r) = ratio_at(space, m, p2)? {
            c2 = c2.max(r);
        }
        if let Some(r) = ratio_at(space, m, p)? {
            worst = worst.max(r);
        }
    }
    let c = c1.powf(1.0 - theta) * c2.powf(theta);
    Ok(InequalityReport::evaluate(
        "interp-lower",
        &format!("ensemble of {} members", ensemble.len()),
        p,
        worst,
        1.0,
        Some(c),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob_space::{
        generate_martingale, jump_dominating, random_spec, JumpLaw, MartingaleSpec,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_ensemble(seed: u64, count: usize) -> Vec<(FilteredSpace, Process)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut spec = random_spec(&mut rng);
                spec.horizon = spec.horizon.min(5);
                generate_martingale(&spec).unwrap()
            })
            .collect()
    }

    #[test]
    fn one_step_flip_has_ratio_one() {
        let (space, m) = generate_martingale(&MartingaleSpec {
            seed: 2,
            branching: 2,
            horizon: 1,
            dim: 1,
            jump_law: JumpLaw::Rademacher,
            scale: 1.0,
        })
        .unwrap();
        for p in [1.0, 1.5, 2.0, 4.0] {
            let r = bdg_report(&space, &m, p, Side::Upper, DEFAULT_CONSTANT_CAP).unwrap();
            assert!((r.ratio - 1.0).abs() < 1e-9, "p = {p}: {r:?}");
        }
        assert!(bdg_report(&space, &m, 0.5, Side::Upper, 64.0).is_err());
    }

    #[test]
    fn sweeps_pass_with_caps_and_isometry() {
        for (space, m) in small_ensemble(31, 20) {
            for p in [1.0, 1.5, 3.0, 4.0] {
                assert!(bdg_report(&space, &m, p, Side::Upper, 64.0).unwrap().pass);
                assert!(bdg_report(&space, &m, p, Side::Lower, 64.0).unwrap().pass);
            }
            let up2 = bdg_report(&space, &m, 2.0, Side::Upper, 64.0).unwrap();
            assert_eq!(up2.tracked_constant, Some(2.0));
            assert!(up2.pass);
            assert!(bdg_report(&space, &m, 2.0, Side::Lower, 64.0).unwrap().pass);
            assert!(isometry_residual(&space, &m) < 1e-10);
            for p in [1.5, 2.0, 4.0] {
                assert!(doob_report(&space, &m, p).unwrap().pass);
            }
        }
    }

    #[test]
    fn conditional_bounds_on_constructed_pairs() {
        for (space, m) in small_ensemble(47, 20) {
            let d = jump_dominating(&space, &m).unwrap();
            let checks = [
                (ConditionalBound::Clb1, 1.0),
                (ConditionalBound::Cub1, 1.0),
                (ConditionalBound::Clb2Minus, 1.25),
                (ConditionalBound::Clb2Minus, 1.9),
                (ConditionalBound::Cub2Minus, 1.25),
                (ConditionalBound::Cub2Minus, 1.9),
                (ConditionalBound::Clb2Plus, 3.0),
                (ConditionalBound::Clb2Plus, 4.0),
            ];
            for (which, p) in checks {
                let r = conditional_bound_report(&space, &m, &d, p, which).unwrap();
                assert!(r.pass, "{which:?} at p = {p}: {r:?}");
            }
            assert!(
                conditional_bound_report(&space, &m, &d, 3.0, ConditionalBound::Cub2Minus)
                    .is_err()
            );
        }
    }

    #[test]
    fn dominance_violation_is_reported() {
        let (space, m) = generate_martingale(&MartingaleSpec {
            seed: 6,
            branching: 2,
            horizon: 3,
            dim: 1,
            jump_law: JumpLaw::Rademacher,
            scale: 1.0,
        })
        .unwrap();
        let tiny = Process::deterministic(&space, &[0.0; 4]).unwrap();
        assert!(matches!(
            conditional_bound_report(&space, &m, &tiny, 1.0, ConditionalBound::Clb1),
            Err(EngineError::Validation(_))
        ));
    }

    #[test]
    fn duality_chain_holds() {
        for (space, m) in small_ensemble(59, 20) {
            for p in [1.5, 2.0, 3.0] {
                let r = duality_lower_to_upper_check(&space, &m, p).unwrap();
                assert!(r.pass, "p = {p}: {r:?}");
            }
        }
    }

    #[test]
    fn kunita_watanabe_pathwise() {
        let members = small_ensemble(61, 10);
        for pair in members.chunks(2) {
            if let [(s1, m1), (_, _)] = pair {
                let shifted = m1.linear_comb(0.5, 0.0, m1).unwrap();
                assert!(kunita_watanabe_excess(m1, &shifted).unwrap() <= 0.0);
                let _ = s1;
            }
        }
    }

    #[test]
    fn interpolation_reduces_to_endpoint() {
        let ens = small_ensemble(73, 15);
        let r = interpolation_lower_check(&ens, 2.0, 4.0, 3.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(interpolation_lower_check(&ens, 3.0, 2.0, 4.0).is_err());
    }
}
