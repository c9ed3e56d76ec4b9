//! Named verification suites behind the CLI: each suite sweeps an ensemble
//! and emits worst-member report rows, deterministically for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{
    check_fv_rules, check_ibp, check_ito_remainder, fv_lemma_bounds,
    integral_qv_identity_residual, quadratic_variation, total_variation,
};
use crate::chain::bdg_chain;
use crate::compensation::{
    check_compensator_l1_hilbert, check_compensator_lp, compensator, expectation_residual,
};
use crate::config::ExperimentConfig;
use crate::davis::{certify, check_dk_bound, check_jump_doubling, davis_decompose};
use crate::error::{EngineError, Result};
use crate::inequalities::{
    bdg_report, conditional_bound_report, doob_report, duality_lower_to_upper_check,
    interpolation_lower_check, isometry_residual, ConditionalBound, Side,
};
use crate::montecarlo::{
    auxiliary_construction_check, bdg_mc_report, AuxConstruction, EnsembleSpec, PathFamily,
};
use crate::norms::VectorVar;
use crate::prob_space::{
    generate_martingale, hitting_time, jump_dominating, random_spec, stop_process, Adaptedness,
    FilteredSpace, JumpLaw, MartingaleSpec, Process,
};
use crate::report::InequalityReport;
use crate::stein::{stein_lp_lp_report, stein_report};

/// Keeps the single worst row (failing rows beat passing ones, then the
/// largest ratio wins).
struct Worst {
    row: Option<InequalityReport>,
}

impl Worst {
    fn new() -> Self {
        Self { row: None }
    }

    fn push(&mut self, row: InequalityReport) {
        let replace = match &self.row {
            None => true,
            Some(cur) => match (cur.pass, row.pass) {
                (true, false) => true,
                (false, true) => false,
                _ => row.ratio > cur.ratio,
            },
        };
        if replace {
            self.row = Some(row);
        }
    }

    fn into_row(self) -> Option<InequalityReport> {
        self.row
    }
}

/// Zero-failure row: passes iff `failures == 0`.
fn count_row(name: &str, family: &str, p: f64, failures: usize) -> InequalityReport {
    InequalityReport::residual(name, family, p, failures as f64, 0.0)
}

fn members(
    rng: &mut ChaCha8Rng,
    count: usize,
    max_horizon: usize,
) -> Vec<(MartingaleSpec, FilteredSpace, Process)> {
    (0..count)
        .map(|_| {
            let mut spec = random_spec(rng);
            spec.horizon = spec.horizon.min(max_horizon);
            let (space, m) = generate_martingale(&spec).expect("desk-scale spec");
            (spec, space, m)
        })
        .collect()
}

fn shifted_tv_process(space: &FilteredSpace, m: &Process, floor: f64) -> Result<Process> {
    let tv = total_variation(m);
    let values = tv
        .values
        .iter()
        .map(|s| s.iter().map(|v| v + floor).collect())
        .collect();
    Process::new(space, 1, values, Adaptedness::Adapted)
}

fn suite_fv(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xf1);
    let fam = format!("{} random tree martingales", cfg.ensemble_count);
    let mut ibp = 0.0f64;
    let mut sqrt_rule = 0.0f64;
    let mut rec_rule = 0.0f64;
    let mut int_qv = 0.0f64;
    let mut stopped_qv = 0.0f64;
    let mut ito_failures = 0usize;
    for (_, space, m) in members(&mut rng, cfg.ensemble_count, 8) {
        ibp = ibp.max(check_ibp(&m, &m)?);
        let u = shifted_tv_process(&space, &m, 1.0)?;
        let rules = check_fv_rules(&u)?;
        sqrt_rule = sqrt_rule.max(rules.sqrt_rule);
        rec_rule = rec_rule.max(rules.reciprocal_rule);
        let path: Vec<f64> = (0..=space.horizon())
            .map(|n| 1.0 + 0.5 * n as f64)
            .collect();
        let h = Process::deterministic(&space, &path)?;
        int_qv = int_qv.max(integral_qv_identity_residual(&space, &h, &m)?);

        let tau = hitting_time(&space, &m, |mm, n, a| mm.norm(n, a) >= 1.0)?;
        let stopped = stop_process(&space, &m, &tau)?;
        let qv_stopped = quadratic_variation(&stopped);
        let qv = quadratic_variation(&m);
        for a in 0..space.n_atoms() {
            for n in 0..=space.horizon() {
                let expect = qv.at(n.min(tau.at(a)), a);
                stopped_qv = stopped_qv.max((qv_stopped.at(n, a) - expect).abs());
            }
        }
        for p in [2.0, 2.5, 3.0, 4.0] {
            if !check_ito_remainder(&space, &m, p)?.ok {
                ito_failures += 1;
            }
        }
    }
    let mut rows = vec![
        InequalityReport::residual("ibp-identity", &fam, 1.0, ibp, 1e-10),
        InequalityReport::residual("fv-sqrt-rule", &fam, 1.0, sqrt_rule, 1e-10),
        InequalityReport::residual("fv-reciprocal-rule", &fam, 1.0, rec_rule, 1e-10),
        InequalityReport::residual("integral-qv", &fam, 2.0, int_qv, 1e-10),
        InequalityReport::residual("stopped-qv", &fam, 2.0, stopped_qv, 1e-10),
        count_row("ito-remainder", &fam, 2.0, ito_failures),
    ];

    // Increasing-path lemma sweep.
    for q in [0.3, 0.5, 1.5, 3.0] {
        let mut worst = Worst::new();
        let mut failures = 0usize;
        for _ in 0..10_000 {
            let len = rng.gen_range(2..=20);
            let mut v = rng.gen_range(0.0..0.2f64);
            let path: Vec<f64> = (0..len)
                .map(|_| {
                    v += rng.gen_range(0.0..1.0f64);
                    v
                })
                .collect();
            let b = fv_lemma_bounds(&path, q)?;
            if !b.ok {
                failures += 1;
            }
            worst.push(InequalityReport::evaluate(
                "fv-lemma",
                "10000 random increasing paths",
                q,
                b.lhs,
                b.rhs,
                Some(1.0),
            ));
        }
        let mut row = worst.into_row().expect("nonempty sweep");
        if failures > 0 {
            row = row.force_fail();
        }
        rows.push(row);
    }
    Ok(rows)
}

fn suite_compensator(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xc0);
    let fam = format!("{} increasing processes", cfg.ensemble_count);
    let mut expectation = 0.0f64;
    let mut lp_rows: Vec<(f64, Worst)> =
        [1.0, 1.5, 2.0, 4.0].iter().map(|&p| (p, Worst::new())).collect();
    for (_, space, m) in members(&mut rng, cfg.ensemble_count, 6) {
        let v = shifted_tv_process(&space, &m, 0.0)?;
        let pair = compensator(&space, &v)?;
        expectation = expectation.max(expectation_residual(&space, &pair));
        for (p, worst) in lp_rows.iter_mut() {
            worst.push(check_compensator_lp(&space, &v, *p)?);
        }
    }
    let mut rows = vec![InequalityReport::residual(
        "compensator-expectation",
        &fam,
        1.0,
        expectation,
        1e-10,
    )];
    rows.extend(lp_rows.into_iter().filter_map(|(_, w)| w.into_row()));

    for d in [2usize, 3, 8] {
        let mut worst = Worst::new();
        for i in 0..(cfg.ensemble_count / 4).max(10) {
            let spec = MartingaleSpec {
                seed: rng.gen::<u64>().wrapping_add(i as u64),
                branching: 2,
                horizon: 5,
                dim: d,
                jump_law: JumpLaw::CenteredUniform,
                scale: 1.0,
            };
            let (space, m) = generate_martingale(&spec)?;
            // Add a deterministic drift so the compensator is nontrivial.
            let values = m
                .slices()
                .iter()
                .enumerate()
                .map(|(n, s)| {
                    s.iter()
                        .enumerate()
                        .map(|(i, v)| v + 0.2 * n as f64 * ((i % d + 1) as f64))
                        .collect()
                })
                .collect();
            let x = Process::new(&space, d, values, Adaptedness::Adapted)?;
            worst.push(check_compensator_l1_hilbert(&space, &x)?);
        }
        if let Some(row) = worst.into_row() {
            rows.push(row);
        }
    }
    Ok(rows)
}

fn suite_davis(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xda);
    let fam = format!("{} random martingales", cfg.ensemble_count);
    let mut cert_failures = 0usize;
    let mut doubling_failures = 0usize;
    let mut scalar_rows: Vec<(f64, Worst)> =
        [1.0, 2.0, 4.0].iter().map(|&p| (p, Worst::new())).collect();
    let mut vector_row = Worst::new();
    for i in 0..cfg.ensemble_count {
        let mut spec = random_spec(&mut rng);
        spec.horizon = spec.horizon.min(6);
        spec.dim = if i % 3 == 0 { 3 } else { 1 };
        let (space, m) = generate_martingale(&spec)?;
        let dd = davis_decompose(&space, &m)?;
        if !certify(&space, &m, &dd).ok {
            cert_failures += 1;
        }
        if !check_jump_doubling(&space, &m) {
            doubling_failures += 1;
        }
        if m.dim() == 1 {
            for (p, worst) in scalar_rows.iter_mut() {
                worst.push(check_dk_bound(&space, &m, *p)?);
            }
        } else {
            vector_row.push(check_dk_bound(&space, &m, 1.0)?);
        }
    }
    let mut rows = vec![
        count_row("davis-invariants", &fam, 1.0, cert_failures),
        count_row("davis-jump-doubling", &fam, 1.0, doubling_failures),
    ];
    rows.extend(scalar_rows.into_iter().filter_map(|(_, w)| w.into_row()));
    if let Some(row) = vector_row.into_row() {
        rows.push(row);
    }
    Ok(rows)
}

fn suite_bdg_exact(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xbd);
    let fam = format!("{} random martingales", cfg.ensemble_count);
    let mut isometry = 0.0f64;
    let mut side_rows: Vec<(f64, Side, Worst)> = cfg
        .p_values
        .iter()
        .flat_map(|&p| [(p, Side::Upper, Worst::new()), (p, Side::Lower, Worst::new())])
        .collect();
    let mut doob_rows: Vec<(f64, Worst)> =
        [1.5, 2.0, 4.0].iter().map(|&p| (p, Worst::new())).collect();
    let cond_checks = [
        (ConditionalBound::Clb1, 1.0),
        (ConditionalBound::Cub1, 1.0),
        (ConditionalBound::Clb2Minus, 1.25),
        (ConditionalBound::Clb2Minus, 1.5),
        (ConditionalBound::Clb2Minus, 1.9),
        (ConditionalBound::Cub2Minus, 1.25),
        (ConditionalBound::Cub2Minus, 1.5),
        (ConditionalBound::Cub2Minus, 1.9),
        (ConditionalBound::Clb2Plus, 3.0),
        (ConditionalBound::Clb2Plus, 4.0),
    ];
    let mut cond_rows: Vec<(ConditionalBound, f64, Worst)> = cond_checks
        .iter()
        .map(|&(w, p)| (w, p, Worst::new()))
        .collect();
    let mut chain_rows: Vec<InequalityReport> = Vec::new();
    let mut chain_failures = 0usize;
    let chain_members = (cfg.ensemble_count / 6).max(10);

    for (i, (_, space, m)) in members(&mut rng, cfg.ensemble_count, 6).into_iter().enumerate() {
        isometry = isometry.max(isometry_residual(&space, &m));
        for (p, side, worst) in side_rows.iter_mut() {
            if *p >= 1.0 {
                worst.push(bdg_report(&space, &m, *p, *side, cfg.constant_cap)?);
            }
        }
        for (p, worst) in doob_rows.iter_mut() {
            worst.push(doob_report(&space, &m, *p)?);
        }
        let d = jump_dominating(&space, &m)?;
        for (which, p, worst) in cond_rows.iter_mut() {
            worst.push(conditional_bound_report(&space, &m, &d, *p, *which)?);
        }
        if i < chain_members {
            for &p in &cfg.p_values {
                if p < 1.0 {
                    continue;
                }
                for link in bdg_chain(&space, &m, p, cfg.constant_cap)? {
                    if !link.pass {
                        chain_failures += 1;
                        chain_rows.push(link);
                    }
                }
            }
        }
    }

    let mut rows = vec![InequalityReport::residual(
        "p2-isometry",
        &fam,
        2.0,
        isometry,
        1e-10,
    )];
    rows.extend(side_rows.into_iter().filter_map(|(_, _, w)| w.into_row()));
    rows.extend(doob_rows.into_iter().filter_map(|(_, w)| w.into_row()));
    rows.extend(cond_rows.into_iter().filter_map(|(_, _, w)| w.into_row()));
    rows.push(count_row(
        "bdg-chain",
        &format!("{chain_members} members x full proof replay"),
        0.0,
        chain_failures,
    ));
    rows.extend(chain_rows);
    Ok(rows)
}

fn suite_stein(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x57);
    let ps = [1.25, 1.5, 2.0, 3.0, 4.0];
    let dims = [1usize, 3];
    let mut rows: Vec<(f64, usize, Worst)> = ps
        .iter()
        .flat_map(|&p| dims.iter().map(move |&d| (p, d, Worst::new())))
        .collect();
    let mut contraction = Worst::new();
    for _ in 0..cfg.ensemble_count {
        let mut spec = random_spec(&mut rng);
        spec.horizon = spec.horizon.min(5);
        spec.dim = 1;
        let (space, _) = generate_martingale(&spec)?;
        let k = rng.gen_range(1..=6);
        for &d in &dims {
            let f: Vec<VectorVar> = (0..k)
                .map(|_| {
                    let vals = (0..space.n_atoms() * d)
                        .map(|_| rng.gen_range(-1.0..1.0))
                        .collect();
                    VectorVar::new(&space, d, vals).expect("sized above")
                })
                .collect();
            let idx: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=space.horizon())).collect();
            for (p, dim, worst) in rows.iter_mut() {
                if *dim == d {
                    worst.push(stein_report(&space, &f, &idx, *p)?);
                }
            }
            contraction.push(stein_lp_lp_report(&space, &f, &idx, 2.0)?);
        }
    }
    let mut out: Vec<InequalityReport> =
        rows.into_iter().filter_map(|(_, _, w)| w.into_row()).collect();
    if let Some(row) = contraction.into_row() {
        out.push(row);
    }
    Ok(out)
}

fn suite_duality_interp(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd1);
    let ensemble: Vec<(FilteredSpace, Process)> = members(&mut rng, cfg.ensemble_count, 6)
        .into_iter()
        .map(|(_, s, m)| (s, m))
        .collect();
    let mut rows = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let mut worst = Worst::new();
        for (space, m) in &ensemble {
            worst.push(duality_lower_to_upper_check(space, m, p)?);
        }
        if let Some(row) = worst.into_row() {
            rows.push(row);
        }
    }
    rows.push(interpolation_lower_check(&ensemble, 2.0, 4.0, 3.0)?);
    Ok(rows)
}

fn suite_bdg_mc(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    let brownian = EnsembleSpec {
        family: PathFamily::Brownian,
        n_paths: cfg.mc.n_paths,
        n_steps: cfg.mc.n_steps,
        dim: cfg.mc.dim,
        seed: cfg.seed ^ 0x3c,
    };
    let mut rows = Vec::new();
    for p in [0.5, 1.0, 2.0] {
        let r = bdg_mc_report(&brownian, p, cfg.constant_cap)?;
        rows.push(r.upper);
        rows.push(r.lower);
    }
    let fam = format!(
        "brownian {} x {}",
        brownian.n_paths, brownian.n_steps
    );
    for (p, which) in [
        (1.0, AuxConstruction::Ub2c),
        (1.0, AuxConstruction::Lb2c),
        (4.0, AuxConstruction::LbpGt2),
    ] {
        rows.push(auxiliary_construction_check(&brownian, p, which, cfg.aux_eps)?.to_report(&fam));
    }
    let poisson = EnsembleSpec {
        family: PathFamily::CompensatedPoisson { rate: 2.0 },
        ..brownian
    };
    for p in [1.0, 2.0] {
        let r = bdg_mc_report(&poisson, p, cfg.constant_cap)?;
        rows.push(r.upper);
        rows.push(r.lower);
    }
    Ok(rows)
}

pub fn run_suite(name: &str, cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    match name {
        "fv-calculus" => suite_fv(cfg),
        "compensator" => suite_compensator(cfg),
        "davis" => suite_davis(cfg),
        "bdg-exact" => suite_bdg_exact(cfg),
        "stein" => suite_stein(cfg),
        "duality-interp" => suite_duality_interp(cfg),
        "bdg-mc" => suite_bdg_mc(cfg),
        other => Err(EngineError::Config(format!("unknown suite {other:?}"))),
    }
}

/// Runs the configured suites (concurrently; they are independent) and
/// returns the rows in suite order.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<InequalityReport>> {
    cfg.validate()?;
    let results: Vec<Result<Vec<InequalityReport>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .suites
            .iter()
            .map(|s| scope.spawn(move || run_suite(s, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::to_csv_string;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            ensemble_count: 20,
            mc: crate::config::McSettings {
                n_paths: 300,
                n_steps: 200,
                dim: 1,
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn all_suites_pass_at_desk_scale() {
        let cfg = tiny_config();
        let rows = run_all(&cfg).unwrap();
        assert!(!rows.is_empty());
        for row in &rows {
            assert!(row.pass, "{row:?}");
        }
    }

    #[test]
    fn identical_seeds_give_identical_csv() {
        let cfg = tiny_config();
        let a = to_csv_string(&run_all(&cfg).unwrap()).unwrap();
        let b = to_csv_string(&run_all(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_suite_is_a_config_error() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(
            run_suite("nope", &cfg),
            Err(EngineError::Config(_))
        ));
    }
}
