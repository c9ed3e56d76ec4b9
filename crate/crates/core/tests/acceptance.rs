//! Full-scale acceptance gate. Each criterion prints one PASS/FAIL line;
//! run with `--nocapture` to see them all on success.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bdg_core::calculus::{
    check_fv_rules, check_ibp, fv_lemma_bounds, integral_qv_identity_residual,
    quadratic_variation, total_variation,
};
use bdg_core::chain::bdg_chain;
use bdg_core::compensation::{
    check_compensator_l1_hilbert, check_compensator_lp, compensator, expectation_residual,
};
use bdg_core::config::McSettings;
use bdg_core::davis::{certify, check_dk_bound, davis_decompose};
use bdg_core::inequalities::{
    bdg_report, conditional_bound_report, isometry_residual, ConditionalBound, Side,
};
use bdg_core::montecarlo::{
    auxiliary_construction_check, bdg_mc_report, AuxConstruction, EnsembleSpec, PathFamily,
};
use bdg_core::norms::VectorVar;
use bdg_core::prob_space::{
    generate_martingale, hitting_time, jump_dominating, random_spec, stop_process, Adaptedness,
    FilteredSpace, JumpLaw, MartingaleSpec, Process,
};
use bdg_core::report::to_csv_string;
use bdg_core::stein::{stein_lp_lp_report, stein_report};
use bdg_core::{run_all, ExperimentConfig};

fn verdict(n: usize, pass: bool, desc: &str) {
    println!(
        "ACCEPTANCE {n}: {} - {desc}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {n} failed: {desc}");
}

fn ensemble(seed: u64, count: usize) -> impl Iterator<Item = (FilteredSpace, Process)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(move |_| {
        let spec = random_spec(&mut rng);
        generate_martingale(&spec).expect("desk-scale spec")
    })
}

fn shifted_tv(space: &FilteredSpace, m: &Process, floor: f64) -> Process {
    let tv = total_variation(m);
    let values = tv
        .values
        .iter()
        .map(|s| s.iter().map(|v| v + floor).collect())
        .collect();
    Process::new(space, 1, values, Adaptedness::Adapted).unwrap()
}

#[test]
fn criterion_1_exact_identities() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut stopped_exact = true;
    for (space, m) in ensemble(101, 10_000) {
        worst = worst.max(check_ibp(&m, &m).unwrap());
        let u = shifted_tv(&space, &m, 1.0);
        let rules = check_fv_rules(&u).unwrap();
        worst = worst.max(rules.sqrt_rule).max(rules.reciprocal_rule);
        // Bounded adapted integrand (clamped copy of the path itself).
        let h_values = m
            .slices()
            .iter()
            .map(|s| {
                (0..space.n_atoms())
                    .map(|a| s[a * m.dim()].clamp(-1.0, 1.0))
                    .collect()
            })
            .collect();
        let h = Process::new(&space, 1, h_values, Adaptedness::Adapted).unwrap();
        worst = worst.max(integral_qv_identity_residual(&space, &h, &m).unwrap());

        let tau = hitting_time(&space, &m, |mm, n, a| mm.norm(n, a) >= 1.0).unwrap();
        let stopped = stop_process(&space, &m, &tau).unwrap();
        let qv_stopped = quadratic_variation(&stopped);
        let qv = quadratic_variation(&m);
        for a in 0..space.n_atoms() {
            for n in 0..=space.horizon() {
                if qv_stopped.at(n, a) != qv.at(n.min(tau.at(a)), a) {
                    stopped_exact = false;
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        1,
        worst <= 1e-10 && stopped_exact && elapsed <= 30.0,
        &format!(
            "exact identities on 10^4 tree martingales: max residual {worst:.2e}, \
             stopped-QV exact = {stopped_exact}, {elapsed:.1} s (budget 30 s)"
        ),
    );
}

#[test]
fn criterion_2_increasing_path_lemma() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut violations = 0usize;
    for q in [0.3, 0.5, 1.5, 3.0] {
        for _ in 0..10_000 {
            let len = rng.gen_range(2..=25);
            let mut v = rng.gen_range(0.0..0.5f64);
            let path: Vec<f64> = (0..len)
                .map(|_| {
                    v += rng.gen_range(0.0..1.0f64);
                    v
                })
                .collect();
            if !fv_lemma_bounds(&path, q).unwrap().ok {
                violations += 1;
            }
        }
    }
    verdict(
        2,
        violations == 0,
        &format!("increasing-path lemma, 10^4 paths x 4 exponents: {violations} violations"),
    );
}

#[test]
fn criterion_3_compensators() {
    let mut worst_expectation = 0.0f64;
    let mut lp_violations = 0usize;
    for (space, m) in ensemble(303, 10_000) {
        let v = shifted_tv(&space, &m, 0.0);
        let pair = compensator(&space, &v).unwrap();
        worst_expectation = worst_expectation.max(expectation_residual(&space, &pair));
        for p in [1.0, 1.5, 2.0, 4.0] {
            if !check_compensator_lp(&space, &v, p).unwrap().pass {
                lp_violations += 1;
            }
        }
    }
    let mut l1_violations = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    for d in [2usize, 3, 8] {
        for _ in 0..2_000 {
            let spec = MartingaleSpec {
                seed: rng.gen(),
                branching: 2,
                horizon: rng.gen_range(2..=5),
                dim: d,
                jump_law: JumpLaw::CenteredUniform,
                scale: rng.gen_range(0.5..2.0),
            };
            let (space, m) = generate_martingale(&spec).unwrap();
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
            let x = Process::new(&space, d, values, Adaptedness::Adapted).unwrap();
            if !check_compensator_l1_hilbert(&space, &x).unwrap().pass {
                l1_violations += 1;
            }
        }
    }
    verdict(
        3,
        worst_expectation <= 1e-10 && lp_violations == 0 && l1_violations == 0,
        &format!(
            "compensators: expectation residual {worst_expectation:.2e}, \
             {lp_violations} L_p violations, {l1_violations} Hilbert L_1 violations"
        ),
    );
}

#[test]
fn criterion_4_davis() {
    let mut cert_failures = 0usize;
    let mut dk_violations = 0usize;
    for (space, m) in ensemble(404, 10_000) {
        let dd = davis_decompose(&space, &m).unwrap();
        if !certify(&space, &m, &dd).ok {
            cert_failures += 1;
        }
        if m.dim() == 1 {
            for p in [1.0, 2.0, 4.0] {
                if !check_dk_bound(&space, &m, p).unwrap().pass {
                    dk_violations += 1;
                }
            }
        } else if !check_dk_bound(&space, &m, 1.0).unwrap().pass {
            dk_violations += 1;
        }
    }
    verdict(
        4,
        cert_failures == 0 && dk_violations == 0,
        &format!(
            "Davis decomposition on 10^4 martingales: {cert_failures} certificate failures, \
             {dk_violations} dK-variation violations"
        ),
    );
}

#[test]
fn criterion_5_stein() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut violations = 0usize;
    let mut contraction_violations = 0usize;
    for i in 0..10_000 {
        let mut spec = random_spec(&mut rng);
        spec.horizon = spec.horizon.min(4);
        spec.dim = 1;
        let (space, _) = generate_martingale(&spec).unwrap();
        let d = if i % 2 == 0 { 1 } else { 3 };
        let k = rng.gen_range(1..=6);
        let f: Vec<VectorVar> = (0..k)
            .map(|_| {
                let vals = (0..space.n_atoms() * d)
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                VectorVar::new(&space, d, vals).unwrap()
            })
            .collect();
        let idx: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=space.horizon())).collect();
        for p in [1.25, 1.5, 2.0, 3.0, 4.0] {
            if !stein_report(&space, &f, &idx, p).unwrap().pass {
                violations += 1;
            }
        }
        let c = stein_lp_lp_report(&space, &f, &idx, 2.0).unwrap();
        if c.rhs > 0.0 && c.ratio > 1.0 + 1e-12 {
            contraction_violations += 1;
        }
    }
    verdict(
        5,
        violations == 0 && contraction_violations == 0,
        &format!(
            "Stein projections, 10^4 instances x 5 exponents x d in {{1,3}}: \
             {violations} constant violations, {contraction_violations} contraction violations"
        ),
    );
}

#[test]
fn criterion_6_conditional_bounds() {
    let checks = [
        (ConditionalBound::Cub2Minus, 1.25),
        (ConditionalBound::Cub2Minus, 1.5),
        (ConditionalBound::Cub2Minus, 1.9),
        (ConditionalBound::Clb2Minus, 1.25),
        (ConditionalBound::Clb2Minus, 1.5),
        (ConditionalBound::Clb2Minus, 1.9),
        (ConditionalBound::Clb2Plus, 3.0),
        (ConditionalBound::Clb2Plus, 4.0),
    ];
    let mut violations = 0usize;
    for (space, m) in ensemble(606, 2_000) {
        let d = jump_dominating(&space, &m).unwrap();
        for &(which, p) in &checks {
            if !conditional_bound_report(&space, &m, &d, p, which)
                .unwrap()
                .pass
            {
                violations += 1;
            }
        }
    }
    verdict(
        6,
        violations == 0,
        &format!(
            "conditional bounds on 2 x 10^3 dominated pairs x 8 (exponent, bound) combos: \
             {violations} violations"
        ),
    );
}

#[test]
fn criterion_7_assembled_theorem() {
    let mut worst_isometry = 0.0f64;
    let mut two_sided_failures = 0usize;
    let mut chain_failures = 0usize;
    for (i, (space, m)) in ensemble(707, 300).enumerate() {
        worst_isometry = worst_isometry.max(isometry_residual(&space, &m));
        for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
            for side in [Side::Upper, Side::Lower] {
                if !bdg_report(&space, &m, p, side, 64.0).unwrap().pass {
                    two_sided_failures += 1;
                }
            }
            if i < 100 {
                for link in bdg_chain(&space, &m, p, 64.0).unwrap() {
                    if !link.pass {
                        chain_failures += 1;
                    }
                }
            }
        }
    }
    verdict(
        7,
        worst_isometry <= 1e-10 && two_sided_failures == 0 && chain_failures == 0,
        &format!(
            "assembled two-sided bound: isometry residual {worst_isometry:.2e}, \
             {two_sided_failures} side failures, {chain_failures} chain-link failures \
             (100 members x 5 exponents, scalar and Hilbert)"
        ),
    );
}

#[test]
fn criterion_8_monte_carlo() {
    let start = Instant::now();
    let spec = EnsembleSpec {
        family: PathFamily::Brownian,
        n_paths: 10_000,
        n_steps: 10_000,
        dim: 1,
        seed: 808,
    };
    let r2 = bdg_mc_report(&spec, 2.0, 64.0).unwrap();
    let p2_ok = r2.upper.pass && r2.lower.pass;
    let mut low_p_ok = true;
    for p in [0.5, 1.0] {
        let r = bdg_mc_report(&spec, p, 64.0).unwrap();
        low_p_ok &= r.upper.pass && r.lower.pass;
    }
    let aux_ub = auxiliary_construction_check(&spec, 1.0, AuxConstruction::Ub2c, 1e-6).unwrap();
    let aux_lb = auxiliary_construction_check(&spec, 1.0, AuxConstruction::Lb2c, 1e-6).unwrap();
    let aux_gt = auxiliary_construction_check(&spec, 4.0, AuxConstruction::LbpGt2, 1e-6).unwrap();
    let aux_ok = aux_ub.ok && aux_lb.ok && aux_gt.ok;
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        8,
        p2_ok && low_p_ok && aux_ok && elapsed <= 120.0,
        &format!(
            "Brownian 10^4 x 10^4: p=2 bracket {p2_ok}, p in {{0.5,1}} two-sided {low_p_ok}, \
             aux fractions {:.4}/{:.4}/{:.4}, {elapsed:.1} s (budget 120 s)",
            aux_ub.pass_fraction, aux_lb.pass_fraction, aux_gt.pass_fraction
        ),
    );
}

#[test]
fn criterion_9_determinism() {
    let cfg = ExperimentConfig {
        ensemble_count: 40,
        mc: McSettings {
            n_paths: 400,
            n_steps: 300,
            dim: 1,
        },
        ..ExperimentConfig::default()
    };
    let a = to_csv_string(&run_all(&cfg).unwrap()).unwrap();
    let b = to_csv_string(&run_all(&cfg).unwrap()).unwrap();
    verdict(
        9,
        a == b && !a.is_empty(),
        &format!(
            "seeded rerun of every suite: {} CSV bytes, byte-identical = {}",
            a.len(),
            a == b
        ),
    );
}
