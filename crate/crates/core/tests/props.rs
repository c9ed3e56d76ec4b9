//! Randomized structural properties of the exact engine.

use proptest::prelude::*;

use bdg_core::calculus::{covariation, quadratic_variation};
use bdg_core::prob_space::{
    cond_expect_slice, generate_martingale, hitting_time, stop_process, JumpLaw, MartingaleSpec,
};

fn spec_strategy() -> impl Strategy<Value = MartingaleSpec> {
    (
        any::<u64>(),
        2usize..=3,
        1usize..=6,
        1usize..=3,
        0usize..4,
        0.5f64..2.0,
    )
        .prop_map(|(seed, branching, horizon, dim, law, scale)| MartingaleSpec {
            seed,
            branching,
            horizon,
            dim,
            jump_law: [
                JumpLaw::Rademacher,
                JumpLaw::CenteredUniform,
                JumpLaw::HeavyTailTruncated,
                JumpLaw::PoissonCompensated,
            ][law],
            scale,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tower_property(spec in spec_strategy(), n in 0usize..=6, m in 0usize..=6) {
        let (space, mart) = generate_martingale(&spec).unwrap();
        let t = space.horizon();
        let (n, m) = (n.min(t), m.min(t));
        let x = mart.slice(t);
        let inner = cond_expect_slice(&space, x, mart.dim(), m);
        let outer = cond_expect_slice(&space, &inner, mart.dim(), n);
        let direct = cond_expect_slice(&space, x, mart.dim(), n.min(m));
        for (a, b) in outer.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn conditioning_endpoints(spec in spec_strategy()) {
        let (space, mart) = generate_martingale(&spec).unwrap();
        let t = space.horizon();
        let x = mart.slice(t);
        // At the horizon the partition is (at least as fine as) points of
        // positive mass: conditioning is the identity there.
        let fine = cond_expect_slice(&space, x, mart.dim(), t);
        for (a, b) in fine.iter().zip(x) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // At time 0 it is the plain expectation, constant across atoms.
        let coarse = cond_expect_slice(&space, x, mart.dim(), 0);
        let dim = mart.dim();
        for j in 0..dim {
            let mean: f64 = (0..space.n_atoms())
                .map(|a| space.prob(a) * x[a * dim + j])
                .sum();
            for a in 0..space.n_atoms() {
                prop_assert!((coarse[a * dim + j] - mean).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn polarization(a in spec_strategy(), seed2 in any::<u64>()) {
        let (space, m) = generate_martingale(&a).unwrap();
        let b = MartingaleSpec { seed: seed2, ..a.clone() };
        let (_, n) = generate_martingale(&b).unwrap();
        let sum = m.linear_comb(1.0, 1.0, &n).unwrap();
        let diff = m.linear_comb(1.0, -1.0, &n).unwrap();
        let qp = quadratic_variation(&sum);
        let qm = quadratic_variation(&diff);
        let direct = covariation(&m, &n).unwrap();
        for atom in 0..space.n_atoms() {
            let pol = 0.25 * (qp.terminal(atom) - qm.terminal(atom));
            let scale = 1.0 + qp.terminal(atom).abs() + qm.terminal(atom).abs();
            prop_assert!((pol - direct.terminal(atom)).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn stopped_qv_is_bitwise_exact(spec in spec_strategy(), level in 0.2f64..2.0) {
        let (space, m) = generate_martingale(&spec).unwrap();
        let tau = hitting_time(&space, &m, |mm, n, a| mm.norm(n, a) >= level).unwrap();
        let stopped = stop_process(&space, &m, &tau).unwrap();
        let qv_stopped = quadratic_variation(&stopped);
        let qv = quadratic_variation(&m);
        for a in 0..space.n_atoms() {
            for n in 0..=space.horizon() {
                prop_assert_eq!(qv_stopped.at(n, a), qv.at(n.min(tau.at(a)), a));
            }
        }
    }

    #[test]
    fn energy_identity(spec in spec_strategy()) {
        // E |M_T|^2 = sum_n E |dM_n|^2 for martingales issuing from zero.
        let (space, m) = generate_martingale(&spec).unwrap();
        let t = space.horizon();
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for a in 0..space.n_atoms() {
            let pr = space.prob(a);
            lhs += pr * m.norm(t, a).powi(2);
            for n in 1..=t {
                rhs += pr * m.delta_norm(n, a).powi(2);
            }
        }
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }
}
