//! Conditional expectation, martingale checks, and stopping operations.

use crate::error::{EngineError, Result};
use crate::prob_space::process::{Adaptedness, Process};
use crate::prob_space::space::{FilteredSpace, StoppingTime};

/// Conditional expectation of a single flat slice (atom-major, `dim`-wide)
/// with respect to `partitions[n]`.
pub fn cond_expect_slice(space: &FilteredSpace, slice: &[f64], dim: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; slice.len()];
    for (b, block) in space.blocks(n).iter().enumerate() {
        let mass = space.block_prob(n, b);
        for j in 0..dim {
            let mut acc = 0.0;
            for &a in block {
                acc += space.prob(a) * slice[a * dim + j];
            }
            let avg = acc / mass;
            for &a in block {
                out[a * dim + j] = avg;
            }
        }
    }
    out
}

/// `E[X_t | F_n]` for every time slice `t`. The result is measurable with
/// respect to `partitions[n]`; if `X` is adapted the result is adapted too.
pub fn cond_expect(space: &FilteredSpace, x: &Process, n: usize) -> Result<Process> {
    if x.n_atoms() != space.n_atoms() || x.n_times() != space.horizon() + 1 {
        return Err(EngineError::Structural(
            "process does not live on this space".into(),
        ));
    }
    if n > space.horizon() {
        return Err(EngineError::Structural(format!(
            "time index {n} exceeds horizon {}",
            space.horizon()
        )));
    }
    let values: Vec<Vec<f64>> = x
        .slices()
        .iter()
        .map(|s| cond_expect_slice(space, s, x.dim(), n))
        .collect();
    let flag = match x.adaptedness() {
        Adaptedness::Raw => Adaptedness::Raw,
        _ => Adaptedness::Adapted,
    };
    Process::new(space, x.dim(), values, flag)
}

/// True iff `M_0 = 0` and every increment has conditional mean zero given
/// the previous partition, both within `tol` (in Euclidean norm).
pub fn is_martingale(space: &FilteredSpace, m: &Process, tol: f64) -> Result<bool> {
    if m.adaptedness() != Adaptedness::Adapted {
        return Err(EngineError::Structural(
            "martingale check requires an adapted process".into(),
        ));
    }
    for a in 0..space.n_atoms() {
        if m.norm(0, a) > tol {
            return Ok(false);
        }
    }
    for n in 1..=space.horizon() {
        for (b, block) in space.blocks(n - 1).iter().enumerate() {
            let mass = space.block_prob(n - 1, b);
            let mut sq = 0.0;
            for j in 0..m.dim() {
                let mut acc = 0.0;
                for &a in block {
                    acc += space.prob(a) * m.delta_coord(n, a, j);
                }
                let mean = acc / mass;
                sq += mean * mean;
            }
            if sq.sqrt() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `X^tau_n = X_{min(n, tau)}`.
pub fn stop_process(space: &FilteredSpace, x: &Process, tau: &StoppingTime) -> Result<Process> {
    if x.adaptedness() == Adaptedness::Raw {
        return Err(EngineError::Structural(
            "stopping applies to adapted processes".into(),
        ));
    }
    let dim = x.dim();
    let values: Vec<Vec<f64>> = (0..x.n_times())
        .map(|n| {
            let mut s = vec![0.0; space.n_atoms() * dim];
            for a in 0..space.n_atoms() {
                let k = n.min(tau.at(a));
                s[a * dim..(a + 1) * dim].copy_from_slice(x.value(k, a));
            }
            s
        })
        .collect();
    Process::new(space, dim, values, Adaptedness::Adapted)
}

/// First time `n` with `pred(M, n, atom)` true, else the horizon. For
/// adapted `M` and a pointwise predicate on the path so far, this is a
/// stopping time by construction; the result is still validated.
pub fn hitting_time<F>(space: &FilteredSpace, m: &Process, pred: F) -> Result<StoppingTime>
where
    F: Fn(&Process, usize, usize) -> bool,
{
    let times = (0..space.n_atoms())
        .map(|a| {
            (0..=space.horizon())
                .find(|&n| pred(m, n, a))
                .unwrap_or(space.horizon())
        })
        .collect();
    StoppingTime::new(space, times)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_invariant_under_conditioning() {
        let s = FilteredSpace::coin_flip();
        let c = Process::deterministic(&s, &[3.5, 3.5]).unwrap();
        for n in 0..=1 {
            let e = cond_expect(&s, &c, n).unwrap();
            for t in 0..=1 {
                for a in 0..2 {
                    assert_eq!(e.scalar(t, a), 3.5);
                }
            }
        }
    }

    #[test]
    fn time_zero_conditioning_is_full_expectation() {
        let s = FilteredSpace::coin_flip();
        let x = Process::new(
            &s,
            1,
            vec![vec![0.0, 0.0], vec![1.0, -1.0]],
            Adaptedness::Adapted,
        )
        .unwrap();
        let e = cond_expect(&s, &x, 0).unwrap();
        assert_eq!(e.scalar(1, 0), 0.0);
        assert_eq!(e.scalar(1, 1), 0.0);
    }

    #[test]
    fn coin_flip_is_a_martingale() {
        let s = FilteredSpace::coin_flip();
        let m = Process::new(
            &s,
            1,
            vec![vec![0.0, 0.0], vec![1.0, -1.0]],
            Adaptedness::Adapted,
        )
        .unwrap();
        assert!(is_martingale(&s, &m, 1e-12).unwrap());
        let drift = Process::deterministic(&s, &[0.0, 1.0]).unwrap();
        assert!(!is_martingale(&s, &drift, 1e-12).unwrap());
    }

    #[test]
    fn stopping_at_horizon_and_zero() {
        let s = FilteredSpace::coin_flip();
        let m = Process::new(
            &s,
            1,
            vec![vec![0.0, 0.0], vec![1.0, -1.0]],
            Adaptedness::Adapted,
        )
        .unwrap();
        let full = stop_process(&s, &m, &StoppingTime::constant(&s, 1).unwrap()).unwrap();
        assert_eq!(full.scalar(1, 0), 1.0);
        let frozen = stop_process(&s, &m, &StoppingTime::constant(&s, 0).unwrap()).unwrap();
        assert_eq!(frozen.scalar(1, 0), 0.0);
    }
}
