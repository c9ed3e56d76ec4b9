//! Finite filtered probability spaces.
//!
//! A space is a finite set of atoms with strictly positive probabilities and
//! a filtration given by a chain of refining partitions, one per time index
//! `0..=horizon`. Partition 0 is always the trivial partition, so time-0
//! measurable means constant. The terminal partition is allowed to be
//! coarser than the atom set.

use crate::error::{EngineError, Result};

/// Tolerance for the total-probability check at construction.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FilteredSpace {
    outcomes: Vec<String>,
    probs: Vec<f64>,
    horizon: usize,
    /// `partitions[n]` is a list of blocks, each a sorted list of atom indices.
    partitions: Vec<Vec<Vec<usize>>>,
    /// `block_of[n][atom]` is the index of the block of `partitions[n]`
    /// containing `atom`. Precomputed for O(1) conditioning.
    block_of: Vec<Vec<usize>>,
    /// `block_prob[n][block]` is the total probability of the block.
    block_prob: Vec<Vec<f64>>,
}

impl FilteredSpace {
    /// Builds and validates a space. Atoms carrying exactly zero probability
    /// are pruned before validation; negative probabilities are rejected.
    pub fn new(
        outcomes: Vec<String>,
        probs: Vec<f64>,
        horizon: usize,
        partitions: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != probs.len() {
            return Err(EngineError::Structural(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(EngineError::Validation(format!("invalid probability {p}")));
        }

        // Prune zero-probability atoms, remapping indices in every block.
        let keep: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
        if keep.is_empty() {
            return Err(EngineError::Validation("all atoms have probability zero".into()));
        }
        let mut remap = vec![usize::MAX; probs.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let outcomes: Vec<String> = keep.iter().map(|&i| outcomes[i].clone()).collect();
        let probs: Vec<f64> = keep.iter().map(|&i| probs[i]).collect();
        let partitions: Vec<Vec<Vec<usize>>> = partitions
            .into_iter()
            .map(|blocks| {
                blocks
                    .into_iter()
                    .filter_map(|block| {
                        let mut b: Vec<usize> = block
                            .into_iter()
                            .filter_map(|a| remap.get(a).copied().filter(|&r| r != usize::MAX))
                            .collect();
                        b.sort_unstable();
                        if b.is_empty() {
                            None
                        } else {
                            Some(b)
                        }
                    })
                    .collect()
            })
            .collect();

        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(EngineError::Validation(format!(
                "probabilities sum to {total}, expected 1 within {PROB_SUM_TOL}"
            )));
        }
        if partitions.len() != horizon + 1 {
            return Err(EngineError::Structural(format!(
                "expected {} partitions for horizon {horizon}, got {}",
                horizon + 1,
                partitions.len()
            )));
        }

        let n_atoms = probs.len();
        let mut block_of = Vec::with_capacity(partitions.len());
        let mut block_prob = Vec::with_capacity(partitions.len());
        for (n, blocks) in partitions.iter().enumerate() {
            let mut owner = vec![usize::MAX; n_atoms];
            let mut bp = Vec::with_capacity(blocks.len());
            for (b, block) in blocks.iter().enumerate() {
                let mut mass = 0.0;
                for &a in block {
                    if a >= n_atoms {
                        return Err(EngineError::Structural(format!(
                            "partition {n} references atom {a} out of range"
                        )));
                    }
                    if owner[a] != usize::MAX {
                        return Err(EngineError::Validation(format!(
                            "atom {a} appears in two blocks of partition {n}"
                        )));
                    }
                    owner[a] = b;
                    mass += probs[a];
                }
                bp.push(mass);
            }
            if owner.iter().any(|&b| b == usize::MAX) {
                return Err(EngineError::Validation(format!(
                    "partition {n} does not cover all atoms"
                )));
            }
            block_of.push(owner);
            block_prob.push(bp);
        }

        if partitions[0].len() != 1 {
            return Err(EngineError::Validation(
                "partition 0 must be the trivial partition".into(),
            ));
        }
        // Refinement: every block of partitions[n+1] sits inside one block
        // of partitions[n].
        for n in 0..horizon {
            for block in &partitions[n + 1] {
                let parent = block_of[n][block[0]];
                if block.iter().any(|&a| block_of[n][a] != parent) {
                    return Err(EngineError::Validation(format!(
                        "partition {} does not refine partition {n}",
                        n + 1
                    )));
                }
            }
        }

        Ok(Self {
            outcomes,
            probs,
            horizon,
            partitions,
            block_of,
            block_prob,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.probs.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, atom: usize) -> f64 {
        self.probs[atom]
    }

    pub fn blocks(&self, n: usize) -> &[Vec<usize>] {
        &self.partitions[n]
    }

    pub fn partitions(&self) -> &[Vec<Vec<usize>>] {
        &self.partitions
    }

    pub fn block_of(&self, n: usize, atom: usize) -> usize {
        self.block_of[n][atom]
    }

    pub fn block_prob(&self, n: usize, block: usize) -> f64 {
        self.block_prob[n][block]
    }

    /// Expectation of a per-atom scalar.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Two fair atoms, horizon 1, fully revealed at time 1.
    pub fn coin_flip() -> Self {
        Self::new(
            vec!["h".into(), "t".into()],
            vec![0.5, 0.5],
            1,
            vec![vec![vec![0, 1]], vec![vec![0], vec![1]]],
        )
        .expect("static space is valid")
    }
}

/// A stopping time: one time index per atom, with `horizon` meaning
/// "not stopped strictly before the horizon".
#[derive(Clone, Debug)]
pub struct StoppingTime {
    times: Vec<usize>,
}

impl StoppingTime {
    /// Validates the measurability invariant: for each `n`, the event
    /// `{tau <= n}` is a union of blocks of `partitions[n]`.
    pub fn new(space: &FilteredSpace, times: Vec<usize>) -> Result<Self> {
        if times.len() != space.n_atoms() {
            return Err(EngineError::Structural(format!(
                "stopping time over {} atoms on a space with {}",
                times.len(),
                space.n_atoms()
            )));
        }
        if let Some(&t) = times.iter().find(|&&t| t > space.horizon()) {
            return Err(EngineError::Validation(format!(
                "stopping value {t} exceeds horizon {}",
                space.horizon()
            )));
        }
        for n in 0..=space.horizon() {
            for block in space.blocks(n) {
                let first = times[block[0]] <= n;
                if block.iter().any(|&a| (times[a] <= n) != first) {
                    return Err(EngineError::Validation(format!(
                        "event {{tau <= {n}}} is not measurable at time {n}"
                    )));
                }
            }
        }
        Ok(Self { times })
    }

    pub fn constant(space: &FilteredSpace, t: usize) -> Result<Self> {
        Self::new(space, vec![t; space.n_atoms()])
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn at(&self, atom: usize) -> usize {
        self.times[atom]
    }
}
