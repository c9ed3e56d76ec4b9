//! Randomized martingale generator on b-ary tree filtrations.
//!
//! Increments are centered exactly within each parent block, so the output
//! passes `is_martingale` at construction-level tolerance regardless of the
//! jump law.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::prob_space::process::{Adaptedness, Process};
use crate::prob_space::space::FilteredSpace;

/// Generated spaces are rejected above this atom count.
pub const ATOM_CAP: usize = 1 << 20;

const HEAVY_TAIL_ALPHA: f64 = 1.5;
const HEAVY_TAIL_CAP: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpLaw {
    Rademacher,
    CenteredUniform,
    HeavyTailTruncated,
    PoissonCompensated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MartingaleSpec {
    pub seed: u64,
    pub branching: usize,
    pub horizon: usize,
    pub dim: usize,
    pub jump_law: JumpLaw,
    pub scale: f64,
}

impl MartingaleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.branching < 2 {
            return Err(EngineError::Structural("branching must be >= 2".into()));
        }
        if self.horizon < 1 {
            return Err(EngineError::Structural("horizon must be >= 1".into()));
        }
        if self.dim < 1 {
            return Err(EngineError::Structural("dim must be >= 1".into()));
        }
        if !(self.scale > 0.0) {
            return Err(EngineError::Structural("scale must be positive".into()));
        }
        let mut atoms: usize = 1;
        for _ in 0..self.horizon {
            atoms = atoms
                .checked_mul(self.branching)
                .filter(|&a| a <= ATOM_CAP)
                .ok_or_else(|| {
                    EngineError::Capacity(format!(
                        "branching^horizon = {}^{} exceeds the atom cap {}",
                        self.branching, self.horizon, ATOM_CAP
                    ))
                })?;
        }
        Ok(())
    }
}

fn draw_jump(rng: &mut ChaCha8Rng, law: JumpLaw, scale: f64) -> f64 {
    match law {
        JumpLaw::Rademacher => {
            if rng.gen::<bool>() {
                scale
            } else {
                -scale
            }
        }
        JumpLaw::CenteredUniform => rng.gen_range(-scale..scale),
        JumpLaw::HeavyTailTruncated => {
            let u: f64 = rng.gen_range(1e-12..1.0);
            let mag = u.powf(-1.0 / HEAVY_TAIL_ALPHA).min(HEAVY_TAIL_CAP);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            sign * scale * mag
        }
        JumpLaw::PoissonCompensated => {
            let k = Poisson::new(1.0).unwrap().sample(rng);
            scale * (k - 1.0)
        }
    }
}

/// Builds the b-ary tree filtration of depth `horizon` with randomized edge
/// probabilities, and an adapted process with exact conditional-mean-zero
/// increments. `M_0 = 0`.
pub fn generate_martingale(spec: &MartingaleSpec) -> Result<(FilteredSpace, Process)> {
    spec.validate()?;
    let b = spec.branching;
    let t = spec.horizon;
    let d = spec.dim;
    let n_atoms = b.pow(t as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Edge probabilities: level by level, each node splits its mass among b
    // children with weights drawn in [0.5, 1.5] and normalized.
    let mut level_probs = vec![1.0f64];
    for _ in 0..t {
        let mut next = Vec::with_capacity(level_probs.len() * b);
        for &mass in &level_probs {
            let w: Vec<f64> = (0..b).map(|_| rng.gen_range(0.5..1.5)).collect();
            let tot: f64 = w.iter().sum();
            next.extend(w.iter().map(|wi| mass * wi / tot));
        }
        level_probs = next;
    }
    // Leaf probabilities sum to 1 up to rounding; renormalize exactly once.
    let tot: f64 = level_probs.iter().sum();
    let probs: Vec<f64> = level_probs.iter().map(|p| p / tot).collect();

    let outcomes = (0..n_atoms).map(|i| format!("w{i}")).collect();
    let partitions = (0..=t)
        .map(|n| {
            let width = b.pow((t - n) as u32);
            (0..b.pow(n as u32))
                .map(|k| (k * width..(k + 1) * width).collect())
                .collect()
        })
        .collect();
    let space = FilteredSpace::new(outcomes, probs, t, partitions)?;

    // Increments: per step and parent block, draw one raw vector per child
    // and subtract the block-conditional mean.
    let mut values = vec![vec![0.0; n_atoms * d]];
    for n in 1..=t {
        let width = b.pow((t - n) as u32);
        let mut slice = values[n - 1].clone();
        for parent in 0..b.pow((n - 1) as u32) {
            let children: Vec<usize> = (0..b).map(|c| parent * b + c).collect();
            let child_mass: Vec<f64> = children
                .iter()
                .map(|&cb| space.block_prob(n, cb))
                .collect();
            let mass: f64 = child_mass.iter().sum();
            for j in 0..d {
                let raw: Vec<f64> = (0..b)
                    .map(|_| draw_jump(&mut rng, spec.jump_law, spec.scale))
                    .collect();
                let mean: f64 = raw
                    .iter()
                    .zip(&child_mass)
                    .map(|(x, w)| x * w / mass)
                    .sum();
                for (c, &cb) in children.iter().enumerate() {
                    let inc = raw[c] - mean;
                    for a in cb * width..(cb + 1) * width {
                        slice[a * d + j] += inc;
                    }
                }
            }
        }
        values.push(slice);
    }

    let m = Process::new(&space, d, values, Adaptedness::Adapted)?;
    Ok((space, m))
}

/// Jump-dominating process for the conditional-bound propositions: an
/// increasing adapted `D` with `|dM_n| <= D_{n-1}` pathwise. `D_n` carries
/// the conditional essential sup of the next jump norm, which is known one
/// step ahead on a finite space.
pub fn jump_dominating(space: &FilteredSpace, m: &Process) -> Result<Process> {
    // bound[n][atom]: max of |dM_n| over the partition-(n-1) block, n >= 1.
    let t = space.horizon();
    let mut bound = vec![vec![0.0f64; space.n_atoms()]; t + 2];
    for n in 1..=t {
        for (b, block) in space.blocks(n - 1).iter().enumerate() {
            let _ = b;
            let mx = block
                .iter()
                .map(|&a| m.delta_norm(n, a))
                .fold(0.0f64, f64::max);
            for &a in block {
                bound[n][a] = mx;
            }
        }
    }
    let mut values = Vec::with_capacity(t + 1);
    let mut prev = vec![0.0f64; space.n_atoms()];
    for n in 0..=t {
        let slice: Vec<f64> = (0..space.n_atoms())
            .map(|a| prev[a].max(bound[n + 1][a]))
            .collect();
        prev = slice.clone();
        values.push(slice);
    }
    Process::new(space, 1, values, Adaptedness::Adapted)
}

/// Checks `|dM_n| <= D_{n-1}` pathwise; returns the first offender.
pub fn check_dominance(
    space: &FilteredSpace,
    m: &Process,
    d: &Process,
) -> Result<()> {
    for n in 1..=space.horizon() {
        for a in 0..space.n_atoms() {
            let jump = m.delta_norm(n, a);
            let dom = d.scalar(n - 1, a);
            if jump > dom + 1e-12 {
                return Err(EngineError::Validation(format!(
                    "jump dominance violated at time {n}, atom {a}: |dM| = {jump} > D_- = {dom}"
                )));
            }
        }
    }
    Ok(())
}

/// Draws a desk-scale random spec: b in {2,3}, horizon <= 8, dim <= 4.
pub fn random_spec(rng: &mut ChaCha8Rng) -> MartingaleSpec {
    let laws = [
        JumpLaw::Rademacher,
        JumpLaw::CenteredUniform,
        JumpLaw::HeavyTailTruncated,
        JumpLaw::PoissonCompensated,
    ];
    MartingaleSpec {
        seed: rng.gen(),
        branching: if rng.gen::<bool>() { 2 } else { 3 },
        horizon: rng.gen_range(1..=8),
        dim: rng.gen_range(1..=4),
        jump_law: laws[rng.gen_range(0..laws.len())],
        scale: rng.gen_range(0.5..2.0),
    }
}
