//! Time-indexed, atom-indexed processes with values in R^d.
//!
//! Discrete-time convention used everywhere: `X_{n-} := X_{n-1}` and
//! `dX_n := X_n - X_{n-1}` for `n >= 1`, with `dX_0 := X_0`.

use crate::error::{EngineError, Result};
use crate::prob_space::space::FilteredSpace;

/// Measurability tolerance used when validating adapted/predictable flags.
pub const MEASURABILITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adaptedness {
    Adapted,
    Predictable,
    Raw,
}

/// Values are stored per time slice in a flat atom-major layout:
/// `values[n][atom * dim + coord]`.
#[derive(Clone, Debug)]
pub struct Process {
    dim: usize,
    n_atoms: usize,
    values: Vec<Vec<f64>>,
    adaptedness: Adaptedness,
}

impl Process {
    pub fn new(
        space: &FilteredSpace,
        dim: usize,
        values: Vec<Vec<f64>>,
        adaptedness: Adaptedness,
    ) -> Result<Self> {
        let n_atoms = space.n_atoms();
        if dim == 0 {
            return Err(EngineError::Structural("dimension must be >= 1".into()));
        }
        if values.len() != space.horizon() + 1 {
            return Err(EngineError::Structural(format!(
                "expected {} time slices, got {}",
                space.horizon() + 1,
                values.len()
            )));
        }
        if let Some((n, s)) = values
            .iter()
            .enumerate()
            .find(|(_, s)| s.len() != n_atoms * dim)
        {
            return Err(EngineError::Structural(format!(
                "slice {n} has {} entries, expected {}",
                s.len(),
                n_atoms * dim
            )));
        }
        let p = Self {
            dim,
            n_atoms,
            values,
            adaptedness,
        };
        match adaptedness {
            Adaptedness::Raw => {}
            Adaptedness::Adapted => {
                for n in 0..=space.horizon() {
                    p.check_slice_measurable(space, n, n)?;
                }
            }
            Adaptedness::Predictable => {
                p.check_slice_measurable(space, 0, 0)?;
                for n in 1..=space.horizon() {
                    p.check_slice_measurable(space, n, n - 1)?;
                }
            }
        }
        Ok(p)
    }

    fn check_slice_measurable(&self, space: &FilteredSpace, n: usize, level: usize) -> Result<()> {
        for block in space.blocks(level) {
            let rep = block[0];
            for &a in &block[1..] {
                for j in 0..self.dim {
                    let d = (self.values[n][a * self.dim + j]
                        - self.values[n][rep * self.dim + j])
                        .abs();
                    if d > MEASURABILITY_TOL {
                        return Err(EngineError::Validation(format!(
                            "slice {n} is not measurable w.r.t. partition {level} \
                             (atoms {rep}/{a}, coord {j}, gap {d:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn zeros(space: &FilteredSpace, dim: usize) -> Self {
        Self {
            dim,
            n_atoms: space.n_atoms(),
            values: vec![vec![0.0; space.n_atoms() * dim]; space.horizon() + 1],
            adaptedness: Adaptedness::Adapted,
        }
    }

    /// Constant-in-space scalar paths are handy in tests: one value per time.
    pub fn deterministic(space: &FilteredSpace, path: &[f64]) -> Result<Self> {
        let values = path
            .iter()
            .map(|&v| vec![v; space.n_atoms()])
            .collect::<Vec<_>>();
        Self::new(space, 1, values, Adaptedness::Adapted)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_times(&self) -> usize {
        self.values.len()
    }

    pub fn adaptedness(&self) -> Adaptedness {
        self.adaptedness
    }

    pub fn slices(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        &self.values[n]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n]
    }

    #[inline]
    pub fn value(&self, n: usize, atom: usize) -> &[f64] {
        &self.values[n][atom * self.dim..(atom + 1) * self.dim]
    }

    /// Scalar access; the process must have `dim == 1`.
    #[inline]
    pub fn scalar(&self, n: usize, atom: usize) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.values[n][atom]
    }

    #[inline]
    pub fn coord(&self, n: usize, atom: usize, j: usize) -> f64 {
        self.values[n][atom * self.dim + j]
    }

    /// `dX_n` coordinate, with the `dX_0 = X_0` convention.
    #[inline]
    pub fn delta_coord(&self, n: usize, atom: usize, j: usize) -> f64 {
        if n == 0 {
            self.coord(0, atom, j)
        } else {
            self.coord(n, atom, j) - self.coord(n - 1, atom, j)
        }
    }

    #[inline]
    pub fn norm(&self, n: usize, atom: usize) -> f64 {
        self.value(n, atom).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[inline]
    pub fn delta_norm(&self, n: usize, atom: usize) -> f64 {
        (0..self.dim)
            .map(|j| {
                let d = self.delta_coord(n, atom, j);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product of the increments of two processes at (n, atom).
    #[inline]
    pub fn delta_dot(&self, other: &Process, n: usize, atom: usize) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        (0..self.dim)
            .map(|j| self.delta_coord(n, atom, j) * other.delta_coord(n, atom, j))
            .sum()
    }

    /// Inner product of values at (n, atom).
    #[inline]
    pub fn dot(&self, other: &Process, n: usize, atom: usize) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        (0..self.dim)
            .map(|j| self.coord(n, atom, j) * other.coord(n, atom, j))
            .sum()
    }

    /// Re-validates and retags the process with the given flag.
    pub fn with_adaptedness(
        mut self,
        space: &FilteredSpace,
        adaptedness: Adaptedness,
    ) -> Result<Self> {
        self.adaptedness = Adaptedness::Raw;
        Process::new(space, self.dim, std::mem::take(&mut self.values), adaptedness)
    }

    /// Linear combination `a*self + b*other`, keeping the weaker flag.
    pub fn linear_comb(&self, a: f64, b: f64, other: &Process) -> Result<Process> {
        if self.dim != other.dim || self.values.len() != other.values.len() {
            return Err(EngineError::Structural(
                "linear combination of incompatible processes".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| a * u + b * v).collect())
            .collect();
        let adaptedness = match (self.adaptedness, other.adaptedness) {
            (Adaptedness::Predictable, Adaptedness::Predictable) => Adaptedness::Predictable,
            (Adaptedness::Raw, _) | (_, Adaptedness::Raw) => Adaptedness::Raw,
            _ => Adaptedness::Adapted,
        };
        Ok(Process {
            dim: self.dim,
            n_atoms: self.n_atoms,
            values,
            adaptedness,
        })
    }

    /// Coordinate projection as a scalar process.
    pub fn project(&self, j: usize) -> Result<Process> {
        if j >= self.dim {
            return Err(EngineError::Structural(format!(
                "coordinate {j} out of range for dim {}",
                self.dim
            )));
        }
        let values = self
            .values
            .iter()
            .map(|s| (0..self.n_atoms).map(|a| s[a * self.dim + j]).collect())
            .collect();
        Ok(Process {
            dim: 1,
            n_atoms: self.n_atoms,
            values,
            adaptedness: self.adaptedness,
        })
    }
}
