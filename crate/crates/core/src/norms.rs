//! L_p norms (quasi-norms for p < 1) and mixed L_{p,q} norms over finite
//! spaces, plus random vector variables (a single F_T-measurable vector).

use crate::error::{EngineError, Result};
use crate::prob_space::FilteredSpace;

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(EngineError::Domain(format!(
            "exponent must lie in (0, inf), got {p}"
        )));
    }
    Ok(())
}

/// `(E |X|^p)^{1/p}` for a per-atom scalar; absolute values are taken.
pub fn lp_norm(space: &FilteredSpace, values: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if values.len() != space.n_atoms() {
        return Err(EngineError::Structural(format!(
            "{} values for {} atoms",
            values.len(),
            space.n_atoms()
        )));
    }
    let moment: f64 = space
        .probs()
        .iter()
        .zip(values)
        .map(|(pr, v)| pr * v.abs().powf(p))
        .sum();
    Ok(moment.powf(1.0 / p))
}

/// `(E ||X||^p)^{1/p}` for atom-major vector values.
pub fn lp_norm_vec(space: &FilteredSpace, values: &[f64], dim: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if values.len() != space.n_atoms() * dim {
        return Err(EngineError::Structural("vector variable size mismatch".into()));
    }
    let norms: Vec<f64> = (0..space.n_atoms())
        .map(|a| {
            values[a * dim..(a + 1) * dim]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    lp_norm(space, &norms, p)
}

/// A single random vector in R^d: `values[atom * dim + coord]`.
#[derive(Clone, Debug)]
pub struct VectorVar {
    dim: usize,
    values: Vec<f64>,
}

impl VectorVar {
    pub fn new(space: &FilteredSpace, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(EngineError::Structural("dimension must be >= 1".into()));
        }
        if values.len() != space.n_atoms() * dim {
            return Err(EngineError::Structural(format!(
                "{} values for {} atoms x dim {dim}",
                values.len(),
                space.n_atoms()
            )));
        }
        Ok(Self { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, atom: usize) -> &[f64] {
        &self.values[atom * self.dim..(atom + 1) * self.dim]
    }

    #[inline]
    pub fn norm(&self, atom: usize) -> f64 {
        self.value(atom).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn lp(&self, space: &FilteredSpace, p: f64) -> Result<f64> {
        lp_norm_vec(space, &self.values, self.dim, p)
    }
}

/// Mixed-norm exponents: outer `p in (1, inf)`, inner `q in [1, inf]`
/// (`f64::INFINITY` selects the sup norm over the sequence index).
#[derive(Clone, Copy, Debug)]
pub struct MixedNormSpec {
    pub p: f64,
    pub q: f64,
}

impl MixedNormSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(EngineError::Domain(format!(
                "outer exponent must lie in (1, inf), got {}",
                self.p
            )));
        }
        if !(self.q >= 1.0) {
            return Err(EngineError::Domain(format!(
                "inner exponent must lie in [1, inf], got {}",
                self.q
            )));
        }
        Ok(())
    }
}

/// `( E ( sum_k ||f_k||^q )^{p/q} )^{1/p}`, with the sup over `k` at q = inf.
pub fn mixed_norm(space: &FilteredSpace, f: &[VectorVar], spec: MixedNormSpec) -> Result<f64> {
    spec.validate()?;
    if f.is_empty() {
        return Ok(0.0);
    }
    let dim = f[0].dim;
    if f.iter().any(|fk| fk.dim != dim) {
        return Err(EngineError::Structural(
            "mixed norm over vectors of unequal dimension".into(),
        ));
    }
    let inner: Vec<f64> = (0..space.n_atoms())
        .map(|a| {
            if spec.q.is_infinite() {
                f.iter().map(|fk| fk.norm(a)).fold(0.0f64, f64::max)
            } else {
                f.iter()
                    .map(|fk| fk.norm(a).powf(spec.q))
                    .sum::<f64>()
                    .powf(1.0 / spec.q)
            }
        })
        .collect();
    lp_norm(space, &inner, spec.p)
}

/// Conjugate exponent `p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}
