//! The projection operator `T(f_k)_k = (E[f_k | F_{n_k}])_k` on sequences of
//! random vectors, and its L_p(l_2) bound with an interpolation-derived
//! constant.

use crate::error::{EngineError, Result};
use crate::norms::{conjugate, mixed_norm, MixedNormSpec, VectorVar};
use crate::prob_space::{cond_expect_slice, FilteredSpace};
use crate::report::InequalityReport;

pub fn stein_apply(
    space: &FilteredSpace,
    f: &[VectorVar],
    n_indices: &[usize],
) -> Result<Vec<VectorVar>> {
    if f.len() != n_indices.len() {
        return Err(EngineError::Structural(format!(
            "{} vectors but {} time indices",
            f.len(),
            n_indices.len()
        )));
    }
    if let Some(&n) = n_indices.iter().find(|&&n| n > space.horizon()) {
        return Err(EngineError::Structural(format!(
            "time index {n} exceeds horizon {}",
            space.horizon()
        )));
    }
    f.iter()
        .zip(n_indices)
        .map(|(fk, &nk)| {
            let projected = cond_expect_slice(space, fk.values(), fk.dim(), nk);
            VectorVar::new(space, fk.dim(), projected)
        })
        .collect()
}

/// Bound constant for the L_p(l_2) estimate, derived by interpolating the
/// endpoint constants 1 (at l_p) and p' (at l_infinity, by the maximal
/// bound) with theta = 1 - p/2, then dualizing for p > 2:
/// `C_p = (p')^{1 - p/2}` for `1 < p <= 2` and `C_p = C_{p'}` above 2.
pub fn stein_constant(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(EngineError::Domain(format!(
            "exponent must lie in (1, inf), got {p}"
        )));
    }
    let r = if p <= 2.0 { p } else { conjugate(p) };
    Ok(conjugate(r).powf(1.0 - r / 2.0))
}

/// `||Tf||_{L_p(l_2)} <= C_p ||f||_{L_p(l_2)}`.
pub fn stein_report(
    space: &FilteredSpace,
    f: &[VectorVar],
    n_indices: &[usize],
    p: f64,
) -> Result<InequalityReport> {
    let c = stein_constant(p)?;
    let tf = stein_apply(space, f, n_indices)?;
    let spec = MixedNormSpec { p, q: 2.0 };
    let lhs = mixed_norm(space, &tf, spec)?;
    let rhs = mixed_norm(space, f, spec)?;
    let dim = f.first().map_or(0, |fk| fk.dim());
    Ok(InequalityReport::evaluate(
        "stein-lp-l2",
        &format!("sequence of {} vectors, d = {dim}", f.len()),
        p,
        lhs,
        rhs,
        Some(c),
    ))
}

/// Contraction on L_p(l_p): conditional Jensen coordinate by coordinate,
/// constant exactly 1.
pub fn stein_lp_lp_report(
    space: &FilteredSpace,
    f: &[VectorVar],
    n_indices: &[usize],
    p: f64,
) -> Result<InequalityReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(EngineError::Domain(format!(
            "exponent must lie in (1, inf), got {p}"
        )));
    }
    let tf = stein_apply(space, f, n_indices)?;
    let spec = MixedNormSpec { p, q: p };
    let lhs = mixed_norm(space, &tf, spec)?;
    let rhs = mixed_norm(space, f, spec)?;
    Ok(InequalityReport::evaluate(
        "stein-lp-lp",
        "contraction endpoint",
        p,
        lhs,
        rhs,
        Some(1.0),
    ))
}
