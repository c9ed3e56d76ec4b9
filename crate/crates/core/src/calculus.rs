//! Stochastic integrals, quadratic (co)variation, maximal functions, total
//! variation, and the finite-variation calculus identities — all exact on
//! finite spaces under the `dX_0 = X_0` convention.

use crate::error::{EngineError, Result};
use crate::prob_space::{Adaptedness, FilteredSpace, Process};

/// A scalar pathwise functional: one value per (time, atom).
#[derive(Clone, Debug)]
pub struct PathFunctional {
    pub name: String,
    pub values: Vec<Vec<f64>>,
}

impl PathFunctional {
    pub fn at(&self, n: usize, atom: usize) -> f64 {
        self.values[n][atom]
    }

    pub fn terminal(&self, atom: usize) -> f64 {
        self.values.last().unwrap()[atom]
    }

    pub fn terminal_slice(&self) -> &[f64] {
        self.values.last().unwrap()
    }

    /// Converts into a scalar adapted process (raw if not measurable).
    pub fn to_process(&self, space: &FilteredSpace) -> Result<Process> {
        Process::new(space, 1, self.values.clone(), Adaptedness::Adapted)
    }
}

fn accumulate<F>(m: &Process, name: &str, init: F, step: fn(f64, f64) -> f64) -> PathFunctional
where
    F: Fn(usize) -> f64,
{
    // `init(atom)` seeds time 0 with the dX_0 = X_0 contribution.
    let t = m.n_times() - 1;
    let n_atoms = m.n_atoms();
    let mut values = Vec::with_capacity(t + 1);
    values.push((0..n_atoms).map(&init).collect::<Vec<_>>());
    for n in 1..=t {
        let prev = &values[n - 1];
        let slice = (0..n_atoms)
            .map(|a| step(prev[a], m.delta_norm(n, a)))
            .collect();
        values.push(slice);
    }
    PathFunctional {
        name: name.into(),
        values,
    }
}

/// `[M,N]_n = sum_{k<=n} (dM_k, dN_k)`, including the `k = 0` term.
pub fn covariation(m: &Process, n: &Process) -> Result<PathFunctional> {
    if m.dim() != n.dim() || m.n_atoms() != n.n_atoms() || m.n_times() != n.n_times() {
        return Err(EngineError::Structural(
            "covariation of incompatible processes".into(),
        ));
    }
    let t = m.n_times() - 1;
    let mut values = Vec::with_capacity(t + 1);
    values.push(
        (0..m.n_atoms())
            .map(|a| m.delta_dot(n, 0, a))
            .collect::<Vec<_>>(),
    );
    for k in 1..=t {
        let prev = &values[k - 1];
        let slice = (0..m.n_atoms())
            .map(|a| prev[a] + m.delta_dot(n, k, a))
            .collect();
        values.push(slice);
    }
    Ok(PathFunctional {
        name: "[M,N]".into(),
        values,
    })
}

/// `[M,M]_n = sum_{k<=n} |dM_k|^2`; pathwise nondecreasing.
pub fn quadratic_variation(m: &Process) -> PathFunctional {
    let mut pf = covariation(m, m).expect("self-covariation is always compatible");
    pf.name = "[M,M]".into();
    pf
}

/// Running supremum of `|M|`.
pub fn maximal(m: &Process) -> PathFunctional {
    let t = m.n_times() - 1;
    let mut values = Vec::with_capacity(t + 1);
    values.push((0..m.n_atoms()).map(|a| m.norm(0, a)).collect::<Vec<_>>());
    for n in 1..=t {
        let prev = &values[n - 1];
        let slice = (0..m.n_atoms())
            .map(|a| prev[a].max(m.norm(n, a)))
            .collect();
        values.push(slice);
    }
    PathFunctional {
        name: "M*".into(),
        values,
    }
}

/// Running supremum of `|dM|` (the process `S`).
pub fn jump_maximal(m: &Process) -> PathFunctional {
    accumulate(m, "S", |a| m.delta_norm(0, a), f64::max)
}

/// Running total variation `sum_{k<=n} |dX_k|`.
pub fn total_variation(x: &Process) -> PathFunctional {
    accumulate(x, "var", |a| x.delta_norm(0, a), |acc, d| acc + d)
}

/// Stochastic integral `(H . M)_n = sum_{k=1..n} H^pred_k dM_k` for a scalar
/// integrand. A predictable `H` is used as-is; an adapted `H` is left-shifted
/// (the integrand at step `k` is `H_{k-1}`).
pub fn stoch_integral(space: &FilteredSpace, h: &Process, m: &Process) -> Result<Process> {
    if h.dim() != 1 {
        return Err(EngineError::Structural(
            "only scalar integrands are supported".into(),
        ));
    }
    if h.n_atoms() != m.n_atoms() || h.n_times() != m.n_times() {
        return Err(EngineError::Structural(
            "integrand and integrator live on different spaces".into(),
        ));
    }
    if h.adaptedness() == Adaptedness::Raw {
        return Err(EngineError::Structural(
            "integrand must be predictable or adapted".into(),
        ));
    }
    let predictable = h.adaptedness() == Adaptedness::Predictable;
    let t = m.n_times() - 1;
    let dim = m.dim();
    let mut values = vec![vec![0.0; m.n_atoms() * dim]];
    for k in 1..=t {
        let mut slice = values[k - 1].clone();
        for a in 0..m.n_atoms() {
            let w = if predictable {
                h.scalar(k, a)
            } else {
                h.scalar(k - 1, a)
            };
            for j in 0..dim {
                slice[a * dim + j] += w * m.delta_coord(k, a, j);
            }
        }
        values.push(slice);
    }
    Process::new(space, dim, values, Adaptedness::Adapted)
}

/// The integrand values actually used at each step (after the left shift),
/// as a scalar per (time, atom) with index n >= 1 meaningful.
fn effective_integrand(h: &Process, k: usize, a: usize) -> f64 {
    if h.adaptedness() == Adaptedness::Predictable {
        h.scalar(k, a)
    } else {
        h.scalar(k - 1, a)
    }
}

/// `[H.M, H.M]_T` computed from the identity `H^2 . [M,M]`; used as the
/// algebraic route against the direct quadratic variation.
pub fn integral_qv_identity_residual(
    space: &FilteredSpace,
    h: &Process,
    m: &Process,
) -> Result<f64> {
    let n = stoch_integral(space, h, m)?;
    let qv_n = quadratic_variation(&n);
    let qv_m = quadratic_variation(m);
    let t = m.n_times() - 1;
    let mut worst = 0.0f64;
    for a in 0..m.n_atoms() {
        let mut acc = 0.0;
        for k in 1..=t {
            let w = effective_integrand(h, k, a);
            acc += w * w * (qv_m.at(k, a) - qv_m.at(k - 1, a));
            worst = worst.max((qv_n.at(k, a) - acc).abs());
        }
    }
    Ok(worst)
}

/// Residual of the finite-variation integration-by-parts identity
/// `(U_n, V_n) = sum_{k<=n} (U_{k-1}, dV_k) + sum_{k<=n} (V_k, dU_k)`
/// with `U_{-1} := 0`.
pub fn check_ibp(u: &Process, v: &Process) -> Result<f64> {
    if u.dim() != v.dim() || u.n_atoms() != v.n_atoms() || u.n_times() != v.n_times() {
        return Err(EngineError::Structural(
            "integration by parts needs compatible processes".into(),
        ));
    }
    let t = u.n_times() - 1;
    let mut worst = 0.0f64;
    for a in 0..u.n_atoms() {
        let mut acc = 0.0;
        for k in 0..=t {
            for j in 0..u.dim() {
                let u_left = if k == 0 { 0.0 } else { u.coord(k - 1, a, j) };
                acc += u_left * v.delta_coord(k, a, j) + v.coord(k, a, j) * u.delta_coord(k, a, j);
            }
            worst = worst.max((u.dot(v, k, a) - acc).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug)]
pub struct FvRuleResiduals {
    pub sqrt_rule: f64,
    pub reciprocal_rule: f64,
}

/// Residuals of `d(U^{1/2}) = dU / (U_-^{1/2} + U^{1/2})` and
/// `d(-1/U) = dU / (U U_-)` over steps `n >= 1`, for positive scalar `U`.
pub fn check_fv_rules(u: &Process) -> Result<FvRuleResiduals> {
    if u.dim() != 1 {
        return Err(EngineError::Structural("fv rules apply to scalar U".into()));
    }
    let t = u.n_times() - 1;
    let mut sqrt_rule = 0.0f64;
    let mut reciprocal_rule = 0.0f64;
    for a in 0..u.n_atoms() {
        for n in 0..=t {
            if u.scalar(n, a) <= 0.0 {
                return Err(EngineError::Domain(format!(
                    "U must be strictly positive, got {} at ({n}, {a})",
                    u.scalar(n, a)
                )));
            }
        }
        for n in 1..=t {
            let prev = u.scalar(n - 1, a);
            let cur = u.scalar(n, a);
            let du = cur - prev;
            let lhs_sqrt = cur.sqrt() - prev.sqrt();
            sqrt_rule = sqrt_rule.max((lhs_sqrt - du / (prev.sqrt() + cur.sqrt())).abs());
            let lhs_rec = -1.0 / cur + 1.0 / prev;
            reciprocal_rule = reciprocal_rule.max((lhs_rec - du / (cur * prev)).abs());
        }
    }
    Ok(FvRuleResiduals {
        sqrt_rule,
        reciprocal_rule,
    })
}

/// Regularization floor used for the `q < 1` branch.
pub const FV_LEMMA_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug)]
pub struct FvLemmaBounds {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Bounds for an increasing scalar path starting at zero:
/// `sum V_{k-1} d(V^{q-1})_k <= (q-1)/q V_T^q` for `q > 1` and
/// `sum V_{k-1} d(-V^{q-1})_k <= (1-q)/q V_T^q` for `q in (0,1)`, the latter
/// after clamping the path below at the regularization floor (the reported
/// rhs carries the `eps^q` slack explicitly).
pub fn fv_lemma_bounds(path: &[f64], q: f64) -> Result<FvLemmaBounds> {
    if q <= 0.0 || (q - 1.0).abs() < 1e-15 {
        return Err(EngineError::Domain(format!(
            "q must lie in (0,1) or (1,inf), got {q}"
        )));
    }
    if path.windows(2).any(|w| w[1] < w[0]) || path.first().copied().unwrap_or(0.0) < 0.0 {
        return Err(EngineError::Domain("path must be increasing from V_0 >= 0".into()));
    }
    let (lhs, rhs) = if q > 1.0 {
        let lhs: f64 = path
            .windows(2)
            .map(|w| w[0] * (w[1].powf(q - 1.0) - w[0].powf(q - 1.0)))
            .sum();
        let rhs = (q - 1.0) / q * path.last().unwrap().powf(q);
        (lhs, rhs)
    } else {
        let reg: Vec<f64> = path.iter().map(|&v| v.max(FV_LEMMA_EPS)).collect();
        let lhs: f64 = reg
            .windows(2)
            .map(|w| w[0] * (w[0].powf(q - 1.0) - w[1].powf(q - 1.0)))
            .sum();
        let rhs = (1.0 - q) / q * reg.last().unwrap().powf(q) + FV_LEMMA_EPS.powf(q);
        (lhs, rhs)
    };
    Ok(FvLemmaBounds {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + 1e-12) + 1e-12,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ItoRemainderCheck {
    /// Worst pathwise excess of the Taylor remainder over its bound.
    pub max_excess: f64,
    /// Expectation of the pathwise martingale term; zero for martingales.
    pub martingale_mean: f64,
    pub ok: bool,
}

/// Second-order Taylor remainder of `|M|^p` along the path against the
/// bound `p(p-1)/2 (M*_T)^{p-2} [M,M]_T`, plus the zero-mean check on the
/// first-order term. Requires `p >= 2`.
pub fn check_ito_remainder(
    space: &FilteredSpace,
    m: &Process,
    p: f64,
) -> Result<ItoRemainderCheck> {
    if p < 2.0 {
        return Err(EngineError::Domain(format!(
            "remainder bound needs p >= 2, got {p}"
        )));
    }
    let t = space.horizon();
    let qv = quadratic_variation(m);
    let sup = maximal(m);
    let mut max_excess = f64::NEG_INFINITY;
    let mut mart_mean = 0.0;
    let mut scale = 0.0f64;
    for a in 0..space.n_atoms() {
        let mut remainder = 0.0;
        let mut mart = 0.0;
        for n in 1..=t {
            let prev_norm = m.norm(n - 1, a);
            let cur_norm = m.norm(n, a);
            let grad_weight = if prev_norm == 0.0 {
                if p == 2.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                prev_norm.powf(p - 2.0)
            };
            let inner: f64 = (0..m.dim())
                .map(|j| m.coord(n - 1, a, j) * m.delta_coord(n, a, j))
                .sum();
            let first_order = p * grad_weight * inner;
            remainder += cur_norm.powf(p) - prev_norm.powf(p) - first_order;
            mart += first_order;
        }
        let bound = p * (p - 1.0) / 2.0 * sup.terminal(a).powf(p - 2.0) * qv.terminal(a);
        max_excess = max_excess.max(remainder - bound * (1.0 + 1e-12) - 1e-12);
        mart_mean += space.prob(a) * mart;
        scale = scale.max(bound.abs());
    }
    let ok = max_excess <= 0.0 && mart_mean.abs() <= 1e-9 * scale.max(1.0);
    Ok(ItoRemainderCheck {
        max_excess,
        martingale_mean: mart_mean,
        ok,
    })
}
