//! One full ascending sweep of each scheme.
//!
//! The quadratic sweeps keep a residual `r = Ay - b` of the partially updated
//! vector, so every coordinate update reads `g = <a^i, y^{k,i-1}> - b_i`.

use crate::bregman::{sgn, shrink, BregmanSpec, Interval, PrimalDualState, ScalarBregman};
use crate::error::{check_len, Error, Result};
use crate::inclusion::{solve_inclusion, BoxMode, InclusionOptions, InclusionProblem};
use crate::objectives::{CoordinateObjective, QuadraticObjective};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub state: PrimalDualState,
    /// `V(x^k) - V(x^{k+1})`.
    pub decrease: f64,
    /// `||x^{k+1} - x^k||^2`.
    pub step_sq: f64,
    pub value_before: f64,
    pub value_after: f64,
}

pub(crate) fn step_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

fn finish<V: CoordinateObjective>(v: &V, before: &PrimalDualState, after: PrimalDualState) -> SweepResult {
    let value_before = v.value(&before.x);
    let value_after = v.value(&after.x);
    SweepResult {
        step_sq: step_sq(&before.x, &after.x),
        decrease: value_before - value_after,
        value_before,
        value_after,
        state: after,
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < 2.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("relaxation must lie in (0, 2), got {omega}")))
    }
}

fn check_state(n: usize, state: &PrimalDualState) -> Result<()> {
    check_len(n, state.x.len())?;
    check_len(n, state.p.len())
}

// ---------------------------------------------------------------------------
// SOR

pub(crate) fn sor_pass(q: &QuadraticObjective, r: &mut [f64], x: &mut [f64], omega: f64) {
    for i in 0..q.n() {
        let d = -(omega / q.diag(i)) * r[i];
        if d != 0.0 {
            x[i] += d;
            for (rj, aij) in r.iter_mut().zip(q.row(i)) {
                *rj += aij * d;
            }
        }
    }
}

/// One SOR sweep `y_i <- y_i - (omega / a_ii)(<a^i, y> - b_i)`, `i = 1..n`.
pub fn sor_sweep(q: &QuadraticObjective, x: &[f64], omega: f64) -> Result<Vec<f64>> {
    check_len(q.n(), x.len())?;
    check_omega(omega)?;
    q.check_diagonal()?;
    let mut y = x.to_vec();
    let mut r = q.residual(&y);
    sor_pass(q, &mut r, &mut y, omega);
    Ok(y)
}

// ---------------------------------------------------------------------------
// Generic Bregman Itoh-Abe

pub(crate) fn bia_pass<V: CoordinateObjective>(
    v: &V,
    spec: &BregmanSpec,
    cache: &mut V::Cache,
    state: &mut PrimalDualState,
    taus: &[f64],
    mode: BoxMode,
    opts: &InclusionOptions,
) -> Result<()> {
    for i in 0..state.x.len() {
        let old = state.x[i];
        let sol = {
            let c: &V::Cache = cache;
            let y: &[f64] = &state.x;
            solve_inclusion(
                InclusionProblem {
                    piece: &spec.per_coordinate[i],
                    x: old,
                    p: state.p[i],
                    tau: taus[i],
                    clarke: v.coord_clarke_interval(c, y, i),
                    dq: |t| v.coord_diff_quotient(c, y, i, old, t),
                },
                mode,
                opts,
            )?
        };
        state.x[i] = sol.y;
        state.p[i] = sol.p_new;
        v.commit_coordinate(cache, &state.x, i, old, sol.y);
    }
    Ok(())
}

/// One Bregman Itoh-Abe sweep with per-coordinate time steps `taus`.
pub fn bia_sweep<V: CoordinateObjective>(
    v: &V,
    spec: &BregmanSpec,
    state: &PrimalDualState,
    taus: &[f64],
    mode: BoxMode,
) -> Result<SweepResult> {
    let n = v.dim();
    check_state(n, state)?;
    check_len(n, spec.n())?;
    check_len(n, taus.len())?;
    let mut next = state.clone();
    let mut cache = v.init_cache(&next.x);
    bia_pass(v, spec, &mut cache, &mut next, taus, mode, &InclusionOptions::default())?;
    next.k += 1;
    Ok(finish(v, state, next))
}

/// One Itoh-Abe sweep, i.e. Bregman Itoh-Abe with `J = 1/2 ||x||^2`.
pub fn ia_sweep<V: CoordinateObjective>(v: &V, state: &PrimalDualState, taus: &[f64]) -> Result<SweepResult> {
    bia_sweep(v, &BregmanSpec::euclidean(v.dim()), state, taus, BoxMode::KeepBox)
}

// ---------------------------------------------------------------------------
// Closed-form Bregman SOR

/// Snaps a closed-form subgradient into `dj(y)` to absorb rounding.
fn snap(gamma: f64, y: f64, p: f64) -> f64 {
    if gamma == 0.0 {
        y
    } else if y == 0.0 {
        p.clamp(-gamma, gamma)
    } else {
        y + gamma * sgn(y)
    }
}

/// `(y, p')` for one coordinate of BSOR: `beta y + gamma s = h`, `s in d|y|`.
fn bsor_coordinate(x: f64, p: f64, g: f64, a: f64, gamma: f64, tau: f64) -> (f64, f64) {
    let beta = 1.0 + 0.5 * tau;
    let h = beta * x - (tau / a) * g + (p - x);
    let y = shrink(h, gamma) / beta;
    (y, snap(gamma, y, h - 0.5 * tau * y))
}

pub(crate) fn bsor_pass(q: &QuadraticObjective, r: &mut [f64], state: &mut PrimalDualState, gamma: f64, tau: f64) {
    for i in 0..q.n() {
        let (y, p) = bsor_coordinate(state.x[i], state.p[i], r[i], q.diag(i), gamma, tau);
        let d = y - state.x[i];
        state.x[i] = y;
        state.p[i] = p;
        if d != 0.0 {
            for (rj, aij) in r.iter_mut().zip(q.row(i)) {
                *rj += aij * d;
            }
        }
    }
}

/// One Bregman SOR sweep for `J = 1/2 ||x||^2 + gamma ||x||_1` with time
/// steps `tau / a_ii`. Coordinate `i` is
/// `S(beta x~ + gamma r, gamma) / beta`, where `beta = 1 + tau/2` and `x~` is
/// the SOR update with `omega = 2 tau / (2 + tau)`.
pub fn bsor_sweep(q: &QuadraticObjective, state: &PrimalDualState, gamma: f64, tau: f64) -> Result<SweepResult> {
    check_state(q.n(), state)?;
    q.check_diagonal()?;
    check_bsor_params(gamma, tau)?;
    BregmanSpec::elastic_net(q.n(), gamma)?.check_subgradient(&state.x, &state.p, crate::bregman::MEMBERSHIP_TOL)?;
    let mut next = state.clone();
    let mut r = q.residual(&next.x);
    bsor_pass(q, &mut r, &mut next, gamma, tau);
    next.k += 1;
    Ok(finish(q, state, next))
}

fn check_bsor_params(gamma: f64, tau: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Config(format!("sparsity weight must be finite and >= 0, got {gamma}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("time step must be positive and finite, got {tau}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// l1-regularised Bregman SOR

/// Which closed-form branch produced an l1-BSOR update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1BsorCase {
    /// `x = 0` stays at zero.
    StayZero,
    /// Move to (or stay on) the side given by the sign of the data.
    Shrink,
    /// `x != 0` crosses exactly to zero.
    ToZero,
    /// `x != 0` jumps to the opposite sign; root of a quadratic.
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1BsorUpdate {
    pub y: f64,
    pub p_new: f64,
    pub case: L1BsorCase,
}

/// `(|y| - |x|) / (y - x)`, or `sgn(x)` for `y == x != 0`.
fn abs_quotient(x: f64, y: f64) -> f64 {
    if y == x || x * y >= 0.0 && x != 0.0 {
        sgn(x)
    } else if x == 0.0 {
        sgn(y)
    } else {
        (y.abs() - x.abs()) / (y - x)
    }
}

/// Closed-form solution of one coordinate inclusion for
/// `V = 1/2 <x, Ax> - <b, x> + lambda ||x||_1`, `j = 1/2 t^2 + gamma |t|` and
/// time step `tau / a`, where `g = <a^i, y> - b_i` at the partially updated
/// vector and `p in dj(x)`.
///
/// With `beta = 1 + tau/2`, `h = beta x - (tau / a) g + (p - x)` and
/// `rho = tau lambda / a` the inclusion reads
/// `beta y + gamma s + rho q(y) = h`, `s in d|y|`, `q` the difference quotient
/// of `|.|` at `x`. The branches are tried in order and the first match wins.
pub fn l1_bsor_coordinate(x: f64, p: f64, g: f64, a: f64, gamma: f64, lambda: f64, tau: f64) -> Result<L1BsorUpdate> {
    let beta = 1.0 + 0.5 * tau;
    let h = beta * x - (tau / a) * g + (p - x);
    let rho = tau * lambda / a;
    let sigma = sgn(x);
    let big_h = sigma * h;

    let (y, case) = if x == 0.0 && h.abs() <= gamma + rho {
        // stationary: choose the l1 Clarke element s closest to -g / lambda
        let p_new = if rho == 0.0 {
            h
        } else {
            let admissible = Interval::new((h - gamma) / rho, (h + gamma) / rho);
            let s = admissible
                .intersect(&Interval::new(-1.0, 1.0))
                .map(|iv| iv.nearest(-g / lambda))
                .unwrap_or_else(|| (h / rho).clamp(-1.0, 1.0));
            h - rho * s
        };
        return Ok(L1BsorUpdate { y: 0.0, p_new: p_new.clamp(-gamma, gamma), case: L1BsorCase::StayZero });
    } else if x == 0.0 && h.abs() > gamma + rho {
        ((h - (gamma + rho) * sgn(h)) / beta, L1BsorCase::Shrink)
    } else if x != 0.0 && big_h > gamma + rho {
        ((h - (gamma + rho) * sigma) / beta, L1BsorCase::Shrink)
    } else if x != 0.0 && (h - rho * sigma).abs() <= gamma {
        return Ok(L1BsorUpdate { y: 0.0, p_new: (h - rho * sigma).clamp(-gamma, gamma), case: L1BsorCase::ToZero });
    } else if x != 0.0 && big_h < rho - gamma {
        let ax = x.abs();
        let t = if rho == 0.0 {
            -(gamma + big_h) / beta
        } else {
            let b = beta * ax + gamma + rho + big_h;
            let c = ax * (gamma - rho + big_h);
            let disc = (b * b - 4.0 * beta * c).sqrt();
            if b >= 0.0 {
                -2.0 * c / (b + disc)
            } else {
                (disc - b) / (2.0 * beta)
            }
        };
        (-sigma * t, L1BsorCase::Cross)
    } else {
        return Err(Error::CaseMismatch {
            coordinate: usize::MAX,
            dump: format!(
                "x={x:e} p={p:e} g={g:e} a={a:e} gamma={gamma:e} lambda={lambda:e} tau={tau:e} \
                 h={h:e} rho={rho:e} |h|-(gamma+rho)={:e} sigma*h-(gamma+rho)={:e} \
                 |h-rho*sigma|-gamma={:e} sigma*h-(rho-gamma)={:e}",
                h.abs() - (gamma + rho),
                big_h - (gamma + rho),
                (h - rho * sigma).abs() - gamma,
                big_h - (rho - gamma)
            ),
        });
    };
    let p_new = h - 0.5 * tau * y - rho * abs_quotient(x, y);
    Ok(L1BsorUpdate { y, p_new: snap(gamma, y, p_new), case })
}

pub(crate) fn l1_bsor_pass(
    q: &QuadraticObjective,
    r: &mut [f64],
    state: &mut PrimalDualState,
    gamma: f64,
    lambda: f64,
    tau: f64,
) -> Result<()> {
    for i in 0..q.n() {
        let up = l1_bsor_coordinate(state.x[i], state.p[i], r[i], q.diag(i), gamma, lambda, tau).map_err(|e| match e {
            Error::CaseMismatch { dump, .. } => Error::CaseMismatch { coordinate: i, dump },
            other => other,
        })?;
        let d = up.y - state.x[i];
        state.x[i] = up.y;
        state.p[i] = up.p_new;
        if d != 0.0 {
            for (rj, aij) in r.iter_mut().zip(q.row(i)) {
                *rj += aij * d;
            }
        }
    }
    Ok(())
}

/// One closed-form sweep for the l1-regularised quadratic with elastic-net `J`
/// and time steps `tau / a_ii`.
pub fn l1_bsor_sweep(
    q: &QuadraticObjective,
    state: &PrimalDualState,
    gamma: f64,
    lambda: f64,
    tau: f64,
) -> Result<SweepResult> {
    check_state(q.n(), state)?;
    q.check_diagonal()?;
    check_bsor_params(gamma, tau)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("l1 weight must be finite and >= 0, got {lambda}")));
    }
    BregmanSpec::elastic_net(q.n(), gamma)?.check_subgradient(&state.x, &state.p, crate::bregman::MEMBERSHIP_TOL)?;
    let v = crate::objectives::L1QuadraticObjective::new(q.clone(), lambda)?;
    let mut next = state.clone();
    let mut r = q.residual(&next.x);
    l1_bsor_pass(q, &mut r, &mut next, gamma, lambda, tau)?;
    next.k += 1;
    Ok(finish(&v, state, next))
}

// ---------------------------------------------------------------------------
// Bregman linearised coordinate descent

pub(crate) fn blcd_pass(q: &QuadraticObjective, r: &mut [f64], state: &mut PrimalDualState, gamma: f64, alpha: f64) {
    for i in 0..q.n() {
        let w = state.p[i] - (alpha / q.diag(i)) * r[i];
        let y = shrink(w, gamma);
        let d = y - state.x[i];
        state.x[i] = y;
        state.p[i] = snap(gamma, y, w);
        if d != 0.0 {
            for (rj, aij) in r.iter_mut().zip(q.row(i)) {
                *rj += aij * d;
            }
        }
    }
}

/// One sweep of `p_i <- p_i - (alpha / a_ii) [grad V(y)]_i`,
/// `y_i <- S(p_i, gamma)`: the minimiser along `e^i` of the linearisation of
/// `V` plus `(a_ii / alpha) D_J^p`.
pub fn blcd_sweep(q: &QuadraticObjective, state: &PrimalDualState, gamma: f64, alpha: f64) -> Result<SweepResult> {
    check_state(q.n(), state)?;
    q.check_diagonal()?;
    check_omega(alpha)?;
    let piece = ScalarBregman::elastic_net(gamma)?;
    BregmanSpec::uniform(q.n(), piece).check_subgradient(&state.x, &state.p, crate::bregman::MEMBERSHIP_TOL)?;
    let mut next = state.clone();
    let mut r = q.residual(&next.x);
    blcd_pass(q, &mut r, &mut next, gamma, alpha);
    next.k += 1;
    Ok(finish(q, state, next))
}
