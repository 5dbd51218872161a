//! The per-coordinate implicit step of the Bregman Itoh-Abe method.
//!
//! Given the current coordinate value `x`, a subgradient `p` of the scalar
//! Bregman piece at `x`, a time step `tau` and the difference quotient
//! `dq(y) = (V(.., y, ..) - V(.., x, ..)) / (y - x)`, find `y` and `p'` with
//!
//! ```text
//! p' = p - tau * dq(y),    p' in d(j + chi_[l,u])(y).
//! ```
//!
//! A stationary update `y = x`, `p' = p - tau * v` with `v` in the Clarke
//! interval at `x` is taken whenever one is admissible. Otherwise the
//! residual `g(y) = w(y) - proj_{dJ(y)} w(y)`, `w(y) = p - tau * dq(y)`, is
//! bracketed by doubling steps away from `x` on the side the inclusion
//! points to and the root is refined with Brent's method. Kinks of `j` and
//! box endpoints are visited exactly, since `g` can vanish on them without
//! changing sign continuously.

use crate::bregman::{Interval, ScalarBregman, MEMBERSHIP_TOL};
use crate::brent::{brent, BrentOptions};
use crate::error::{Error, Result};

/// How the subgradient is stored after the step when the box is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxMode {
    /// Keep the full element of `d(j + chi)(y)`, including the normal-cone part.
    KeepBox,
    /// Keep only the `dj(y)` component and drop the normal-cone part.
    ForgetBox,
}

pub struct InclusionProblem<'a, F> {
    pub piece: &'a ScalarBregman,
    pub x: f64,
    pub p: f64,
    pub tau: f64,
    /// `[dV]_i` at the current point.
    pub clarke: Interval,
    pub dq: F,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusionSolution {
    pub y: f64,
    pub p_new: f64,
    pub stationary: bool,
    /// The Clarke element (stationary) or difference quotient used.
    pub v: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct InclusionOptions {
    /// Initial bracket step is `max(delta0_abs, delta0_rel * |x|)`.
    pub delta0_abs: f64,
    pub delta0_rel: f64,
    /// Number of step doublings before giving up.
    pub max_doublings: u32,
    /// Residual tolerance relative to `max(1, |p|)`.
    pub residual_tol: f64,
    /// Slack (relative to `max(1, |p|)`) allowed in the stationarity test.
    pub stationary_slack: f64,
    pub brent: BrentOptions,
}

impl Default for InclusionOptions {
    fn default() -> Self {
        InclusionOptions {
            delta0_abs: 1e-8,
            delta0_rel: 1e-8,
            max_doublings: 60,
            residual_tol: 1e-14,
            stationary_slack: 1e-13,
            brent: BrentOptions::default(),
        }
    }
}

impl InclusionOptions {
    pub fn with_delta0(mut self, delta0: f64) -> Self {
        self.delta0_abs = delta0;
        self.delta0_rel = delta0;
        self
    }
}

fn stored_subgradient(piece: &ScalarBregman, mode: BoxMode, y: f64, w: f64) -> f64 {
    match mode {
        BoxMode::KeepBox => piece.subdiff_unchecked(y).nearest(w),
        BoxMode::ForgetBox => piece.subdiff_j(y).nearest(w),
    }
}

pub fn solve_inclusion<F>(prob: InclusionProblem<'_, F>, mode: BoxMode, opts: &InclusionOptions) -> Result<InclusionSolution>
where
    F: FnMut(f64) -> f64,
{
    let InclusionProblem { piece, x, p, tau, clarke, mut dq } = prob;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("time step must be positive and finite, got {tau}")));
    }
    let at_x = piece.subdiff_interval(x)?;
    if !at_x.contains(p, MEMBERSHIP_TOL) {
        return Err(Error::Precondition(format!(
            "p = {p} not in dJ(x) = [{}, {}] at x = {x}",
            at_x.lo, at_x.hi
        )));
    }

    // stationary: some v in the Clarke interval keeps p - tau v inside dJ(x)
    let slack = opts.stationary_slack * p.abs().max(1.0);
    let admissible = Interval::new((p - at_x.hi - slack) / tau, (p - at_x.lo + slack) / tau);
    if let Some(vs) = admissible.intersect(&clarke) {
        let v = vs.nearest(0.0);
        let w = p - tau * v;
        return Ok(InclusionSolution { y: x, p_new: stored_subgradient(piece, mode, x, w), stationary: true, v });
    }

    // p - tau [c_lo, c_hi] lies entirely above or entirely below dJ(x)
    let dir = if p - tau * clarke.hi > at_x.hi { 1.0 } else { -1.0 };
    let mut signed_residual = |y: f64| {
        let w = p - tau * dq(y);
        dir * (w - piece.subdiff_unchecked(y).nearest(w))
    };

    let mut breakpoints: Vec<(f64, f64)> = [piece.kink(), Some(piece.lower), Some(piece.upper)]
        .into_iter()
        .flatten()
        .filter(|b| b.is_finite() && (b - x) * dir > 0.0)
        .map(|b| ((b - x).abs(), b))
        .collect();
    breakpoints.sort_by(|a, b| a.0.total_cmp(&b.0));
    breakpoints.dedup_by(|a, b| a.1 == b.1);
    let mut breakpoints = breakpoints.into_iter().peekable();

    let f_tol = opts.residual_tol * p.abs().max(1.0);
    let brent_opts = BrentOptions { f_tol, ..opts.brent };
    let delta0 = opts.delta0_abs.max(opts.delta0_rel * x.abs());

    let mut offset = delta0;
    let mut doublings = 0u32;
    let mut last_positive: Option<(f64, f64)> = None;

    let y = loop {
        let (dist, y, at_breakpoint) = match breakpoints.peek() {
            Some(&(d, b)) if d <= offset => (d, b, true),
            _ => (offset, x + dir * offset, false),
        };
        let s = signed_residual(y);
        if s == 0.0 {
            break y;
        }
        if s < 0.0 {
            let (yp, sp) = match last_positive {
                Some(found) => found,
                None => match shrink_towards(x, dir, dist, &mut signed_residual) {
                    Shrink::Root(r) => break r,
                    Shrink::Bracket(yp, sp, yn, sn) => {
                        break brent(&mut signed_residual, yp, yn, sp, sn, &brent_opts)?;
                    }
                },
            };
            break brent(&mut signed_residual, yp, y, sp, s, &brent_opts)?;
        }
        if s.is_nan() {
            return Err(Error::InvariantViolation(format!("residual is NaN at y = {y}")));
        }
        last_positive = Some((y, s));
        if at_breakpoint {
            breakpoints.next();
            if y == piece.lower || y == piece.upper {
                // the normal cone at an active bound absorbs any residual
                return Err(Error::Divergence { x, direction: dir, max_offset: dist });
            }
        } else {
            doublings += 1;
            if doublings > opts.max_doublings {
                return Err(Error::Divergence { x, direction: dir, max_offset: offset });
            }
            offset *= 2.0;
        }
    };

    let y = y.clamp(piece.lower, piece.upper);
    let v = dq(y);
    let w = p - tau * v;
    Ok(InclusionSolution { y, p_new: stored_subgradient(piece, mode, y, w), stationary: false, v })
}

enum Shrink {
    Root(f64),
    /// positive end, its residual, negative end, its residual
    Bracket(f64, f64, f64, f64),
}

/// The first trial point already overshot the root: halve towards `x` until
/// the residual is positive again. A root closer than `dist / 2^60` is
/// returned as is.
fn shrink_towards(x: f64, dir: f64, dist: f64, g: &mut impl FnMut(f64) -> f64) -> Shrink {
    let mut neg = x + dir * dist;
    let mut sn = g(neg);
    let mut d = dist;
    for _ in 0..60 {
        d *= 0.5;
        let y = x + dir * d;
        if y == x {
            break;
        }
        let s = g(y);
        if s == 0.0 {
            return Shrink::Root(y);
        }
        if s > 0.0 {
            return Shrink::Bracket(y, s, neg, sn);
        }
        neg = y;
        sn = s;
    }
    Shrink::Root(neg)
}
