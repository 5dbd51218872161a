//! Per-sweep diagnostics.

use crate::bregman::{BregmanSpec, Interval};
use crate::error::{check_len, Error, Result};
use crate::objectives::CoordinateObjective;

/// Entries with magnitude at or below this count as exact zeros.
pub const ZERO_SIGN_THRESHOLD: f64 = 1e-12;

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    /// `(V(x^k) - V*) / (V(x^0) - V*)`; NaN without a reference value.
    pub rel_objective: f64,
    /// NaN without a reference point.
    pub support_match: f64,
    pub support_error: f64,
    /// `dist(dV(x^k), 0)` from the coordinate Clarke intervals.
    pub grad_dist: f64,
    pub step_norm: f64,
    /// `decrease - (mu / tau_max) * step_norm^2`.
    pub dissipation_slack: f64,
    /// Cumulative wall time since the start of the run.
    pub wall_ms: f64,
}

/// Optimum used to normalise traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub vstar: f64,
    pub xstar: Option<Vec<f64>>,
}

pub fn relative_objective(vk: f64, v0: f64, vstar: f64) -> Result<f64> {
    if !(v0 > vstar) {
        return Err(Error::DegenerateRun { v0, vstar });
    }
    Ok((vk - vstar) / (v0 - vstar))
}

fn sign_with_threshold(v: f64) -> i8 {
    if v > ZERO_SIGN_THRESHOLD {
        1
    } else if v < -ZERO_SIGN_THRESHOLD {
        -1
    } else {
        0
    }
}

/// Fractions of coordinates whose signs agree / disagree with `xstar`.
pub fn support_stats(xk: &[f64], xstar: &[f64]) -> Result<(f64, f64)> {
    check_len(xstar.len(), xk.len())?;
    if xk.is_empty() {
        return Ok((1.0, 0.0));
    }
    let agree = xk
        .iter()
        .zip(xstar)
        .filter(|(a, b)| sign_with_threshold(**a) == sign_with_threshold(**b))
        .count();
    let matched = agree as f64 / xk.len() as f64;
    Ok((matched, 1.0 - matched))
}

pub fn clarke_dist_from_intervals(intervals: &[Interval]) -> f64 {
    intervals.iter().map(|iv| iv.dist_to_zero().powi(2)).sum::<f64>().sqrt()
}

/// `||(dist([dV(x)]_i, 0))_i||_2`. Exact for objectives whose Clarke
/// subdifferential is the product of the coordinate intervals.
pub fn clarke_dist<V: CoordinateObjective>(v: &V, x: &[f64]) -> f64 {
    clarke_dist_from_intervals(&v.clarke_intervals(x))
}

/// Per-coordinate first-order residual `dist(0, [dV(x)]_i + N_[l_i,u_i](x_i))`.
/// Zero exactly at Clarke stationary points of `V` over the box.
pub fn first_order_residuals<V: CoordinateObjective>(v: &V, spec: &BregmanSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_len(spec.n(), x.len())?;
    check_len(v.dim(), x.len())?;
    Ok(v
        .clarke_intervals(x)
        .into_iter()
        .zip(&spec.per_coordinate)
        .zip(x)
        .map(|((mut iv, piece), &xi)| {
            if xi <= piece.lower {
                iv.lo = f64::NEG_INFINITY;
            }
            if xi >= piece.upper {
                iv.hi = f64::INFINITY;
            }
            iv.dist_to_zero()
        })
        .collect())
}

pub fn max_first_order_residual<V: CoordinateObjective>(v: &V, spec: &BregmanSpec, x: &[f64]) -> Result<f64> {
    Ok(first_order_residuals(v, spec, x)?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{QuadraticObjective, StudentTObjective};

    #[test]
    fn relative_objective_examples() {
        assert_eq!(relative_objective(10.0, 10.0, 0.0).unwrap(), 1.0);
        assert_eq!(relative_objective(0.0, 10.0, 0.0).unwrap(), 0.0);
        assert_eq!(relative_objective(5.0, 10.0, 0.0).unwrap(), 0.5);
        assert!(matches!(relative_objective(1.0, 2.0, 2.0), Err(Error::DegenerateRun { .. })));
    }

    #[test]
    fn support_examples() {
        let xs = [0.0, 3.0, 5.0];
        assert_eq!(support_stats(&xs, &xs).unwrap(), (1.0, 0.0));
        let neg = [-1.0, -3.0, 5.0];
        let pos = [1.0, 3.0, -5.0];
        assert_eq!(support_stats(&neg, &pos).unwrap(), (0.0, 1.0));
        let (m, e) = support_stats(&[0.0, 1.0, -2.0], &xs).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-15);
        assert!((m + e - 1.0).abs() < 1e-15);
        assert!(support_stats(&[1.0], &xs).is_err());
        // near-zeros count as zero
        assert_eq!(support_stats(&[1e-13, 1.0, 1.0], &xs).unwrap().0, 1.0);
    }

    #[test]
    fn support_invariant_under_positive_scaling() {
        let a = [0.5, -0.25, 0.0, 2.0];
        let b = [1.0, 0.0, 0.0, -3.0];
        let base = support_stats(&a, &b).unwrap();
        let sa: Vec<f64> = a.iter().map(|v| v * 7.0).collect();
        let sb: Vec<f64> = b.iter().map(|v| v * 0.5).collect();
        assert_eq!(support_stats(&sa, &sb).unwrap(), base);
    }

    #[test]
    fn clarke_dist_examples() {
        let q = QuadraticObjective::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0]).unwrap();
        let x = [1.0, 3.0];
        // gradient (1, 2)
        assert!((clarke_dist(&q, &x) - 5f64.sqrt()).abs() < 1e-15);
        let ivs = [Interval::new(-1.0, 1.0), Interval::new(-0.1, 0.0)];
        assert_eq!(clarke_dist_from_intervals(&ivs), 0.0);

        let xd = vec![0.0, 1.0, 0.2, 0.9];
        let s = StudentTObjective::forward_differences(2, 2, 2.0, xd.clone()).unwrap();
        let expected: f64 = (0..4)
            .map(|i| (s.smooth_partial(&xd, i).abs() - 1.0).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((clarke_dist(&s, &xd) - expected).abs() < 1e-15);
    }

    #[test]
    fn first_order_residual_respects_active_bounds() {
        // V = 1/2 x^2 - 2x pulls x to 2, but the box stops it at 1
        let q = QuadraticObjective::from_rows(&[vec![1.0]], vec![2.0]).unwrap();
        let spec = BregmanSpec::euclidean(1).with_box(0.0, 1.0).unwrap();
        assert_eq!(max_first_order_residual(&q, &spec, &[1.0]).unwrap(), 0.0);
        assert_eq!(max_first_order_residual(&q, &spec, &[0.5]).unwrap(), 1.5);
        assert_eq!(max_first_order_residual(&q, &spec, &[0.0]).unwrap(), 2.0);
    }
}
