//! Objectives exposed through the coordinate-wise interface used by the
//! Itoh-Abe family: values, one-coordinate difference quotients and
//! per-coordinate Clarke intervals.

mod generators;
mod quadratic;
mod student_t;

pub use generators::{add_noise, gaussian_start, gaussian_system, impulse_noise, piecewise_constant_image, GaussianSystem};
pub use quadratic::{L1QuadraticObjective, QuadraticObjective, Residual};
pub use student_t::{FilterKind, StudentTObjective, WeightedFilter};

use crate::bregman::Interval;

/// Two points closer than this (relative to `max(1, |old|)`) are treated as
/// the same point and the quotient falls back to a Clarke element.
pub const STATIONARY_STEP: f64 = 1e-14;

pub fn is_stationary_step(old: f64, new: f64) -> bool {
    (new - old).abs() <= STATIONARY_STEP * old.abs().max(1.0)
}

/// Quadratic part `1/2 <x, Ax> - <b, x>` plus an optional `lambda ||x||_1`,
/// for objectives that admit the closed-form sweeps.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticParts<'a> {
    pub quadratic: &'a QuadraticObjective,
    pub lambda: f64,
}

/// An objective `V` seen one coordinate at a time.
///
/// `Cache` is per-run scratch state (e.g. a residual) that the solver keeps
/// in sync through [`CoordinateObjective::commit_coordinate`].
pub trait CoordinateObjective {
    type Cache;

    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn init_cache(&self, x: &[f64]) -> Self::Cache;

    /// `value(x)` where `cache` was built or kept in sync for `x`.
    fn value_cached(&self, _cache: &Self::Cache, x: &[f64]) -> f64 {
        self.value(x)
    }

    /// `(V(y; y_i = new) - V(y; y_i = old)) / (new - old)` where `y[i] == old`.
    /// For `new == old` this is an element of the Clarke interval.
    fn coord_diff_quotient(&self, cache: &Self::Cache, y: &[f64], i: usize, old: f64, new: f64) -> f64;

    /// The projection `[dV(y)]_i` of the Clarke subdifferential.
    fn coord_clarke_interval(&self, cache: &Self::Cache, y: &[f64], i: usize) -> Interval;

    /// Called after `y[i]` changed from `old` to `new` (already written).
    fn commit_coordinate(&self, cache: &mut Self::Cache, y: &[f64], i: usize, old: f64, new: f64);

    /// Lipschitz bound of the i-th partial derivative near the iterate.
    fn lipschitz_hint(&self, _i: usize) -> Option<f64> {
        None
    }

    fn quadratic_parts(&self) -> Option<QuadraticParts<'_>> {
        None
    }

    fn clarke_intervals(&self, x: &[f64]) -> Vec<Interval> {
        let cache = self.init_cache(x);
        (0..self.dim()).map(|i| self.coord_clarke_interval(&cache, x, i)).collect()
    }
}

impl<T: CoordinateObjective + ?Sized> CoordinateObjective for &T {
    type Cache = T::Cache;

    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn init_cache(&self, x: &[f64]) -> Self::Cache {
        (**self).init_cache(x)
    }
    fn value_cached(&self, cache: &Self::Cache, x: &[f64]) -> f64 {
        (**self).value_cached(cache, x)
    }
    fn coord_diff_quotient(&self, cache: &Self::Cache, y: &[f64], i: usize, old: f64, new: f64) -> f64 {
        (**self).coord_diff_quotient(cache, y, i, old, new)
    }
    fn coord_clarke_interval(&self, cache: &Self::Cache, y: &[f64], i: usize) -> Interval {
        (**self).coord_clarke_interval(cache, y, i)
    }
    fn commit_coordinate(&self, cache: &mut Self::Cache, y: &[f64], i: usize, old: f64, new: f64) {
        (**self).commit_coordinate(cache, y, i, old, new)
    }
    fn lipschitz_hint(&self, i: usize) -> Option<f64> {
        (**self).lipschitz_hint(i)
    }
    fn quadratic_parts(&self) -> Option<QuadraticParts<'_>> {
        (**self).quadratic_parts()
    }
}
