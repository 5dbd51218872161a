//! Separable Bregman functions `J(x) = sum_i j_i(x_i) + chi_C(x)` with a box
//! constraint `C = [l_1, u_1] x ... x [l_n, u_n]`.
//!
//! Every scalar piece is `1/2 t^2` plus an optional `gamma |t - s|` term, so all
//! of them are 1-convex and their subdifferentials are closed intervals.
//! Intervals use IEEE infinities for unbounded ends (active box constraints).

use crate::error::{check_len, Error, Result};

/// Absolute tolerance for subgradient membership after a closed-form update.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A closed interval `[lo, hi]`, possibly with infinite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    /// `[center - radius, center + radius]`.
    pub fn around(center: f64, radius: f64) -> Self {
        Interval::new(center - radius, center + radius)
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lo - tol && v <= self.hi + tol
    }

    /// Nearest point of the interval to `v`.
    pub fn nearest(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }

    /// Distance from `v` to the interval (zero inside).
    pub fn dist(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo - v
        } else if v > self.hi {
            v - self.hi
        } else {
            0.0
        }
    }

    pub fn dist_to_zero(&self) -> f64 {
        self.dist(0.0)
    }

    pub fn midpoint(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            0.5 * (self.lo + self.hi)
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    /// Minkowski sum.
    pub fn shift(&self, by: Interval) -> Interval {
        Interval::new(self.lo + by.lo, self.hi + by.hi)
    }

    pub fn offset(&self, by: f64) -> Interval {
        Interval::new(self.lo + by, self.hi + by)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

/// Subdifferential of `|t|` at `t`.
pub fn abs_subdiff(t: f64) -> Interval {
    if t > 0.0 {
        Interval::point(1.0)
    } else if t < 0.0 {
        Interval::point(-1.0)
    } else {
        Interval::new(-1.0, 1.0)
    }
}

/// Sign with `sgn(0) = 0`.
pub fn sgn(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Soft thresholding `sgn(x) max(|x| - lambda, 0)`, the resolvent of `lambda d|.|`.
pub fn shrink(x: f64, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Clamp `x` to `[lower, upper]`.
pub fn project_box(x: f64, lower: f64, upper: f64) -> Result<f64> {
    if lower > upper || lower.is_nan() || upper.is_nan() {
        return Err(Error::Config(format!("empty box [{lower}, {upper}]")));
    }
    Ok(x.clamp(lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BregmanKind {
    /// `1/2 t^2`
    Euclidean,
    /// `1/2 t^2 + gamma |t|`
    ElasticNet,
    /// `1/2 t^2 + gamma |t - s|`
    ShiftedElasticNet,
}

/// One separable piece `j_i + chi_[l_i, u_i]` of a Bregman function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarBregman {
    pub kind: BregmanKind,
    pub gamma: f64,
    pub shift: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ScalarBregman {
    pub fn euclidean() -> Self {
        ScalarBregman {
            kind: BregmanKind::Euclidean,
            gamma: 0.0,
            shift: 0.0,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn elastic_net(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(ScalarBregman {
            kind: BregmanKind::ElasticNet,
            gamma,
            ..Self::euclidean()
        })
    }

    pub fn shifted_elastic_net(gamma: f64, shift: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !shift.is_finite() {
            return Err(Error::Config(format!("shift must be finite, got {shift}")));
        }
        Ok(ScalarBregman {
            kind: BregmanKind::ShiftedElasticNet,
            gamma,
            shift,
            ..Self::euclidean()
        })
    }

    pub fn with_box(self, lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::Config(format!("invalid box [{lower}, {upper}]")));
        }
        Ok(ScalarBregman { lower, upper, ..self })
    }

    pub fn has_box(&self) -> bool {
        self.lower.is_finite() || self.upper.is_finite()
    }

    /// Location of the nonsmooth point of `j`, if any.
    pub fn kink(&self) -> Option<f64> {
        match self.kind {
            BregmanKind::Euclidean => None,
            _ if self.gamma == 0.0 => None,
            BregmanKind::ElasticNet => Some(0.0),
            BregmanKind::ShiftedElasticNet => Some(self.shift),
        }
    }

    fn center(&self) -> f64 {
        match self.kind {
            BregmanKind::ShiftedElasticNet => self.shift,
            _ => 0.0,
        }
    }

    fn l1_weight(&self) -> f64 {
        match self.kind {
            BregmanKind::Euclidean => 0.0,
            _ => self.gamma,
        }
    }

    pub fn in_box(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    /// `j(x)`, ignoring the box.
    pub fn j_value(&self, x: f64) -> f64 {
        0.5 * x * x + self.l1_weight() * (x - self.center()).abs()
    }

    /// `j(x) + chi_[l,u](x)`.
    pub fn value(&self, x: f64) -> f64 {
        if self.in_box(x) {
            self.j_value(x)
        } else {
            f64::INFINITY
        }
    }

    /// `d j(x)` without the normal cone of the box.
    pub fn subdiff_j(&self, x: f64) -> Interval {
        let g = self.l1_weight();
        if g == 0.0 {
            return Interval::point(x);
        }
        let t = x - self.center();
        if t > 0.0 {
            Interval::point(x + g)
        } else if t < 0.0 {
            Interval::point(x - g)
        } else {
            Interval::around(x, g)
        }
    }

    /// `d(j + chi_[l,u])(x)`; unbounded on the outward side of an active bound.
    pub fn subdiff_interval(&self, x: f64) -> Result<Interval> {
        if !self.in_box(x) {
            return Err(Error::Domain { value: x, lower: self.lower, upper: self.upper });
        }
        Ok(self.subdiff_unchecked(x))
    }

    pub(crate) fn subdiff_unchecked(&self, x: f64) -> Interval {
        let mut iv = self.subdiff_j(x);
        if x <= self.lower {
            iv.lo = f64::NEG_INFINITY;
        }
        if x >= self.upper {
            iv.hi = f64::INFINITY;
        }
        iv
    }

    /// The subgradient used to start a run: the `j`-subdifferential element
    /// closest to `x`, so the l1 part contributes `r = 0` at its kink.
    pub fn initial_subgradient(&self, x: f64) -> Result<f64> {
        Ok(self.subdiff_interval(x)?.nearest(x))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("sparsity weight must be finite and >= 0, got {gamma}")))
    }
}

/// A separable Bregman function on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BregmanSpec {
    pub mu: f64,
    pub per_coordinate: Vec<ScalarBregman>,
}

impl BregmanSpec {
    pub fn new(per_coordinate: Vec<ScalarBregman>) -> Self {
        // every supported piece contains 1/2 t^2 and a convex remainder
        BregmanSpec { mu: 1.0, per_coordinate }
    }

    pub fn uniform(n: usize, piece: ScalarBregman) -> Self {
        Self::new(vec![piece; n])
    }

    pub fn euclidean(n: usize) -> Self {
        Self::uniform(n, ScalarBregman::euclidean())
    }

    pub fn elastic_net(n: usize, gamma: f64) -> Result<Self> {
        Ok(Self::uniform(n, ScalarBregman::elastic_net(gamma)?))
    }

    /// `1/2 ||x||^2 + gamma ||x - shift||_1`.
    pub fn shifted_elastic_net(gamma: f64, shift: &[f64]) -> Result<Self> {
        let pieces = shift
            .iter()
            .map(|&s| ScalarBregman::shifted_elastic_net(gamma, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(pieces))
    }

    pub fn with_box(self, lower: f64, upper: f64) -> Result<Self> {
        let pieces = self
            .per_coordinate
            .into_iter()
            .map(|p| p.with_box(lower, upper))
            .collect::<Result<Vec<_>>>()?;
        Ok(BregmanSpec { mu: self.mu, per_coordinate: pieces })
    }

    pub fn n(&self) -> usize {
        self.per_coordinate.len()
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_len(self.n(), x.len())?;
        Ok(self.per_coordinate.iter().zip(x).map(|(j, &xi)| j.value(xi)).sum())
    }

    pub fn subdiff(&self, x: &[f64]) -> Result<Vec<Interval>> {
        check_len(self.n(), x.len())?;
        self.per_coordinate
            .iter()
            .zip(x)
            .map(|(j, &xi)| j.subdiff_interval(xi))
            .collect()
    }

    /// Checks `p in dJ(x)` coordinate-wise within `tol`, and `x in C`.
    pub fn check_subgradient(&self, x: &[f64], p: &[f64], tol: f64) -> Result<()> {
        check_len(self.n(), x.len())?;
        check_len(self.n(), p.len())?;
        for (i, ((j, &xi), &pi)) in self.per_coordinate.iter().zip(x).zip(p).enumerate() {
            let iv = j.subdiff_interval(xi)?;
            if !iv.contains(pi, tol) {
                return Err(Error::Precondition(format!(
                    "p[{i}] = {pi} not in dJ(x)[{i}] = [{}, {}] at x[{i}] = {xi}",
                    iv.lo, iv.hi
                )));
            }
        }
        Ok(())
    }

    /// Largest coordinate-wise distance of `p` from `dJ(x)`.
    pub fn membership_gap(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        check_len(self.n(), x.len())?;
        check_len(self.n(), p.len())?;
        let mut worst = 0.0f64;
        for ((j, &xi), &pi) in self.per_coordinate.iter().zip(x).zip(p) {
            worst = worst.max(j.subdiff_interval(xi)?.dist(pi));
        }
        Ok(worst)
    }

    /// `D_J^p(x, y) = J(y) - J(x) - <p, y - x>` for `p in dJ(x)`.
    pub fn bregman_distance(&self, x: &[f64], p: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.n(), y.len())?;
        self.check_subgradient(x, p, MEMBERSHIP_TOL)?;
        let mut d = 0.0;
        for (((j, &xi), &pi), &yi) in self.per_coordinate.iter().zip(x).zip(p).zip(y) {
            let jy = j.value(yi);
            if jy.is_infinite() {
                return Ok(f64::INFINITY);
            }
            d += jy - j.j_value(xi) - pi * (yi - xi);
        }
        Ok(d)
    }

    pub fn initial_subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        self.per_coordinate
            .iter()
            .zip(x)
            .map(|(j, &xi)| j.initial_subgradient(xi))
            .collect()
    }

    /// Whether every piece is `1/2 t^2 + gamma |t|` with the same `gamma`
    /// and no box; returns that `gamma`.
    pub fn uniform_elastic_gamma(&self) -> Option<f64> {
        let first = self.per_coordinate.first()?;
        let gamma = match first.kind {
            BregmanKind::Euclidean => 0.0,
            BregmanKind::ElasticNet => first.gamma,
            BregmanKind::ShiftedElasticNet if first.gamma == 0.0 => 0.0,
            BregmanKind::ShiftedElasticNet => return None,
        };
        self.per_coordinate
            .iter()
            .all(|j| !j.has_box() && j.kink().unwrap_or(0.0) == 0.0 && j.l1_weight() == gamma)
            .then_some(gamma)
    }
}

/// Iterate pair `(x, p)` with `p in dJ(x)`, plus the sweep counter.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub k: usize,
}

impl PrimalDualState {
    pub fn new(spec: &BregmanSpec, x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        spec.check_subgradient(&x, &p, MEMBERSHIP_TOL)?;
        Ok(PrimalDualState { x, p, k: 0 })
    }

    /// Starts at `x0` with [`BregmanSpec::initial_subgradient`].
    pub fn initial(spec: &BregmanSpec, x0: Vec<f64>) -> Result<Self> {
        let p = spec.initial_subgradient(&x0)?;
        Ok(PrimalDualState { x: x0, p, k: 0 })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}
