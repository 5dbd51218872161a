use crate::bregman::{abs_subdiff, Interval};
use crate::error::{check_len, Error, Result};

use super::{is_stationary_step, CoordinateObjective, QuadraticParts};

/// `V(x) = 1/2 <x, Ax> - <b, x>` with `A` symmetric positive semi-definite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    n: usize,
    /// Row-major `n x n`.
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Cached residual `r = A y - b` for the sweep vector `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual(pub Vec<f64>);

impl QuadraticObjective {
    /// `a` is row-major. Symmetry is checked to a relative tolerance of 1e-12.
    pub fn new(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("empty system".into()));
        }
        check_len(n * n, a.len())?;
        check_len(n, b.len())?;
        for i in 0..n {
            for j in 0..i {
                let (x, y) = (a[i * n + j], a[j * n + i]);
                if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                    return Err(Error::Config(format!("matrix not symmetric at ({i}, {j}): {x} vs {y}")));
                }
            }
        }
        Ok(QuadraticObjective { n, a, b })
    }

    pub fn from_rows(rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let mut a = Vec::with_capacity(n * n);
        for row in rows {
            check_len(n, row.len())?;
            a.extend_from_slice(row);
        }
        Self::new(n, a, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.a[i * self.n + i]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn with_rhs(&self, b: Vec<f64>) -> Result<Self> {
        check_len(self.n, b.len())?;
        Ok(QuadraticObjective { n: self.n, a: self.a.clone(), b })
    }

    /// Errors on the first non-positive diagonal entry.
    pub fn check_diagonal(&self) -> Result<()> {
        for i in 0..self.n {
            let d = self.diag(i);
            if !(d > 0.0) {
                return Err(Error::ZeroDiagonal { index: i, value: d });
            }
        }
        Ok(())
    }

    pub fn row_dot(&self, i: usize, y: &[f64]) -> f64 {
        self.row(i).iter().zip(y).map(|(a, y)| a * y).sum()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row_dot(i, x)).collect()
    }

    /// `Ax - b`, the gradient.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row_dot(i, x) - self.b[i]).collect()
    }

    pub fn checked_value(&self, x: &[f64]) -> Result<f64> {
        check_len(self.n, x.len())?;
        Ok(self.quadratic_value(x))
    }

    pub fn quadratic_value(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for i in 0..self.n {
            v += x[i] * (0.5 * self.row_dot(i, x) - self.b[i]);
        }
        v
    }

    /// `<a^i, y> - b_i + a_ii (new - old) / 2`, with `y[i] == old`.
    pub fn coord_dq(&self, y: &[f64], i: usize, old: f64, new: f64) -> f64 {
        self.row_dot(i, y) - self.b[i] + 0.5 * self.diag(i) * (new - old)
    }
}

impl QuadraticParts<'_> {
    /// `V(x)` from the residual `r = Ax - b`.
    pub fn value_cached(&self, r: &Residual, x: &[f64]) -> f64 {
        let l1 = if self.lambda == 0.0 { 0.0 } else { self.lambda * x.iter().map(|v| v.abs()).sum::<f64>() };
        self.quadratic.value_cached(r, x) + l1
    }

    /// `[dV(x)]_i` from the residual `r = Ax - b`.
    pub fn clarke_interval(&self, r: &Residual, x: &[f64], i: usize) -> Interval {
        if self.lambda == 0.0 {
            return Interval::point(r.0[i]);
        }
        let ab = abs_subdiff(x[i]);
        Interval::new(self.lambda * ab.lo, self.lambda * ab.hi).offset(r.0[i])
    }
}

impl CoordinateObjective for QuadraticObjective {
    type Cache = Residual;

    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.quadratic_value(x)
    }

    fn init_cache(&self, x: &[f64]) -> Residual {
        Residual(self.residual(x))
    }

    fn value_cached(&self, cache: &Residual, x: &[f64]) -> f64 {
        0.5 * x.iter().zip(&cache.0).zip(&self.b).map(|((x, r), b)| x * (r - b)).sum::<f64>()
    }

    fn coord_diff_quotient(&self, cache: &Residual, _y: &[f64], i: usize, old: f64, new: f64) -> f64 {
        cache.0[i] + 0.5 * self.diag(i) * (new - old)
    }

    fn coord_clarke_interval(&self, cache: &Residual, _y: &[f64], i: usize) -> Interval {
        Interval::point(cache.0[i])
    }

    fn commit_coordinate(&self, cache: &mut Residual, _y: &[f64], i: usize, old: f64, new: f64) {
        let delta = new - old;
        if delta != 0.0 {
            // column i equals row i by symmetry
            for (r, a) in cache.0.iter_mut().zip(self.row(i)) {
                *r += a * delta;
            }
        }
    }

    fn lipschitz_hint(&self, i: usize) -> Option<f64> {
        Some(self.diag(i))
    }

    fn quadratic_parts(&self) -> Option<QuadraticParts<'_>> {
        Some(QuadraticParts { quadratic: self, lambda: 0.0 })
    }
}

/// `V(x) = 1/2 <x, Ax> - <b, x> + lambda ||x||_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1QuadraticObjective {
    pub inner: QuadraticObjective,
    pub lambda: f64,
}

impl L1QuadraticObjective {
    pub fn new(inner: QuadraticObjective, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("l1 weight must be finite and >= 0, got {lambda}")));
        }
        Ok(L1QuadraticObjective { inner, lambda })
    }
}

/// `(|new| - |old|) / (new - old)`, or `sgn(old)` when the points coincide.
fn abs_quotient(old: f64, new: f64) -> f64 {
    if is_stationary_step(old, new) {
        abs_subdiff(old).midpoint()
    } else if old >= 0.0 && new >= 0.0 {
        1.0
    } else if old <= 0.0 && new <= 0.0 {
        -1.0
    } else {
        (new.abs() - old.abs()) / (new - old)
    }
}

impl CoordinateObjective for L1QuadraticObjective {
    type Cache = Residual;

    fn dim(&self) -> usize {
        self.inner.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.quadratic_value(x) + self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn init_cache(&self, x: &[f64]) -> Residual {
        self.inner.init_cache(x)
    }

    fn value_cached(&self, cache: &Residual, x: &[f64]) -> f64 {
        self.quadratic_parts().expect("quadratic").value_cached(cache, x)
    }

    fn coord_diff_quotient(&self, cache: &Residual, y: &[f64], i: usize, old: f64, new: f64) -> f64 {
        self.inner.coord_diff_quotient(cache, y, i, old, new) + self.lambda * abs_quotient(old, new)
    }

    fn coord_clarke_interval(&self, cache: &Residual, y: &[f64], i: usize) -> Interval {
        self.quadratic_parts().expect("quadratic").clarke_interval(cache, y, i)
    }

    fn commit_coordinate(&self, cache: &mut Residual, y: &[f64], i: usize, old: f64, new: f64) {
        self.inner.commit_coordinate(cache, y, i, old, new)
    }

    fn lipschitz_hint(&self, i: usize) -> Option<f64> {
        self.inner.lipschitz_hint(i)
    }

    fn quadratic_parts(&self) -> Option<QuadraticParts<'_>> {
        Some(QuadraticParts { quadratic: &self.inner, lambda: self.lambda })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::testing::two_point_quotient;
    use proptest::prelude::*;

    fn q2() -> QuadraticObjective {
        QuadraticObjective::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]], vec![3.0, 3.0]).unwrap()
    }

    #[test]
    fn value_examples() {
        let q = q2();
        assert_eq!(q.checked_value(&[1.0, 1.0]).unwrap(), -3.0);
        assert_eq!(q.checked_value(&[0.0, 0.0]).unwrap(), 0.0);
        let one = QuadraticObjective::from_rows(&[vec![1.0]], vec![0.0]).unwrap();
        assert_eq!(one.checked_value(&[2.0]).unwrap(), 2.0);
        assert!(matches!(q.checked_value(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn diff_quotient_examples() {
        let q = QuadraticObjective::from_rows(&[vec![2.0]], vec![0.0]).unwrap();
        assert_eq!(q.coord_dq(&[1.0], 0, 1.0, 3.0), 4.0);
        assert_eq!(two_point_quotient(&q, &[1.0], 0, 1.0, 3.0), 4.0);
        assert_eq!(q.coord_dq(&[1.0], 0, 1.0, 1.0), 2.0);

        let id = QuadraticObjective::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(id.coord_dq(&[0.0, 5.0], 0, 0.0, 2.0), 1.0);
        assert_eq!(two_point_quotient(&id, &[0.0, 5.0], 0, 0.0, 2.0), 1.0);
    }

    #[test]
    fn rejects_asymmetric() {
        let err = QuadraticObjective::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn zero_diagonal_reported() {
        let q = QuadraticObjective::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(q.check_diagonal(), Err(Error::ZeroDiagonal { index: 1, value: 0.0 }));
    }

    #[test]
    fn l1_clarke_interval_at_zero() {
        let q = q2();
        let l1 = L1QuadraticObjective::new(q, 0.5).unwrap();
        let x = [0.0, 1.0];
        let c = l1.init_cache(&x);
        // r = Ax - b = [1 - 3, 2 - 3]
        assert_eq!(l1.coord_clarke_interval(&c, &x, 0), Interval::new(-2.5, -1.5));
        assert_eq!(l1.coord_clarke_interval(&c, &x, 1), Interval::point(-0.5));
        assert_eq!(l1.value(&x), q2().value(&x) + 0.5);
    }

    fn spd(n: usize, seed: &[f64]) -> QuadraticObjective {
        // G^T G + I from a flat seed vector
        let g: Vec<f64> = seed.iter().copied().cycle().take(n * n).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| g[k * n + i] * g[k * n + j]).sum::<f64>();
            }
            a[i * n + i] += 1.0;
        }
        let b = (0..n).map(|i| seed[i % seed.len()]).collect();
        QuadraticObjective::new(n, a, b).unwrap()
    }

    proptest! {
        #[test]
        fn dq_matches_two_point_oracle(
            seed in prop::collection::vec(-2.0f64..2.0, 16),
            y in prop::collection::vec(-3.0f64..3.0, 4),
            i in 0usize..4,
            new in -3.0f64..3.0,
        ) {
            let q = spd(4, &seed);
            let old = y[i];
            prop_assume!((new - old).abs() > 1e-3);
            let fast = q.coord_dq(&y, i, old, new);
            let cache = q.init_cache(&y);
            let cached = q.coord_diff_quotient(&cache, &y, i, old, new);
            let oracle = two_point_quotient(&q, &y, i, old, new);
            let scale = oracle.abs().max(1.0);
            // the two-point oracle loses digits to cancellation; 1e-10 after scaling
            prop_assert!((fast - oracle).abs() <= 1e-10 * scale * (1.0 + q.value(&y).abs()));
            prop_assert!((cached - fast).abs() <= 1e-12 * scale);
        }

        #[test]
        fn residual_cache_stays_coherent(
            seed in prop::collection::vec(-2.0f64..2.0, 25),
            x0 in prop::collection::vec(-3.0f64..3.0, 5),
            moves in prop::collection::vec((0usize..5, -3.0f64..3.0), 1..40),
        ) {
            let q = spd(5, &seed);
            let mut y = x0.clone();
            let mut cache = q.init_cache(&y);
            for (i, new) in moves {
                let old = y[i];
                y[i] = new;
                q.commit_coordinate(&mut cache, &y, i, old, new);
            }
            let fresh = q.residual(&y);
            let scale = fresh.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in fresh.iter().zip(&cache.0) {
                prop_assert!((a - b).abs() <= 1e-9 * scale);
            }
            let v_cached = q.value_cached(&cache, &y);
            prop_assert!((v_cached - q.value(&y)).abs() <= 1e-9 * q.value(&y).abs().max(1.0));
        }

        #[test]
        fn l1_dq_matches_two_point_oracle(
            seed in prop::collection::vec(-2.0f64..2.0, 9),
            y in prop::collection::vec(-3.0f64..3.0, 3),
            i in 0usize..3,
            new in -3.0f64..3.0,
            lambda in 0.0f64..5.0,
        ) {
            let l1 = L1QuadraticObjective::new(spd(3, &seed), lambda).unwrap();
            let old = y[i];
            prop_assume!((new - old).abs() > 1e-3);
            let cache = l1.init_cache(&y);
            let dq = l1.coord_diff_quotient(&cache, &y, i, old, new);
            let oracle = two_point_quotient(&l1, &y, i, old, new);
            prop_assert!((dq - oracle).abs() <= 1e-10 * (1.0 + l1.value(&y).abs()) * oracle.abs().max(1.0));
        }
    }
}
