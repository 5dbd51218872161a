use crate::bregman::{abs_subdiff, Interval};
use crate::error::{check_len, Error, Result};

use super::{is_stationary_step, CoordinateObjective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    /// `x[r][c+1] - x[r][c]`, zero in the last column.
    ForwardX,
    /// `x[r+1][c] - x[r][c]`, zero in the last row.
    ForwardY,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedFilter {
    pub kind: FilterKind,
    pub phi: f64,
}

/// Student-t regularised denoising with an l1 data term:
/// `F(x) = sum_k phi_k sum_j log(1 + (K_k x)_j^2) + ||x - x_delta||_1`.
///
/// Images are row-major with `h` rows and `w` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentTObjective {
    h: usize,
    w: usize,
    filters: Vec<WeightedFilter>,
    x_delta: Vec<f64>,
}

fn psi_prime(d: f64) -> f64 {
    2.0 * d / (1.0 + d * d)
}

impl StudentTObjective {
    pub fn new(h: usize, w: usize, filters: Vec<WeightedFilter>, x_delta: Vec<f64>) -> Result<Self> {
        if h == 0 || w == 0 {
            return Err(Error::Config("image must be non-empty".into()));
        }
        check_len(h * w, x_delta.len())?;
        if let Some(f) = filters.iter().find(|f| !(f.phi >= 0.0 && f.phi.is_finite())) {
            return Err(Error::Config(format!("filter weight must be finite and >= 0, got {}", f.phi)));
        }
        Ok(StudentTObjective { h, w, filters, x_delta })
    }

    /// Horizontal and vertical forward differences, both weighted by `phi`.
    pub fn forward_differences(h: usize, w: usize, phi: f64, x_delta: Vec<f64>) -> Result<Self> {
        let filters = vec![
            WeightedFilter { kind: FilterKind::ForwardX, phi },
            WeightedFilter { kind: FilterKind::ForwardY, phi },
        ];
        Self::new(h, w, filters, x_delta)
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn x_delta(&self) -> &[f64] {
        &self.x_delta
    }

    pub fn filters(&self) -> &[WeightedFilter] {
        &self.filters
    }

    pub fn checked_value(&self, x: &[f64]) -> Result<f64> {
        check_len(self.h * self.w, x.len())?;
        Ok(self.value(x))
    }

    /// Filter output `(K x)_j` at pixel `j`.
    pub fn filter_output(&self, kind: FilterKind, x: &[f64], j: usize) -> f64 {
        let (r, c) = (j / self.w, j % self.w);
        match kind {
            FilterKind::ForwardX if c + 1 < self.w => x[j + 1] - x[j],
            FilterKind::ForwardY if r + 1 < self.h => x[j + self.w] - x[j],
            _ => 0.0,
        }
    }

    pub fn regularizer(&self, x: &[f64]) -> f64 {
        self.filters
            .iter()
            .map(|f| f.phi * (0..x.len()).map(|j| self.filter_output(f.kind, x, j).powi(2).ln_1p()).sum::<f64>())
            .sum()
    }

    /// Calls `visit(phi, neighbour_value)` for every filter term that pixel `i`
    /// enters; each such term is `phi * psi(x_i - neighbour)`.
    fn for_each_neighbour(&self, y: &[f64], i: usize, mut visit: impl FnMut(f64, f64)) {
        let (r, c) = (i / self.w, i % self.w);
        for f in &self.filters {
            match f.kind {
                FilterKind::ForwardX => {
                    if c + 1 < self.w {
                        visit(f.phi, y[i + 1]);
                    }
                    if c > 0 {
                        visit(f.phi, y[i - 1]);
                    }
                }
                FilterKind::ForwardY => {
                    if r + 1 < self.h {
                        visit(f.phi, y[i + self.w]);
                    }
                    if r > 0 {
                        visit(f.phi, y[i - self.w]);
                    }
                }
            }
        }
    }

    /// Partial derivative of the smooth regularizer at pixel `i`.
    pub fn smooth_partial(&self, y: &[f64], i: usize) -> f64 {
        let mut g = 0.0;
        self.for_each_neighbour(y, i, |phi, nb| g += phi * psi_prime(y[i] - nb));
        g
    }
}

impl CoordinateObjective for StudentTObjective {
    type Cache = ();

    fn dim(&self) -> usize {
        self.h * self.w
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.regularizer(x) + x.iter().zip(&self.x_delta).map(|(x, d)| (x - d).abs()).sum::<f64>()
    }

    fn init_cache(&self, _x: &[f64]) {}

    fn coord_diff_quotient(&self, _cache: &(), y: &[f64], i: usize, old: f64, new: f64) -> f64 {
        if is_stationary_step(old, new) {
            return self.coord_clarke_interval(&(), y, i).midpoint();
        }
        let delta = new - old;
        let mut smooth = 0.0;
        self.for_each_neighbour(y, i, |phi, nb| {
            let (a, b) = (new - nb, old - nb);
            // psi(a) - psi(b) = log1p((a - b)(a + b) / (1 + b^2))
            smooth += phi * (delta * (a + b) / (1.0 + b * b)).ln_1p();
        });
        let s = self.x_delta[i];
        let (a, b) = (new - s, old - s);
        let fidelity = if a >= 0.0 && b >= 0.0 {
            1.0
        } else if a <= 0.0 && b <= 0.0 {
            -1.0
        } else {
            (a.abs() - b.abs()) / delta
        };
        smooth / delta + fidelity
    }

    fn coord_clarke_interval(&self, _cache: &(), y: &[f64], i: usize) -> Interval {
        abs_subdiff(y[i] - self.x_delta[i]).offset(self.smooth_partial(y, i))
    }

    fn commit_coordinate(&self, _cache: &mut (), _y: &[f64], _i: usize, _old: f64, _new: f64) {}

    fn lipschitz_hint(&self, _i: usize) -> Option<f64> {
        // |psi''| <= 2 and each filter touches a pixel through at most two outputs
        Some(self.filters.iter().map(|f| 4.0 * f.phi).sum())
    }
}
