//! Synthetic problem generators. All of them are deterministic per seed.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::seeds::rng_for;

use super::QuadraticObjective;

/// `ceil(fraction * n)`, robust to products like `0.1 * 1000` landing one ulp high.
pub(crate) fn exact_count(fraction: f64, n: usize) -> usize {
    let c = (fraction * n as f64 - 1e-9).ceil();
    (c.max(0.0) as usize).min(n)
}

#[derive(Debug, Clone)]
pub struct GaussianSystem {
    pub problem: QuadraticObjective,
    pub x_true: Vec<f64>,
}

/// `A = G^T G` for a standard Gaussian `n x n` matrix `G`, a sparse ground
/// truth with exactly `ceil(sparsity * n)` nonzeros, and `b = A x_true`.
///
/// Nonzeros are uniform on `[0, 1)`, or all ones when `binary`.
pub fn gaussian_system(n: usize, sparsity: f64, binary: bool, seed: u64) -> Result<GaussianSystem> {
    if n == 0 {
        return Err(Error::Config("system size must be at least 1".into()));
    }
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(Error::Config(format!("sparsity must lie in (0, 1], got {sparsity}")));
    }

    let mut rng = rng_for(seed, "matrix");
    let g: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut a = vec![0.0; n * n];
    for k in 0..n {
        let row = &g[k * n..(k + 1) * n];
        for i in 0..n {
            let gi = row[i];
            if gi == 0.0 {
                continue;
            }
            let out = &mut a[i * n..(i + 1) * n];
            for (o, gj) in out.iter_mut().zip(row) {
                *o += gi * gj;
            }
        }
    }
    // accumulate order differs between (i, j) and (j, i) only by rounding; force exact symmetry
    for i in 0..n {
        for j in 0..i {
            let v = a[i * n + j];
            a[j * n + i] = v;
        }
    }

    let k = exact_count(sparsity, n).max(1);
    let support = sample(&mut rng_for(seed, "support"), n, k);
    let mut values = rng_for(seed, "values");
    let mut x_true = vec![0.0; n];
    for idx in support.iter() {
        x_true[idx] = if binary { 1.0 } else { values.random::<f64>() };
    }

    let tmp = QuadraticObjective::new(n, a, vec![0.0; n])?;
    let b = tmp.apply(&x_true);
    let problem = tmp.with_rhs(b)?;
    Ok(GaussianSystem { problem, x_true })
}

/// `b + delta` with `delta_i ~ N(0, (level * ||A x_true||_inf)^2)` i.i.d.
pub fn add_noise(b: &[f64], a: &QuadraticObjective, x_true: &[f64], level: f64, seed: u64) -> Result<Vec<f64>> {
    check_len(a.n(), b.len())?;
    check_len(a.n(), x_true.len())?;
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::Config(format!("noise level must be finite and >= 0, got {level}")));
    }
    if level == 0.0 {
        return Ok(b.to_vec());
    }
    let scale = level * a.apply(x_true).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut rng = rng_for(seed, "noise");
    Ok(b.iter()
        .map(|&bi| {
            let z: f64 = StandardNormal.sample(&mut rng);
            bi + scale * z
        })
        .collect())
}

/// Standard Gaussian start point, drawn from the "init" stream of `seed`.
pub fn gaussian_start(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, "init");
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Salt and pepper noise: exactly `ceil(density * len)` pixels, chosen
/// without replacement, are set to 0 or 1 with equal probability.
pub fn impulse_noise(img: &[f64], density: f64, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Config(format!("noise density must lie in [0, 1], got {density}")));
    }
    let mut out = img.to_vec();
    let k = exact_count(density, img.len());
    let mut rng = rng_for(seed, "impulse");
    let picked = sample(&mut rng, img.len(), k);
    for idx in picked.iter() {
        out[idx] = if rng.random::<bool>() { 1.0 } else { 0.0 };
    }
    Ok(out)
}

/// A synthetic piecewise-constant test image in `[0, 1]`: a background level
/// with a few overlapping axis-aligned rectangles.
pub fn piecewise_constant_image(h: usize, w: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, "image");
    let background = rng.random_range(0.2..0.4);
    let mut img = vec![background; h * w];
    let pieces = 4 + (h.min(w) / 16).min(4);
    for _ in 0..pieces {
        let level = rng.random_range(0.15..0.85);
        let (r0, r1) = span(&mut rng, h);
        let (c0, c1) = span(&mut rng, w);
        for r in r0..r1 {
            img[r * w + c0..r * w + c1].fill(level);
        }
    }
    img
}

fn span(rng: &mut impl Rng, len: usize) -> (usize, usize) {
    let a = rng.random_range(0..len);
    let extent = rng.random_range(len / 6..=len / 2).max(1);
    (a.min(len.saturating_sub(extent)), (a.min(len.saturating_sub(extent)) + extent).min(len))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_system_is_deterministic() {
        let a = gaussian_system(20, 0.1, false, 3).unwrap();
        let b = gaussian_system(20, 0.1, false, 3).unwrap();
        assert_eq!(a.problem, b.problem);
        assert_eq!(a.x_true, b.x_true);
        let c = gaussian_system(20, 0.1, false, 4).unwrap();
        assert_ne!(a.x_true, c.x_true);
    }

    #[test]
    fn support_sizes() {
        let s = gaussian_system(256, 0.1, false, 1).unwrap();
        assert_eq!(s.x_true.iter().filter(|v| **v != 0.0).count(), 26);
        let dense = gaussian_system(12, 1.0, false, 1).unwrap();
        assert_eq!(dense.x_true.iter().filter(|v| **v != 0.0).count(), 12);
        let bin = gaussian_system(50, 0.1, true, 2).unwrap();
        assert!(bin.x_true.iter().all(|v| *v == 0.0 || *v == 1.0));
        assert_eq!(bin.x_true.iter().filter(|v| **v == 1.0).count(), 5);
    }

    #[test]
    fn system_structure() {
        let s = gaussian_system(16, 0.25, false, 9).unwrap();
        let q = &s.problem;
        q.check_diagonal().unwrap();
        assert_eq!(q.residual(&s.x_true).iter().map(|r| r.abs()).fold(0.0, f64::max), 0.0);
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(q.row(i)[j], q.row(j)[i]);
            }
        }
    }

    #[test]
    fn invalid_generator_arguments() {
        assert!(gaussian_system(0, 0.1, false, 1).is_err());
        assert!(gaussian_system(10, 0.0, false, 1).is_err());
        assert!(gaussian_system(10, 1.5, false, 1).is_err());
        assert!(impulse_noise(&[0.5], 1.5, 1).is_err());
    }

    #[test]
    fn noise_level_zero_is_identity_and_seeded() {
        let s = gaussian_system(10, 0.2, false, 1).unwrap();
        let b = s.problem.rhs();
        assert_eq!(add_noise(b, &s.problem, &s.x_true, 0.0, 5).unwrap(), b);
        let n1 = add_noise(b, &s.problem, &s.x_true, 0.1, 5).unwrap();
        let n2 = add_noise(b, &s.problem, &s.x_true, 0.1, 5).unwrap();
        assert_eq!(n1, n2);
        assert_ne!(n1, b);
    }

    #[test]
    fn noise_standard_deviation_monte_carlo() {
        // A = I, x_true = 2 e_0 so ||A x_true||_inf = 2 and the target std is 0.2;
        // 10^5 draws collected over several seeds of a 300-dim system
        let n = 100_000;
        let m = 300;
        let mut ident = vec![0.0; m * m];
        for i in 0..m {
            ident[i * m + i] = 1.0;
        }
        let q = QuadraticObjective::new(m, ident, vec![0.0; m]).unwrap();
        let mut x_true = vec![0.0; m];
        x_true[0] = 2.0;
        let mut draws = Vec::with_capacity(n);
        let mut seed = 0;
        while draws.len() < n {
            let noisy = add_noise(&vec![0.0; m], &q, &x_true, 0.1, seed).unwrap();
            draws.extend(noisy);
            seed += 1;
        }
        draws.truncate(n);
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!((std - 0.2).abs() <= 0.02 * 0.2, "empirical std {std}");
    }

    #[test]
    fn impulse_noise_counts() {
        let img = vec![0.5; 64 * 64];
        let noisy = impulse_noise(&img, 0.1, 7).unwrap();
        let changed = noisy.iter().filter(|v| **v != 0.5).count();
        assert_eq!(changed, 410);
        assert!(noisy.iter().all(|v| *v == 0.5 || *v == 0.0 || *v == 1.0));
        assert_eq!(impulse_noise(&img, 0.0, 7).unwrap(), img);
        assert!(impulse_noise(&img, 1.0, 7).unwrap().iter().all(|v| *v == 0.0 || *v == 1.0));
        assert_eq!(impulse_noise(&img, 0.1, 7).unwrap(), noisy);
    }

    #[test]
    fn piecewise_image_in_unit_range() {
        let img = piecewise_constant_image(64, 64, 3);
        assert_eq!(img.len(), 4096);
        assert!(img.iter().all(|v| (0.0..=1.0).contains(v)));
        let distinct = {
            let mut v: Vec<u64> = img.iter().map(|x| x.to_bits()).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        assert!(distinct >= 2);
        assert_eq!(img, piecewise_constant_image(64, 64, 3));
    }
}
