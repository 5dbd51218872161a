//! Bracketed scalar root finding (Brent's method: inverse quadratic
//! interpolation and secant steps guarded by bisection).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct BrentOptions {
    /// Stop once `|f(b)| <= f_tol`.
    pub f_tol: f64,
    /// Relative bracket tolerance.
    pub x_tol: f64,
    /// Absolute bracket tolerance.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        BrentOptions { f_tol: 0.0, x_tol: 1e-15, abs_tol: 1e-16, max_iter: 200 }
    }
}

/// Finds a root of `f` in `[a, b]` given `f(a)` and `f(b)` of opposite signs.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, opts: &BrentOptions) -> Result<f64> {
    debug_assert!(fa.signum() != fb.signum() || fa == 0.0 || fb == 0.0);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..opts.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (opts.x_tol * b.abs() + opts.abs_tol);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 || fb.abs() <= opts.f_tol {
            return Ok(b);
        }

        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b);
    }

    Err(Error::Convergence { iterations: opts.max_iter, lo: b.min(c), hi: b.max(c), residual: fb })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let opts = BrentOptions::default();
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, -2.0, 2.0, &opts).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        let r = brent(|x| x.cos() - x, 0.0, 1.0, 1.0, 1f64.cos() - 1.0, &opts).unwrap();
        assert!((r.cos() - r).abs() < 1e-15);
    }

    #[test]
    fn handles_discontinuous_sign_change() {
        let opts = BrentOptions::default();
        let f = |x: f64| if x < 0.3 { 1.0 } else { -1.0 };
        let r = brent(f, 0.0, 1.0, 1.0, -1.0, &opts).unwrap();
        assert!((r - 0.3).abs() < 1e-14);
    }

    #[test]
    fn endpoint_root() {
        let opts = BrentOptions::default();
        assert_eq!(brent(|x| x, 0.0, 1.0, 0.0, 1.0, &opts).unwrap(), 0.0);
    }
}
