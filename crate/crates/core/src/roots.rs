//! Bracketed scalar root finding (Brent's method).

use crate::error::{Error, Result};

/// Result of a bracketed solve.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Stopping rule for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Stop once `|f| <= f_tol`.
    pub f_tol: f64,
    /// Stop once the bracket is narrower than `2 (x_rel |x| + x_abs)`.
    pub x_rel: f64,
    pub x_abs: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            f_tol: 0.0,
            x_rel: 4.0 * f64::EPSILON,
            x_abs: 1e-300,
            max_iter: 200,
        }
    }
}

/// Brent's method on `[a, b]` given `f(a)`, `f(b)` of opposite signs.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: Tolerance) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            fx: fa,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            fx: fb,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket {
            p: f64::NAN,
            lo: a,
            hi: b,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=tol.max_iter {
        if fb.signum() == fc.signum() {
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
        let tol1 = 2.0 * tol.x_rel * b.abs() + 0.5 * tol.x_abs;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= tol.f_tol || fb == 0.0 {
            return Ok(Root {
                x: b,
                fx: fb,
                iterations: iter,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation or secant.
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
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
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
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::NonConvergence {
        iterations: tol.max_iter,
    })
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > x_tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}
