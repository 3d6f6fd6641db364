//! Tabulated densities: monotone cubic Hermite (PCHIP) or linear interpolation
//! of a user-supplied `(x, f(x))` grid.

use super::spec::Interpolation;
use crate::error::{Error, Result};

/// Largest deviation of the table's integral from 1 that is silently renormalized.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Tabulated {
    x: Vec<f64>,
    f: Vec<f64>,
    /// Knot derivatives (PCHIP only).
    d: Vec<f64>,
    /// Cumulative integral at each knot, normalized so the last entry is 1.
    cum: Vec<f64>,
    rule: Interpolation,
    /// Integral of the table as supplied, before renormalization.
    raw_integral: f64,
}

fn pchip_slopes(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (f[k + 1] - f[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (d0, d1) = (delta[k - 1], delta[k]);
        if d0 * d1 > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    // Shape-preserving three-point end slopes.
    let end = |h0: f64, h1: f64, m0: f64, m1: f64| -> f64 {
        let s = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if s.signum() != m0.signum() {
            0.0
        } else if m0.signum() != m1.signum() && s.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

impl Tabulated {
    pub fn new(x: &[f64], f: &[f64], rule: Interpolation) -> Result<Self> {
        if x.len() != f.len() {
            return Err(Error::InvalidParams(format!(
                "custom grid has {} x values but {} f values",
                x.len(),
                f.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidParams("custom grid needs at least two points".into()));
        }
        if x.iter().chain(f).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("custom grid contains non-finite values".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("custom grid x must be strictly increasing".into()));
        }
        if f.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParams("custom pdf values must be nonnegative".into()));
        }
        let d = match rule {
            Interpolation::Pchip => pchip_slopes(x, f),
            Interpolation::Linear => Vec::new(),
        };
        let mut tab = Tabulated {
            x: x.to_vec(),
            f: f.to_vec(),
            d,
            cum: Vec::new(),
            rule,
            raw_integral: 0.0,
        };
        let mut cum = Vec::with_capacity(x.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for k in 0..x.len() - 1 {
            acc += tab.segment_integral(k, 1.0);
            cum.push(acc);
        }
        if !(acc > 0.0) || (acc - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::UnnormalizedCustomPdf {
                integral: acc,
                tolerance: RENORMALIZE_TOLERANCE,
            });
        }
        tab.raw_integral = acc;
        tab.f.iter_mut().for_each(|v| *v /= acc);
        tab.d.iter_mut().for_each(|v| *v /= acc);
        tab.cum = cum.into_iter().map(|c| c / acc).collect();
        Ok(tab)
    }

    pub fn rule(&self) -> Interpolation {
        self.rule
    }

    pub fn raw_integral(&self) -> f64 {
        self.raw_integral
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn left(&self) -> f64 {
        self.x[0]
    }

    pub fn right(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Segment index `k` with `x[k] <= x < x[k+1]`, clamped to the table.
    fn locate(&self, x: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// `∫_{x_k}^{x_k + t h}` of the interpolant, `t ∈ [0, 1]`.
    fn segment_integral(&self, k: usize, t: f64) -> f64 {
        let h = self.x[k + 1] - self.x[k];
        let (f0, f1) = (self.f[k], self.f[k + 1]);
        match self.rule {
            Interpolation::Linear => h * (f0 * t + 0.5 * (f1 - f0) * t * t),
            Interpolation::Pchip => {
                let (d0, d1) = (self.d[k], self.d[k + 1]);
                let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
                let i00 = t - t3 + 0.5 * t4;
                let i10 = 0.5 * t2 - 2.0 * t3 / 3.0 + 0.25 * t4;
                let i01 = t3 - 0.5 * t4;
                let i11 = -t3 / 3.0 + 0.25 * t4;
                h * (f0 * i00 + h * d0 * i10 + f1 * i01 + h * d1 * i11)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(x >= self.left() && x <= self.right()) {
            return 0.0;
        }
        let k = self.locate(x);
        let h = self.x[k + 1] - self.x[k];
        let t = (x - self.x[k]) / h;
        let (f0, f1) = (self.f[k], self.f[k + 1]);
        let v = match self.rule {
            Interpolation::Linear => f0 + (f1 - f0) * t,
            Interpolation::Pchip => {
                let (d0, d1) = (self.d[k], self.d[k + 1]);
                let h00 = (2.0 * t - 3.0) * t * t + 1.0;
                let h10 = ((t - 2.0) * t + 1.0) * t;
                let h01 = (3.0 - 2.0 * t) * t * t;
                let h11 = (t - 1.0) * t * t;
                f0 * h00 + h * d0 * h10 + f1 * h01 + h * d1 * h11
            }
        };
        v.max(0.0)
    }

    /// Derivative of the interpolant; `None` for linear tables.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        if self.rule == Interpolation::Linear {
            return None;
        }
        if !(x >= self.left() && x <= self.right()) {
            return Some(0.0);
        }
        let k = self.locate(x);
        let h = self.x[k + 1] - self.x[k];
        let t = (x - self.x[k]) / h;
        let (f0, f1, d0, d1) = (self.f[k], self.f[k + 1], self.d[k], self.d[k + 1]);
        let g00 = 6.0 * t * t - 6.0 * t;
        let g10 = (3.0 * t - 4.0) * t + 1.0;
        let g01 = -g00;
        let g11 = (3.0 * t - 2.0) * t;
        Some((f0 * g00 + f1 * g01) / h + d0 * g10 + d1 * g11)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.left() {
            return 0.0;
        }
        if x >= self.right() {
            return 1.0;
        }
        let k = self.locate(x);
        let h = self.x[k + 1] - self.x[k];
        let t = (x - self.x[k]) / h;
        (self.cum[k] + self.segment_integral(k, t)).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_normalized() {
        let t = Tabulated::new(&[0.0, 1.0], &[2.0, 0.0], Interpolation::Pchip).unwrap();
        assert!((t.raw_integral() - 1.0).abs() < 1e-15);
        assert!((t.cdf(0.5) - 0.75).abs() < 1e-15);
        assert!((t.pdf(0.25) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn large_deviation_rejected() {
        let err = Tabulated::new(&[0.0, 1.0], &[1.0, 1.0 + 0.01], Interpolation::Linear).unwrap_err();
        assert!(matches!(err, Error::UnnormalizedCustomPdf { .. }));
    }

    #[test]
    fn small_deviation_renormalized() {
        let t = Tabulated::new(&[0.0, 1.0], &[1.0005, 1.0005], Interpolation::Linear).unwrap();
        assert!((t.pdf(0.3) - 1.0).abs() < 1e-14);
        assert!((t.cdf(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pchip_preserves_monotone_data() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64 / 19.0).powi(2) * 4.0).collect();
        let f: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
        let t = Tabulated::new(&x, &f, Interpolation::Pchip);
        // Not normalized on purpose: just check shape on a rescaled copy.
        let total: f64 = {
            let probe = Tabulated::new(&x, &f, Interpolation::Linear);
            match probe {
                Err(Error::UnnormalizedCustomPdf { integral, .. }) => integral,
                _ => 1.0,
            }
        };
        assert!(t.is_err());
        let f: Vec<f64> = f.iter().map(|v| v / total).collect();
        if let Ok(t) = Tabulated::new(&x, &f, Interpolation::Pchip) {
            let mut prev = f64::INFINITY;
            for i in 0..=400 {
                let v = t.pdf(4.0 * i as f64 / 400.0);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let x: Vec<f64> = (0..=200).map(|i| -6.0 + 12.0 * i as f64 / 200.0).collect();
        let f: Vec<f64> = x
            .iter()
            .map(|v| (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt())
            .collect();
        let t = Tabulated::new(&x, &f, Interpolation::Pchip).unwrap();
        for &p in &[-2.03, -0.71, 0.4, 1.77] {
            let h = 1e-6;
            let fd = (t.pdf(p + h) - t.pdf(p - h)) / (2.0 * h);
            assert!((t.derivative(p).unwrap() - fd).abs() < 1e-6);
        }
        let lin = Tabulated::new(&x, &f, Interpolation::Linear).unwrap();
        assert!(lin.derivative(0.1).is_none());
    }
}
