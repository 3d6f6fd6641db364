//! Pearson's coefficients, the `γ ↔ ν4` identity, classification of true
//! (mode) skewness from a p-mean curve, the magnitude `ℓ` and the van Zwet
//! condition.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, Side};
use crate::error::{Error, Result};
use crate::pmean::{pmean_curve, solve_pmean, tail_integral, with_derivative, DomainUsed, PMeanCurve};

/// Threshold on `|dν_p/dp|` separating increase, decrease and flatness.
pub const SLOPE_TOL: f64 = 1e-9;
/// Fewest admissible grid points `classify` accepts.
pub const MIN_GRID: usize = 8;
/// Points in the van Zwet scan.
pub const VAN_ZWET_GRID: usize = 2048;
/// Relative Cauchy tolerance for the `ℓ` sequence.
pub const ELL_CAUCHY: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PearsonCoefficients {
    /// `(ν2 − ν0)/σ`.
    pub mode_skewness: Option<f64>,
    /// `3(ν2 − ν1)/σ`.
    pub median_skewness: Option<f64>,
    /// `E[((X − ν2)/σ)³]`.
    pub moment_skewness: Option<f64>,
    pub sigma: Option<f64>,
    pub mode: Option<f64>,
    pub median: f64,
    pub mean: Option<f64>,
}

/// Central moment `E[(X − c)^k]` for integer `k ≥ 2` by tail quadrature about `c`.
fn central_moment(dist: &Distribution, c: f64, k: u32) -> Result<f64> {
    let q = k as f64;
    let right = tail_integral(dist, c, Side::Right, q, false)?.value();
    let left = tail_integral(dist, c, Side::Left, q, false)?.value();
    Ok(if k.is_multiple_of(2) {
        right + left
    } else {
        right - left
    })
}

/// Coefficients that need an infinite moment come back as `None`.
pub fn pearson_coefficients(dist: &Distribution) -> Result<PearsonCoefficients> {
    let mode = dist.mode();
    let median = solve_pmean(dist, 1.0)?.nu_p;
    let mean = if dist.moment_exists(1.0) {
        Some(solve_pmean(dist, 2.0)?.nu_p)
    } else {
        None
    };
    let sigma = match mean {
        Some(m) if dist.moment_exists(2.0) => Some(central_moment(dist, m, 2)?.sqrt()),
        _ => None,
    };
    let moment_skewness = match (mean, sigma) {
        (Some(m), Some(s)) if dist.moment_exists(3.0) => Some(central_moment(dist, m, 3)? / s.powi(3)),
        _ => None,
    };
    let (mode_skewness, median_skewness) = match (mean, sigma) {
        (Some(m), Some(s)) => (mode.map(|m0| (m - m0) / s), Some(3.0 * (m - median) / s)),
        _ => (None, None),
    };
    Ok(PearsonCoefficients {
        mode_skewness,
        median_skewness,
        moment_skewness,
        sigma,
        mode,
        median,
        mean,
    })
}

/// `γ` computed directly and through `((ν4−ν2)/σ)³ + 3(ν4−ν2)/σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaIdentity {
    pub gamma_direct: f64,
    pub gamma_from_nu4: f64,
    pub difference: f64,
    pub nu2: f64,
    pub nu4: f64,
    pub sigma: f64,
    /// `sign(γ) = sign(ν4 − ν2)`, with values within `1e-9 (1 + |γ|)` of zero
    /// counted as zero.
    pub signs_agree: bool,
}

pub fn gamma_iff_nu4(dist: &Distribution) -> Result<GammaIdentity> {
    if !dist.moment_exists(3.0) {
        return Err(Error::MomentDiverges(
            "moment skewness needs a finite third moment".into(),
        ));
    }
    let pc = pearson_coefficients(dist)?;
    let (gamma, sigma, nu2) = match (pc.moment_skewness, pc.sigma, pc.mean) {
        (Some(g), Some(s), Some(m)) => (g, s, m),
        _ => return Err(Error::MomentDiverges("moment skewness unavailable".into())),
    };
    let nu4 = solve_pmean(dist, 4.0)?.nu_p;
    let t = (nu4 - nu2) / sigma;
    let from_nu4 = t.powi(3) + 3.0 * t;
    let tol = 1e-9 * (1.0 + gamma.abs());
    let sign = |v: f64| {
        if v.abs() <= tol {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    Ok(GammaIdentity {
        gamma_direct: gamma,
        gamma_from_nu4: from_nu4,
        difference: gamma - from_nu4,
        nu2,
        nu4,
        sigma,
        signs_agree: sign(gamma) == sign(t),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    TrulyPositive,
    TrulyNegative,
    TrulyModePositive,
    TrulyModeNegative,
    TrulyPositiveFullDomain,
    TrulyNegativeFullDomain,
    TrulyModePositiveFullDomain,
    TrulyModeNegativeFullDomain,
    Symmetric,
    Indeterminate,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        use Classification::*;
        match self {
            TrulyPositive => "truly_positive",
            TrulyNegative => "truly_negative",
            TrulyModePositive => "truly_mode_positive",
            TrulyModeNegative => "truly_mode_negative",
            TrulyPositiveFullDomain => "truly_positive_full_domain",
            TrulyNegativeFullDomain => "truly_negative_full_domain",
            TrulyModePositiveFullDomain => "truly_mode_positive_full_domain",
            TrulyModeNegativeFullDomain => "truly_mode_negative_full_domain",
            Symmetric => "symmetric",
            Indeterminate => "indeterminate",
        }
    }

    pub fn is_full_domain(self) -> bool {
        self.as_str().ends_with("_full_domain")
    }

    /// The label without the domain suffix.
    pub fn base(self) -> &'static str {
        self.as_str().trim_end_matches("_full_domain")
    }

    fn with_domain(self, full: bool) -> Self {
        use Classification::*;
        if !full {
            return self;
        }
        match self {
            TrulyPositive => TrulyPositiveFullDomain,
            TrulyNegative => TrulyNegativeFullDomain,
            TrulyModePositive => TrulyModePositiveFullDomain,
            TrulyModeNegative => TrulyModeNegativeFullDomain,
            other => other,
        }
    }
}

impl fmt::Display for Classification {
    /// `truly_mode_positive (full domain)` style.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full_domain() {
            write!(f, "{} (full domain)", self.base())
        } else {
            f.write_str(self.as_str())
        }
    }
}

/// Magnitude `ℓ = lim (dν_p/dp)/(ν_p − ν1)` as `p → sup 𝒟`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllEstimate {
    pub ell: Option<f64>,
    /// The extrapolated sequence failed its Cauchy test.
    pub diverged: bool,
    /// `ℓ` is not defined for bounded support.
    pub bounded_support: bool,
    /// `(p, h(p))` pairs that fed the extrapolation.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewnessReport {
    pub pearson: PearsonCoefficients,
    pub curve: PMeanCurve,
    pub classification: Classification,
    /// First grid point that broke monotonicity, for `Indeterminate`.
    pub offending_p: Option<f64>,
    pub ell: EllEstimate,
    pub van_zwet: bool,
}

impl SkewnessReport {
    /// The external JSON form, pointing at the curve written elsewhere.
    pub fn to_json(&self, curve_csv_path: &str) -> serde_json::Value {
        serde_json::json!({
            "pearson": self.pearson,
            "classification": self.classification.as_str(),
            "ell": self.ell.ell,
            "van_zwet": self.van_zwet,
            "curve_csv_path": curve_csv_path,
        })
    }
}

/// Classify the curve's monotonicity; returns the label and, if
/// indeterminate, the first offending `p`.
pub fn classify_curve(curve: &PMeanCurve, mode: Option<f64>) -> (Classification, Option<f64>) {
    let pts = &curve.points;
    let full = curve.domain_used == DomainUsed::FullDomain;
    let slopes: Vec<Option<f64>> = pts.iter().map(|pt| pt.dnu_dp).collect();
    let all = |pred: &dyn Fn(f64) -> bool| slopes.iter().all(|s| s.is_some_and(pred));
    let label = if all(&|s| s > SLOPE_TOL) {
        let nu_min = pts[0].nu_p;
        match mode {
            Some(m) if m < nu_min => Classification::TrulyModePositive,
            _ => Classification::TrulyPositive,
        }
    } else if all(&|s| s < -SLOPE_TOL) {
        let nu_min = pts[0].nu_p;
        match mode {
            Some(m) if m > nu_min => Classification::TrulyModeNegative,
            _ => Classification::TrulyNegative,
        }
    } else if all(&|s| s.abs() <= SLOPE_TOL) {
        Classification::Symmetric
    } else {
        // Name the first point that disagrees with the sign of the first slope.
        let first = slopes[0].unwrap_or(f64::NAN);
        let offending = pts
            .iter()
            .find(|pt| match pt.dnu_dp {
                Some(s) => !(s.signum() == first.signum() && s.abs() > SLOPE_TOL),
                None => true,
            })
            .map(|pt| pt.p);
        return (Classification::Indeterminate, offending);
    };
    (label.with_domain(full), None)
}

/// Solve the curve on `p_grid` and classify it, with Pearson's coefficients,
/// `ℓ` and the van Zwet check.
pub fn classify(dist: &Distribution, p_grid: &[f64], full_domain: bool) -> Result<SkewnessReport> {
    let curve = pmean_curve(dist, p_grid, full_domain)?;
    if curve.points.len() < MIN_GRID {
        return Err(Error::InvalidGrid(format!(
            "{} admissible grid points; at least {MIN_GRID} are needed",
            curve.points.len()
        )));
    }
    let (classification, offending_p) = classify_curve(&curve, dist.mode());
    Ok(SkewnessReport {
        pearson: pearson_coefficients(dist)?,
        curve,
        classification,
        offending_p,
        ell: magnitude_ell(dist),
        van_zwet: van_zwet(dist),
    })
}

fn h_ratio(dist: &Distribution, p: f64, nu1: f64) -> Result<f64> {
    let pt = with_derivative(dist, solve_pmean(dist, p)?)?;
    Ok(pt.dnu_dp.unwrap_or(f64::NAN) / (pt.nu_p - nu1))
}

/// `h(p) = (dν_p/dp)/(ν_p − ν1)` along `p = 4, 8, 16, …` (or halving the
/// distance to a finite `sup 𝒟`). The raw sequence and two Richardson columns
/// (for `h − ℓ ~ 1/p`) are tracked; the first whose last two entries agree
/// within [`ELL_CAUCHY`] gives the estimate. Exponentially convergent cases
/// such as the log-normal settle in the raw column, algebraic ones in the
/// extrapolated columns.
pub fn magnitude_ell(dist: &Distribution) -> EllEstimate {
    let mut est = EllEstimate {
        ell: None,
        diverged: false,
        bounded_support: dist.support().is_bounded(),
        samples: Vec::new(),
    };
    if est.bounded_support {
        return est;
    }
    let sup = dist.moment_domain().upper;
    let p_at = |k: usize| {
        if sup.is_finite() {
            sup - (sup - 1.0) * 0.5f64.powi(k as i32 + 1)
        } else {
            4.0 * 2f64.powi(k as i32)
        }
    };
    let max_k = if sup.is_finite() { 14 } else { 8 };
    let nu1 = match solve_pmean(dist, 1.0) {
        Ok(pt) => pt.nu_p,
        Err(_) => {
            est.diverged = true;
            return est;
        }
    };
    let settled = |col: &[f64]| match col {
        [.., a, b] => (b - a).abs() <= ELL_CAUCHY * b.abs().max(1e-2),
        _ => false,
    };
    let (mut raw, mut r1, mut r2) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..max_k {
        let p = p_at(k);
        match h_ratio(dist, p, nu1) {
            Ok(h) if h.is_finite() => est.samples.push((p, h)),
            _ => break,
        }
        raw.push(est.samples[k].1);
        if let [.., a, b] = raw[..] {
            r1.push(2.0 * b - a);
        }
        if let [.., a, b] = r1[..] {
            r2.push((4.0 * b - a) / 3.0);
        }
        for col in [&raw, &r1, &r2] {
            // At least the first four points are always used.
            if k >= 3 && settled(col) {
                est.ell = col.last().copied();
                return est;
            }
        }
    }
    est.diverged = true;
    est
}

fn scan_width(dist: &Distribution, center: f64) -> f64 {
    let left = center - dist.support().left;
    let right = dist.support().right - center;
    let w = left.max(right);
    if w.is_finite() {
        return w;
    }
    let lo = if left.is_finite() {
        left
    } else {
        center - dist.quantile(1e-12)
    };
    let hi = if right.is_finite() {
        right
    } else {
        dist.quantile(1.0 - 1e-12) - center
    };
    lo.max(hi)
}

/// `min_x 1 − F(ν1 − x) − F(ν1 + x)` over a grid of `(0, max(ν1−L, R−ν1))`,
/// half uniform, half geometric towards zero. Nonnegative exactly when the
/// right tail at the median dominates the left one.
pub fn van_zwet_margin(dist: &Distribution) -> Result<f64> {
    let nu1 = solve_pmean(dist, 1.0)?.nu_p;
    let w = scan_width(dist, nu1);
    let half = VAN_ZWET_GRID / 2;
    let lo = w * 1e-9;
    let xs = (1..=half)
        .map(|i| w * i as f64 / half as f64)
        .chain((0..half).map(|i| lo * (w / lo).powf(i as f64 / half as f64)));
    // (1 − F(ν1+x)) − F(ν1−x) keeps precision in the tails.
    Ok(xs
        .map(|x| dist.sf(nu1 + x) - dist.cdf(nu1 - x))
        .fold(f64::INFINITY, f64::min))
}

/// The van Zwet condition `F(ν1 − x) + F(ν1 + x) ≤ 1` on the scan grid, to
/// within `1e-9`; the direction under which mode ≤ median ≤ mean.
pub fn van_zwet(dist: &Distribution) -> bool {
    van_zwet_margin(dist).is_ok_and(|m| m >= -1e-9)
}
