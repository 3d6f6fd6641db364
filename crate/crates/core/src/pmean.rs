//! Fréchet p-means of a univariate distribution through the balance equation
//! `E[(X-a)_+^{p-1}] = E[(a-X)_+^{p-1}]`, the common tail mass `H_p`, and the
//! derivative `dν_p/dp`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, Side};
use crate::error::{Error, Result};
use crate::quad::{PowerIntegral, QuadOptions, Scaled, TailPoint, Term};
use crate::roots::{brent, Tolerance};

/// Target for `|G(ν_p)| / H_p`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Below this distance from `p = 1` the interior formula is refused.
pub const NEAR_ONE: f64 = 1e-3;
/// Step of the central finite-difference fallback.
pub const FD_STEP: f64 = 1e-4;
/// Tail mass cut that seeds the root bracket.
const BRACKET_TAIL: f64 = 1e-6;
const MAX_EXPANSIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    InteriorFormula,
    GeneralFormula,
    FiniteDifference,
}

impl DerivativeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DerivativeMethod::InteriorFormula => "interior_formula",
            DerivativeMethod::GeneralFormula => "general_formula",
            DerivativeMethod::FiniteDifference => "finite_difference",
        }
    }
}

/// One solved p-mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PMeanPoint {
    pub p: f64,
    pub nu_p: f64,
    /// Common tail mass; `inf` if it overflows (see `ln_h_p`).
    #[serde(rename = "H_p")]
    pub h_p: f64,
    pub ln_h_p: f64,
    pub dnu_dp: Option<f64>,
    /// `G(ν_p) / H_p`.
    pub residual: f64,
    pub method: Option<DerivativeMethod>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainUsed {
    Standard,
    FullDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PMeanCurve {
    pub points: Vec<PMeanPoint>,
    pub domain_used: DomainUsed,
    /// Grid values outside the admissible domain, dropped.
    pub dropped: Vec<f64>,
}

/// Which density factor sits under the power weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Weight {
    Pdf,
    Derivative,
}

fn opts() -> QuadOptions {
    QuadOptions::default()
}

/// `ln f` and (optionally) `d/dx ln f` at `a ± y`. `cut` is the distance
/// between the integral's upper limit and the support end on that side.
fn tail_term(dist: &Distribution, a: f64, side: Side, cut: f64, pt: &TailPoint, weight: Weight) -> Term {
    let end = dist.support().end(side);
    let (ln_f, x_for_slope, d_end) = if end.is_finite() {
        let (d, ln_d) = if cut == 0.0 {
            (pt.d, pt.ln_d)
        } else {
            let d = cut + pt.d;
            (d, d.ln())
        };
        (dist.ln_pdf_offset(side, d, ln_d), None, d)
    } else {
        let x = match side {
            Side::Right => a + pt.y,
            Side::Left => a - pt.y,
        };
        if x.is_finite() && x.abs() < 1e300 {
            (dist.ln_pdf(x), Some(x), f64::INFINITY)
        } else {
            // ln|a ± y| ≈ ln y this far out.
            (dist.ln_pdf_far(side, pt.ln_y), Some(x), f64::INFINITY)
        }
    };
    match weight {
        Weight::Pdf => Term::ln(ln_f),
        Weight::Derivative => {
            let slope = match x_for_slope {
                None => dist.log_pdf_slope_offset(side, d_end),
                Some(x) => dist.log_pdf_slope(x),
            };
            Term {
                ln_mag: ln_f,
                factor: slope.unwrap_or(f64::NAN),
            }
        }
    }
}

/// Distance from `a` to the support end on `side`.
pub fn tail_gap(dist: &Distribution, a: f64, side: Side) -> f64 {
    let end = dist.support().end(side);
    match side {
        Side::Right => end - a,
        Side::Left => a - end,
    }
}

#[allow(clippy::too_many_arguments)]
fn tail_power_integral_range(
    dist: &Distribution,
    a: f64,
    side: Side,
    q: f64,
    lower: f64,
    upper: f64,
    log_weight: bool,
    weight: Weight,
) -> Result<Scaled> {
    let end = dist.support().end(side);
    let gap = tail_gap(dist, a, side);
    let upper = upper.min(gap);
    if !(gap > 0.0) || !(upper > lower) {
        return Ok(Scaled::ZERO);
    }
    let reaches_end = upper == gap;
    let far_rate = if !reaches_end {
        1.0
    } else if end.is_finite() {
        let e = dist.edge_exponent(side);
        match weight {
            Weight::Pdf => e + 1.0,
            Weight::Derivative => {
                if e == 0.0 {
                    1.0
                } else {
                    e
                }
            }
        }
    } else {
        match dist.tail_index(side) {
            Some(beta) => match weight {
                Weight::Pdf => beta - q - 1.0,
                Weight::Derivative => beta - q,
            },
            None => 1.0,
        }
    };
    let cut = if end.is_finite() && !reaches_end {
        gap - upper
    } else {
        0.0
    };
    let mut integral = PowerIntegral::new(q, upper)
        .lower(lower)
        .log_weight(log_weight)
        .far_rate(far_rate);
    if !upper.is_finite() {
        integral = integral.split(dist.spread());
    }
    integral.eval(|pt| tail_term(dist, a, side, cut, pt, weight), opts())
}

fn tail_power_integral(
    dist: &Distribution,
    a: f64,
    side: Side,
    q: f64,
    log_weight: bool,
    weight: Weight,
) -> Result<Scaled> {
    tail_power_integral_range(dist, a, side, q, 0.0, f64::INFINITY, log_weight, weight)
}

/// `∫_0^{gap} y^q (ln y)^{[log_weight]} f(a ± y) dy` over the right (`+`) or
/// left (`-`) tail at `a`.
pub fn tail_integral(dist: &Distribution, a: f64, side: Side, q: f64, log_weight: bool) -> Result<Scaled> {
    tail_power_integral(dist, a, side, q, log_weight, Weight::Pdf)
}

/// `∫_lower^upper y^q f(a ± y) dy`, with `upper` clipped to the support.
pub fn tail_integral_range(dist: &Distribution, a: f64, side: Side, q: f64, lower: f64, upper: f64) -> Result<Scaled> {
    tail_power_integral_range(dist, a, side, q, lower, upper, false, Weight::Pdf)
}

/// Same as [`tail_integral`] with `f'` in place of `f`.
pub fn tail_derivative_integral(dist: &Distribution, a: f64, side: Side, q: f64, log_weight: bool) -> Result<Scaled> {
    if !dist.is_differentiable() {
        return Err(Error::NonDifferentiablePdf);
    }
    tail_power_integral(dist, a, side, q, log_weight, Weight::Derivative)
}

fn check_p(dist: &Distribution, p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidP(p));
    }
    if p >= 1.0 && !dist.moment_domain().contains(p) {
        return Err(Error::DivergentIntegral(format!(
            "E|X|^{} is infinite, so p = {p} lies outside the moment domain",
            p - 1.0
        )));
    }
    Ok(())
}

/// Right and left tail masses `∫ y^{p-1} f(a ± y) dy`.
fn tail_pair(dist: &Distribution, p: f64, a: f64) -> Result<(Scaled, Scaled)> {
    let right = tail_integral(dist, a, Side::Right, p - 1.0, false)?;
    let left = tail_integral(dist, a, Side::Left, p - 1.0, false)?;
    Ok((right, left))
}

/// `G(a) = ∫_0^{R-a} y^{p-1} f(a+y) dy − ∫_0^{a-L} y^{p-1} f(a-y) dy`.
///
/// Overflows to `±inf` only if the tail masses do; see [`relative_residual`]
/// for a scale-free version.
pub fn balance_residual(dist: &Distribution, p: f64, a: f64) -> Result<f64> {
    check_p(dist, p)?;
    if !dist.support().contains(a) {
        return Err(Error::InvalidParams(format!("a = {a} is outside the support")));
    }
    let (r, l) = tail_pair(dist, p, a)?;
    Ok(r.sub(&l).value())
}

/// `G(a) / ((R + L) / 2)`, in `[-2, 2]`.
pub fn relative_residual(dist: &Distribution, p: f64, a: f64) -> Result<f64> {
    let (r, l) = tail_pair(dist, p, a)?;
    let mean = r.add(&l).mul_f64(0.5);
    if mean.mantissa == 0.0 {
        return Err(Error::QuadratureFailure { value: 0.0, error: 0.0 });
    }
    Ok(r.sub(&l).ratio(&mean))
}

fn expand_bracket(dist: &Distribution, p: f64) -> Result<(f64, f64, f64, f64)> {
    let support = dist.support();
    let mut lo = dist.quantile(BRACKET_TAIL);
    let mut hi = dist.quantile(1.0 - BRACKET_TAIL);
    let width = (hi - lo).max(dist.spread());
    let g = |a: f64| relative_residual(dist, p, a);
    let mut g_lo = g(lo)?;
    let mut step = width;
    let mut k = 0;
    while g_lo <= 0.0 {
        k += 1;
        if k > MAX_EXPANSIONS {
            return Err(Error::NoBracket { p, lo, hi });
        }
        lo = if support.left.is_finite() {
            support.left + 0.5 * (lo - support.left)
        } else {
            lo - step
        };
        step *= 2.0;
        g_lo = g(lo)?;
    }
    let mut g_hi = g(hi)?;
    step = width;
    k = 0;
    while g_hi >= 0.0 {
        k += 1;
        if k > MAX_EXPANSIONS {
            return Err(Error::NoBracket { p, lo, hi });
        }
        hi = if support.right.is_finite() {
            support.right - 0.5 * (support.right - hi)
        } else {
            hi + step
        };
        step *= 2.0;
        g_hi = g(hi)?;
    }
    Ok((lo, hi, g_lo, g_hi))
}

/// Solve the balance equation for `ν_p`.
///
/// `p` may be anywhere in `(0, 1) ∪ 𝒟`; callers that want the standard domain
/// only should filter first.
pub fn solve_pmean(dist: &Distribution, p: f64) -> Result<PMeanPoint> {
    check_p(dist, p)?;
    let (lo, hi, g_lo, g_hi) = expand_bracket(dist, p)?;
    let tol = Tolerance {
        f_tol: 1e-14,
        ..Tolerance::default()
    };
    let root = brent(|a| relative_residual(dist, p, a), lo, hi, g_lo, g_hi, tol).map_err(|e| match e {
        Error::NoBracket { lo, hi, .. } => Error::NoBracket { p, lo, hi },
        other => other,
    })?;
    let nu = root.x;
    let (r, l) = tail_pair(dist, p, nu)?;
    let h = r.add(&l).mul_f64(0.5);
    let residual = r.sub(&l).ratio(&h);
    if residual.abs() > RESIDUAL_TOL {
        return Err(Error::QuadratureFailure {
            value: residual,
            error: RESIDUAL_TOL,
        });
    }
    Ok(PMeanPoint {
        p,
        nu_p: nu,
        h_p: h.value(),
        ln_h_p: h.ln_abs(),
        dnu_dp: None,
        residual,
        method: None,
    })
}

/// Numerator shared by both derivative formulas:
/// `∫ y^{p-1} ln y f(ν+y) dy − ∫ y^{p-1} ln y f(ν−y) dy`.
fn log_gap(dist: &Distribution, p: f64, nu: f64) -> Result<Scaled> {
    let r = tail_integral(dist, nu, Side::Right, p - 1.0, true)?;
    let l = tail_integral(dist, nu, Side::Left, p - 1.0, true)?;
    Ok(r.sub(&l))
}

/// `∫ y^{p-1} ln y` under the right tail minus the left tail, divided by `H_p`:
/// the gap between log-expectations of the two scaled tail densities.
pub fn log_expectation_gap(dist: &Distribution, pt: &PMeanPoint) -> Result<f64> {
    let n = log_gap(dist, pt.p, pt.nu_p)?;
    Ok(n.ratio(&Scaled::new(1.0, pt.ln_h_p)))
}

/// Derivative by the interior formula (valid for `p > 1` in the interior of 𝒟):
///
/// `dν/dp = N / ((p-1) [∫ y^{p-2} f(ν−y) dy + ∫ y^{p-2} f(ν+y) dy])`.
pub fn dnu_dp_interior(dist: &Distribution, pt: &PMeanPoint) -> Result<f64> {
    let p = pt.p;
    if !(p > 1.0) {
        return Err(Error::InvalidP(p));
    }
    if (p - 1.0).abs() < NEAR_ONE {
        return Err(Error::NearSingularP(p));
    }
    check_p(dist, p)?;
    let nu = pt.nu_p;
    let num = log_gap(dist, p, nu)?;
    let r = tail_integral(dist, nu, Side::Right, p - 2.0, false)?;
    let l = tail_integral(dist, nu, Side::Left, p - 2.0, false)?;
    let den = r.add(&l).mul_f64(p - 1.0);
    Ok(num.ratio(&den))
}

/// `lim |x − ν|^{p-1} f(x)` at a support end, in log form.
fn boundary_term(dist: &Distribution, side: Side, nu: f64, p: f64, ln_h: f64) -> Result<Scaled> {
    let end = dist.support().end(side);
    if end.is_finite() {
        let f_end = dist.boundary_pdf(side);
        if f_end == 0.0 {
            return Ok(Scaled::ZERO);
        }
        if f_end.is_infinite() {
            return Err(Error::DivergentIntegral(format!(
                "pdf diverges at the {} support end",
                if side == Side::Left { "left" } else { "right" }
            )));
        }
        let ln_gap = (end - nu).abs().ln();
        return Ok(Scaled::new(1.0, (p - 1.0) * ln_gap + f_end.ln()));
    }
    // Infinite end: march outwards and require the term to fall below 1e-6 H_p.
    let mut last = f64::INFINITY;
    let mut vanished = false;
    for k in 0..60 {
        let ln_dist = (2f64).ln() * k as f64 + dist.spread().ln() + 3.0;
        let ln_x = nu.abs().max(dist.spread()).ln().max(ln_dist);
        let v = (p - 1.0) * ln_dist + dist.ln_pdf_far(side, ln_x);
        if v - ln_h < (1e-6f64).ln() && v <= last {
            vanished = true;
            break;
        }
        last = v;
    }
    if vanished {
        Ok(Scaled::ZERO)
    } else {
        Err(Error::DivergentIntegral(
            "boundary term |x-ν|^{p-1} f(x) does not vanish at an infinite end".into(),
        ))
    }
}

/// Derivative by the general formula, valid on `(0, 1) ∪ 𝒟` for a
/// differentiable pdf:
///
/// `dν/dp = N / [(ν−L)^{p-1} f(L) + (R−ν)^{p-1} f(R) + ∫ y^{p-1} f'(ν−y) dy − ∫ y^{p-1} f'(ν+y) dy]`,
///
/// and at `p = 1` exactly `N / (2 f(ν_1))`.
pub fn dnu_dp_general(dist: &Distribution, pt: &PMeanPoint) -> Result<f64> {
    if !dist.is_differentiable() {
        return Err(Error::NonDifferentiablePdf);
    }
    let (p, nu) = (pt.p, pt.nu_p);
    check_p(dist, p)?;
    let num = log_gap(dist, p, nu)?;
    if p == 1.0 {
        let f = dist.pdf(nu);
        return Ok(num.value() / (2.0 * f));
    }
    let bl = boundary_term(dist, Side::Left, nu, p, pt.ln_h_p)?;
    let br = boundary_term(dist, Side::Right, nu, p, pt.ln_h_p)?;
    let dl = tail_derivative_integral(dist, nu, Side::Left, p - 1.0, false)?;
    let dr = tail_derivative_integral(dist, nu, Side::Right, p - 1.0, false)?;
    let den = bl.add(&br).add(&dl).sub(&dr);
    Ok(num.ratio(&den))
}

/// Central difference of `ν_p` with step [`FD_STEP`], one-sided where the
/// step would leave the admissible set.
pub fn dnu_dp_finite_difference(dist: &Distribution, p: f64) -> Result<f64> {
    let h = FD_STEP;
    let domain = dist.moment_domain();
    let ok = |q: f64| q > 0.0 && (q < 1.0 || domain.contains(q));
    let (a, b) = match (ok(p - h), ok(p + h)) {
        (true, true) => (p - h, p + h),
        (false, true) => (p, p + h),
        (true, false) => (p - h, p),
        (false, false) => return Err(Error::InvalidP(p)),
    };
    let na = solve_pmean(dist, a)?.nu_p;
    let nb = solve_pmean(dist, b)?.nu_p;
    Ok((nb - na) / (b - a))
}

/// Fill in `dnu_dp`: interior formula, then the general one, then finite
/// differences.
pub fn with_derivative(dist: &Distribution, mut pt: PMeanPoint) -> Result<PMeanPoint> {
    let mut last_err = None;
    for method in [
        DerivativeMethod::InteriorFormula,
        DerivativeMethod::GeneralFormula,
        DerivativeMethod::FiniteDifference,
    ] {
        let attempt = match method {
            DerivativeMethod::InteriorFormula => dnu_dp_interior(dist, &pt),
            DerivativeMethod::GeneralFormula => dnu_dp_general(dist, &pt),
            DerivativeMethod::FiniteDifference => dnu_dp_finite_difference(dist, pt.p),
        };
        match attempt {
            Ok(v) if v.is_finite() => {
                pt.dnu_dp = Some(v);
                pt.method = Some(method);
                return Ok(pt);
            }
            Ok(v) => {
                last_err = Some(Error::QuadratureFailure {
                    value: v,
                    error: f64::NAN,
                })
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Check that a grid is finite, positive and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Err(Error::InvalidGrid("grid values must be finite and positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `ν_p` and `dν_p/dp` along a grid. Points outside `𝒟` (or `(0,1) ∪ 𝒟` with
/// `full_domain`) are dropped and listed in `dropped`.
pub fn pmean_curve(dist: &Distribution, grid: &[f64], full_domain: bool) -> Result<PMeanCurve> {
    validate_grid(grid)?;
    let domain = dist.moment_domain();
    let (kept, dropped): (Vec<f64>, Vec<f64>) = grid.iter().partition(|&&p| {
        if full_domain {
            domain.contains_full(p)
        } else {
            domain.contains(p)
        }
    });
    if kept.is_empty() {
        return Err(Error::EmptyDomainIntersection);
    }
    let points = kept
        .par_iter()
        .map(|&p| solve_pmean(dist, p).and_then(|pt| with_derivative(dist, pt)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PMeanCurve {
        points,
        domain_used: if full_domain {
            DomainUsed::FullDomain
        } else {
            DomainUsed::Standard
        },
        dropped,
    })
}

/// `lim_{p↓0} ν_p`, by polynomial (Neville) extrapolation of `ν_p` to `p = 0`
/// through the points of `ps` (any order). The limit generally differs from
/// the mode.
pub fn limit_at_zero(dist: &Distribution, ps: &[f64]) -> Result<f64> {
    let mut ps = ps.to_vec();
    ps.sort_by(|a, b| a.total_cmp(b));
    validate_grid(&ps)?;
    let nus = ps
        .iter()
        .map(|&p| solve_pmean(dist, p).map(|pt| pt.nu_p))
        .collect::<Result<Vec<f64>>>()?;
    let mut t = nus;
    let n = ps.len();
    for k in 1..n {
        for i in 0..n - k {
            t[i] = (ps[i + k] * t[i] - ps[i] * t[i + 1]) / (ps[i + k] - ps[i]);
        }
    }
    Ok(t[0])
}
