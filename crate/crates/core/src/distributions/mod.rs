//! Continuous univariate distributions: the builtin families plus tabulated
//! custom densities, behind one [`Distribution`] type.

mod spec;
mod tabulated;

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::Distribution as _;
use serde::{Deserialize, Serialize};
use statrs::function::{beta as sbeta, gamma as sgamma};

use crate::special;

use crate::error::{Error, Result};

pub use spec::{DistributionSpec, Family, Interpolation, PdfGrid};
pub use tabulated::{Tabulated, RENORMALIZE_TOLERANCE};

/// Open support interval `(left, right)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub left: f64,
    pub right: f64,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        x > self.left && x < self.right
    }

    pub fn end(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.left.is_finite() && self.right.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// The set `{p ≥ 1 : E|X|^{p-1} < ∞}`, always of the form `[1, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentDomain {
    pub lower: f64,
    /// Exclusive supremum; `+inf` when every moment is finite.
    pub upper: f64,
}

impl MomentDomain {
    pub fn contains(&self, p: f64) -> bool {
        p >= self.lower && p < self.upper
    }

    /// `(0, 1) ∪ 𝒟`.
    pub fn contains_full(&self, p: f64) -> bool {
        (p > 0.0 && p < 1.0) || self.contains(p)
    }

    pub fn is_empty(&self) -> bool {
        self.upper <= self.lower
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Exponential { lambda: f64 },
    Gamma { alpha: f64, lambda: f64, ln_norm: f64 },
    Beta { alpha: f64, beta: f64, ln_norm: f64 },
    Lognormal { mu: f64, sigma2: f64, ln_norm: f64 },
    Pareto { alpha: f64 },
    Normal { mu: f64, sigma2: f64, ln_norm: f64 },
    Custom(Box<CustomInfo>),
}

#[derive(Debug, Clone)]
struct CustomInfo {
    table: Tabulated,
    mode: Option<f64>,
    /// Estimated supremum of finite absolute moments.
    q_star: f64,
}

/// Number of points in the unimodality scan of tabulated densities.
pub const MODE_SCAN_POINTS: usize = 1024;

/// An immutable, validated distribution.
#[derive(Debug, Clone)]
pub struct Distribution {
    spec: DistributionSpec,
    support: Support,
    kind: Kind,
    spread: f64,
    median: f64,
}

fn validate_params(spec: &DistributionSpec) -> Result<()> {
    let names = spec.family.param_names();
    if spec.family == Family::Custom {
        if !spec.params.is_empty() {
            return Err(Error::InvalidParams("custom distributions take no params".into()));
        }
        if spec.grid.is_none() {
            return Err(Error::InvalidParams("custom distribution requires a grid".into()));
        }
        return Ok(());
    }
    if spec.grid.is_some() || spec.interpolation.is_some() {
        return Err(Error::InvalidParams(format!(
            "{} does not take a grid or interpolation rule",
            spec.family.name()
        )));
    }
    for key in spec.params.keys() {
        if !names.contains(&key.as_str()) {
            return Err(Error::InvalidParams(format!(
                "unknown parameter `{key}` for {} (expected {})",
                spec.family.name(),
                names.join(", ")
            )));
        }
    }
    for name in names {
        match spec.params.get(*name) {
            None => {
                return Err(Error::InvalidParams(format!(
                    "missing parameter `{name}` for {}",
                    spec.family.name()
                )))
            }
            Some(v) if !v.is_finite() => {
                return Err(Error::InvalidParams(format!("parameter `{name}` must be finite")))
            }
            Some(v) if *name != "mu" && *v <= 0.0 => {
                return Err(Error::InvalidParams(format!(
                    "parameter `{name}` must be positive, got {v}"
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

fn unimodal_mode(table: &Tabulated) -> Option<f64> {
    let (a, b) = (table.left(), table.right());
    let vals: Vec<f64> = (0..MODE_SCAN_POINTS)
        .map(|i| table.pdf(a + (b - a) * i as f64 / (MODE_SCAN_POINTS - 1) as f64))
        .collect();
    // Collapse plateaus, then count strict local maxima.
    let mut runs: Vec<f64> = Vec::with_capacity(vals.len());
    for v in vals {
        if runs.last() != Some(&v) {
            runs.push(v);
        }
    }
    let peaks = (0..runs.len())
        .filter(|&i| {
            let left_lower = i == 0 || runs[i - 1] < runs[i];
            let right_lower = i + 1 == runs.len() || runs[i + 1] < runs[i];
            left_lower && right_lower
        })
        .count();
    if peaks != 1 {
        return None;
    }
    let (xs, fs) = (table.knots(), table.values());
    let mut best = 0;
    for i in 1..fs.len() {
        if fs[i] > fs[best] {
            best = i;
        }
    }
    Some(xs[best])
}

/// Slope of `ln f` against `ln |x|` over the outermost decade of the table,
/// if the tail looks like a power law there.
fn power_law_index(xs: &[f64], fs: &[f64]) -> Option<f64> {
    let x_end = xs.last().copied()?;
    if x_end <= 0.0 {
        return None;
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(fs)
        .filter(|(x, f)| **x >= x_end / 10.0 && **f > 0.0)
        .map(|(x, f)| (x.ln(), f.ln()))
        .collect();
    if pts.len() < 8 || pts[0].0 > (x_end / 10.0).ln() + 0.1 {
        return None;
    }
    let fit = |pts: &[(f64, f64)]| -> (f64, f64) {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = sxy / sxx;
        let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
        (slope, r2)
    };
    let (slope, r2) = fit(&pts);
    let half = pts.len() / 2;
    let (s1, _) = fit(&pts[..half]);
    let (s2, _) = fit(&pts[half..]);
    let consistent = (s1 - s2).abs() <= 0.05 * slope.abs().max(1e-12);
    if r2 >= 0.999 && consistent && slope < 0.0 {
        Some(-slope)
    } else {
        None
    }
}

fn custom_q_star(table: &Tabulated) -> f64 {
    let xs = table.knots();
    let fs = table.values();
    let mut q = f64::INFINITY;
    if let Some(beta) = power_law_index(xs, fs) {
        q = q.min(beta - 1.0);
    }
    let mx: Vec<f64> = xs.iter().rev().map(|x| -x).collect();
    let mf: Vec<f64> = fs.iter().rev().copied().collect();
    if let Some(beta) = power_law_index(&mx, &mf) {
        q = q.min(beta - 1.0);
    }
    q
}

impl Distribution {
    /// Validate a spec and build the distribution.
    pub fn new(spec: DistributionSpec) -> Result<Self> {
        validate_params(&spec)?;
        let inf = f64::INFINITY;
        let (kind, support) = match spec.family {
            Family::Exponential => (
                Kind::Exponential {
                    lambda: spec.param("lambda"),
                },
                Support { left: 0.0, right: inf },
            ),
            Family::Gamma => {
                let (alpha, lambda) = (spec.param("alpha"), spec.param("lambda"));
                let ln_norm = alpha * lambda.ln() - sgamma::ln_gamma(alpha);
                (
                    Kind::Gamma { alpha, lambda, ln_norm },
                    Support { left: 0.0, right: inf },
                )
            }
            Family::Beta => {
                let (alpha, beta) = (spec.param("alpha"), spec.param("beta"));
                let ln_norm = -sbeta::ln_beta(alpha, beta);
                (Kind::Beta { alpha, beta, ln_norm }, Support { left: 0.0, right: 1.0 })
            }
            Family::Lognormal => {
                let (mu, sigma2) = (spec.param("mu"), spec.param("sigma2"));
                let ln_norm = -0.5 * (2.0 * PI * sigma2).ln();
                (
                    Kind::Lognormal { mu, sigma2, ln_norm },
                    Support { left: 0.0, right: inf },
                )
            }
            Family::Pareto => (
                Kind::Pareto {
                    alpha: spec.param("alpha"),
                },
                Support { left: 1.0, right: inf },
            ),
            Family::Normal => {
                let (mu, sigma2) = (spec.param("mu"), spec.param("sigma2"));
                let ln_norm = -0.5 * (2.0 * PI * sigma2).ln();
                (Kind::Normal { mu, sigma2, ln_norm }, Support { left: -inf, right: inf })
            }
            Family::Custom => {
                let grid = spec.grid.as_ref().expect("validated");
                let table = Tabulated::new(&grid.x, &grid.f, spec.interpolation.unwrap_or_default())?;
                let support = Support {
                    left: table.left(),
                    right: table.right(),
                };
                let mode = unimodal_mode(&table);
                let q_star = custom_q_star(&table);
                (Kind::Custom(Box::new(CustomInfo { table, mode, q_star })), support)
            }
        };
        let mut dist = Distribution {
            spec,
            support,
            kind,
            spread: 1.0,
            median: 0.0,
        };
        dist.median = dist.quantile(0.5);
        let iqr = dist.quantile(0.75) - dist.quantile(0.25);
        dist.spread = if iqr > 0.0 && iqr.is_finite() { iqr } else { 1.0 };
        Ok(dist)
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Interquartile range; the natural length scale of the distribution.
    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    /// Whether `pdf` has a continuous derivative on the open support.
    pub fn is_differentiable(&self) -> bool {
        match &self.kind {
            Kind::Custom(c) => c.table.rule() == Interpolation::Pchip,
            _ => true,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Custom(c) => c.table.pdf(x),
            _ => self.ln_pdf(x).exp(),
        }
    }

    /// `ln f(x)`; `-inf` outside the support. At a finite endpoint this is the
    /// one-sided limit.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let Support { left, right } = self.support;
        if x.is_nan() || x < left || x > right {
            return f64::NEG_INFINITY;
        }
        if x == left && left.is_finite() {
            return self.boundary_pdf(Side::Left).ln();
        }
        if x == right && right.is_finite() {
            return self.boundary_pdf(Side::Right).ln();
        }
        match &self.kind {
            Kind::Exponential { lambda } => lambda.ln() - lambda * x,
            Kind::Gamma { alpha, lambda, ln_norm } => ln_norm + (alpha - 1.0) * x.ln() - lambda * x,
            Kind::Beta { alpha, beta, ln_norm } => ln_norm + (alpha - 1.0) * x.ln() + (beta - 1.0) * (-x).ln_1p(),
            Kind::Lognormal { mu, sigma2, ln_norm } => {
                let lx = x.ln();
                ln_norm - lx - (lx - mu).powi(2) / (2.0 * sigma2)
            }
            Kind::Pareto { alpha } => alpha.ln() - (alpha + 1.0) * x.ln(),
            Kind::Normal { mu, sigma2, ln_norm } => ln_norm - (x - mu).powi(2) / (2.0 * sigma2),
            Kind::Custom(c) => c.table.pdf(x).ln(),
        }
    }

    /// `ln f` at distance `d` inside a finite endpoint, with `ln_d = ln d`
    /// supplied exactly so that endpoint singularities survive underflow.
    pub fn ln_pdf_offset(&self, side: Side, d: f64, ln_d: f64) -> f64 {
        let end = self.support.end(side);
        debug_assert!(end.is_finite());
        if !(d >= 0.0) {
            return f64::NEG_INFINITY;
        }
        let width = self.support.right - self.support.left;
        if d > width {
            return f64::NEG_INFINITY;
        }
        match (&self.kind, side) {
            (Kind::Exponential { lambda }, Side::Left) => lambda.ln() - lambda * d,
            (Kind::Gamma { alpha, lambda, ln_norm }, Side::Left) => {
                if *alpha == 1.0 {
                    ln_norm - lambda * d
                } else {
                    ln_norm + (alpha - 1.0) * ln_d - lambda * d
                }
            }
            (Kind::Lognormal { mu, sigma2, ln_norm }, Side::Left) => {
                ln_norm - ln_d - (ln_d - mu).powi(2) / (2.0 * sigma2)
            }
            (Kind::Pareto { alpha }, Side::Left) => alpha.ln() - (alpha + 1.0) * d.ln_1p(),
            (Kind::Beta { alpha, beta, ln_norm }, side) => {
                let (a_near, a_far) = match side {
                    Side::Left => (alpha, beta),
                    Side::Right => (beta, alpha),
                };
                let near = if *a_near == 1.0 { 0.0 } else { (a_near - 1.0) * ln_d };
                let far = if *a_far == 1.0 {
                    0.0
                } else {
                    (a_far - 1.0) * (-d).ln_1p()
                };
                ln_norm + near + far
            }
            (Kind::Custom(c), side) => {
                let x = match side {
                    Side::Left => end + d,
                    Side::Right => end - d,
                };
                c.table.pdf(x).ln()
            }
            _ => {
                let x = match side {
                    Side::Left => end + d,
                    Side::Right => end - d,
                };
                self.ln_pdf(x)
            }
        }
    }

    /// `ln f(x)` for `|x| = e^{ln_abs_x}` far out in an infinite tail, where
    /// `x` itself may not be representable.
    pub fn ln_pdf_far(&self, side: Side, ln_abs_x: f64) -> f64 {
        match (&self.kind, side) {
            (Kind::Lognormal { mu, sigma2, ln_norm }, Side::Right) => {
                ln_norm - ln_abs_x - (ln_abs_x - mu).powi(2) / (2.0 * sigma2)
            }
            (Kind::Pareto { alpha }, Side::Right) => alpha.ln() - (alpha + 1.0) * ln_abs_x,
            _ => {
                let ax = ln_abs_x.exp();
                if !ax.is_finite() {
                    return f64::NEG_INFINITY;
                }
                match side {
                    Side::Left => self.ln_pdf(-ax),
                    Side::Right => self.ln_pdf(ax),
                }
            }
        }
    }

    /// `d/dx ln f(x)` at an interior point.
    pub fn log_pdf_slope(&self, x: f64) -> Result<f64> {
        Ok(match &self.kind {
            Kind::Exponential { lambda } => -lambda,
            Kind::Gamma { alpha, lambda, .. } => (alpha - 1.0) / x - lambda,
            Kind::Beta { alpha, beta, .. } => (alpha - 1.0) / x - (beta - 1.0) / (1.0 - x),
            Kind::Lognormal { mu, sigma2, .. } => (-1.0 - (x.ln() - mu) / sigma2) / x,
            Kind::Pareto { alpha } => -(alpha + 1.0) / x,
            Kind::Normal { mu, sigma2, .. } => -(x - mu) / sigma2,
            Kind::Custom(c) => {
                let d = c.table.derivative(x).ok_or(Error::NonDifferentiablePdf)?;
                d / c.table.pdf(x)
            }
        })
    }

    /// `d/dx ln f` at distance `d` inside a finite endpoint.
    pub fn log_pdf_slope_offset(&self, side: Side, d: f64) -> Result<f64> {
        let end = self.support.end(side);
        let x = match side {
            Side::Left => end + d,
            Side::Right => end - d,
        };
        Ok(match (&self.kind, side) {
            (Kind::Gamma { alpha, lambda, .. }, Side::Left) => (alpha - 1.0) / d - lambda,
            (Kind::Beta { alpha, beta, .. }, Side::Left) => (alpha - 1.0) / d - (beta - 1.0) / (1.0 - d),
            (Kind::Beta { alpha, beta, .. }, Side::Right) => (alpha - 1.0) / (1.0 - d) - (beta - 1.0) / d,
            (Kind::Lognormal { mu, sigma2, .. }, Side::Left) => (-1.0 - (d.ln() - mu) / sigma2) / d,
            _ => self.log_pdf_slope(x)?,
        })
    }

    /// `f'(x)`.
    pub fn pdf_derivative(&self, x: f64) -> Result<f64> {
        if let Kind::Custom(c) = &self.kind {
            return c.table.derivative(x).ok_or(Error::NonDifferentiablePdf);
        }
        let f = self.pdf(x);
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(f * self.log_pdf_slope(x)?)
    }

    /// Limit of the pdf at a support endpoint (`0` at infinite ends).
    pub fn boundary_pdf(&self, side: Side) -> f64 {
        if !self.support.end(side).is_finite() {
            return 0.0;
        }
        let power_edge = |a: f64, at_one: f64| {
            if a < 1.0 {
                f64::INFINITY
            } else if a == 1.0 {
                at_one
            } else {
                0.0
            }
        };
        match (&self.kind, side) {
            (Kind::Exponential { lambda }, _) => *lambda,
            (Kind::Gamma { alpha, lambda, .. }, _) => power_edge(*alpha, *lambda),
            (Kind::Beta { alpha, beta, .. }, Side::Left) => power_edge(*alpha, *beta),
            (Kind::Beta { alpha, beta, .. }, Side::Right) => power_edge(*beta, *alpha),
            (Kind::Lognormal { .. }, _) => 0.0,
            (Kind::Pareto { alpha }, _) => *alpha,
            (Kind::Custom(c), Side::Left) => c.table.values()[0],
            (Kind::Custom(c), Side::Right) => *c.table.values().last().unwrap(),
            (Kind::Normal { .. }, _) => 0.0,
        }
    }

    /// Exponent `e` with `f(x) ~ C·dist(x, end)^e` near a finite endpoint.
    pub fn edge_exponent(&self, side: Side) -> f64 {
        match (&self.kind, side) {
            (Kind::Gamma { alpha, .. }, Side::Left) => alpha - 1.0,
            (Kind::Beta { alpha, .. }, Side::Left) => alpha - 1.0,
            (Kind::Beta { beta, .. }, Side::Right) => beta - 1.0,
            _ => 0.0,
        }
    }

    /// Power-law index `β` of an infinite tail, `f(x) ~ C|x|^{-β}`; `None`
    /// for tails lighter than any power.
    pub fn tail_index(&self, side: Side) -> Option<f64> {
        match (&self.kind, side) {
            (Kind::Pareto { alpha }, Side::Right) => Some(alpha + 1.0),
            _ => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let Support { left, right } = self.support;
        if x <= left {
            return 0.0;
        }
        if x >= right {
            return 1.0;
        }
        match &self.kind {
            Kind::Exponential { lambda } => -(-lambda * x).exp_m1(),
            Kind::Gamma { alpha, lambda, .. } => special::gamma_p(*alpha, lambda * x),
            Kind::Beta { alpha, beta, .. } => special::beta_i(*alpha, *beta, x),
            Kind::Lognormal { mu, sigma2, .. } => 0.5 * libm::erfc(-(x.ln() - mu) / (2.0 * sigma2).sqrt()),
            Kind::Pareto { alpha } => -(-alpha * x.ln()).exp_m1(),
            Kind::Normal { mu, sigma2, .. } => 0.5 * libm::erfc(-(x - mu) / (2.0 * sigma2).sqrt()),
            Kind::Custom(c) => c.table.cdf(x),
        }
    }

    /// Survival function `1 - F(x)`, accurate in the right tail.
    pub fn sf(&self, x: f64) -> f64 {
        let Support { left, right } = self.support;
        if x <= left {
            return 1.0;
        }
        if x >= right {
            return 0.0;
        }
        match &self.kind {
            Kind::Exponential { lambda } => (-lambda * x).exp(),
            Kind::Gamma { alpha, lambda, .. } => special::gamma_q(*alpha, lambda * x),
            Kind::Beta { alpha, beta, .. } => special::beta_i_complement(*alpha, *beta, x),
            Kind::Lognormal { mu, sigma2, .. } => 0.5 * libm::erfc((x.ln() - mu) / (2.0 * sigma2).sqrt()),
            Kind::Pareto { alpha } => (-alpha * x.ln()).exp(),
            Kind::Normal { mu, sigma2, .. } => 0.5 * libm::erfc((x - mu) / (2.0 * sigma2).sqrt()),
            Kind::Custom(c) => 1.0 - c.table.cdf(x),
        }
    }

    /// Inverse cdf for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return self.support.left;
        }
        if !(u < 1.0) {
            return self.support.right;
        }
        match &self.kind {
            Kind::Exponential { lambda } => return -(-u).ln_1p() / lambda,
            Kind::Pareto { alpha } => return (-(-u).ln_1p() / alpha).exp(),
            _ => {}
        }
        // Bisection on whichever of cdf / sf is accurate at this level.
        let upper_half = u > 0.5;
        let below = |x: f64| {
            if upper_half {
                self.sf(x) > 1.0 - u
            } else {
                self.cdf(x) < u
            }
        };
        let Support { left, right } = self.support;
        let mut lo = left;
        let mut hi = right;
        if !lo.is_finite() || !hi.is_finite() {
            let anchor = if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
            let mut step = 1.0;
            if !lo.is_finite() {
                lo = anchor.min(0.0) - step;
                while !below(lo) && lo > -1e300 {
                    step *= 2.0;
                    lo = anchor.min(0.0) - step;
                }
            }
            step = 1.0;
            if !hi.is_finite() {
                hi = anchor.max(0.0) + step;
                while below(hi) && hi < 1e300 {
                    step *= 2.0;
                    hi = anchor.max(0.0) + step;
                }
            }
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Whether `E|X|^q < ∞`.
    pub fn moment_exists(&self, q: f64) -> bool {
        q >= 0.0 && q < self.moment_domain().upper - 1.0
    }

    /// `𝒟 = {p ≥ 1 : E|X|^{p-1} < ∞} = [1, upper)`.
    pub fn moment_domain(&self) -> MomentDomain {
        let upper = match &self.kind {
            Kind::Pareto { alpha } => alpha + 1.0,
            Kind::Custom(c) => c.q_star + 1.0,
            _ => f64::INFINITY,
        };
        MomentDomain { lower: 1.0, upper }
    }

    /// The mode `ν0`, or `None` when the density is not unimodal.
    pub fn mode(&self) -> Option<f64> {
        match &self.kind {
            Kind::Exponential { .. } => Some(0.0),
            Kind::Gamma { alpha, lambda, .. } => Some(if *alpha > 1.0 { (alpha - 1.0) / lambda } else { 0.0 }),
            Kind::Beta { alpha, beta, .. } => {
                let (a, b) = (*alpha, *beta);
                if a > 1.0 && b > 1.0 {
                    Some((a - 1.0) / (a + b - 2.0))
                } else if a <= 1.0 && b > 1.0 {
                    Some(0.0)
                } else if a > 1.0 && b <= 1.0 {
                    Some(1.0)
                } else {
                    // U-shaped or flat: no unique maximum.
                    None
                }
            }
            Kind::Lognormal { mu, sigma2, .. } => Some((mu - sigma2).exp()),
            Kind::Pareto { .. } => Some(1.0),
            Kind::Normal { mu, .. } => Some(*mu),
            Kind::Custom(c) => c.mode,
        }
    }

    /// Closed-form p-mean where one is known: log-normal for every `p > 0`,
    /// and the center of the normal by symmetry.
    pub fn closed_form_pmean(&self, p: f64) -> Option<f64> {
        if !(p > 0.0) {
            return None;
        }
        match &self.kind {
            Kind::Lognormal { mu, sigma2, .. } => Some((mu + 0.5 * (p - 1.0) * sigma2).exp()),
            Kind::Normal { mu, .. } => Some(*mu),
            _ => None,
        }
    }

    /// Draw `n` variates.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match &self.kind {
            Kind::Exponential { lambda } => {
                let d = rand_distr::Exp::new(*lambda).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Kind::Gamma { alpha, lambda, .. } => {
                let d = rand_distr::Gamma::new(*alpha, 1.0 / lambda).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Kind::Beta { alpha, beta, .. } => {
                let d = rand_distr::Beta::new(*alpha, *beta).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Kind::Lognormal { mu, sigma2, .. } => {
                let d = rand_distr::LogNormal::new(*mu, sigma2.sqrt()).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Kind::Pareto { alpha } => {
                let d = rand_distr::Pareto::new(1.0, *alpha).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Kind::Normal { mu, sigma2, .. } => {
                let d = rand_distr::Normal::new(*mu, sigma2.sqrt()).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Kind::Custom(_) => (0..n).map(|_| self.quantile(rng.gen::<f64>())).collect(),
        }
    }
}

/// Tabulate the mirror image `x ↦ f(-x)` of a distribution supported on
/// `(0, ∞)` or `(0, R)` over `[-upper, 0]` with `n` points, graded towards the
/// origin. Useful as a negatively skewed control.
pub fn mirrored_table(dist: &Distribution, upper: f64, n: usize) -> DistributionSpec {
    let mut x = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let t = i as f64 / (n - 1) as f64;
        let y = upper * t * t;
        x.push(-y);
        f.push(dist.pdf(y));
    }
    DistributionSpec::custom(x, f)
}

/// Natural log of 2, re-exported for callers building thresholds.
pub const LN2: f64 = LN_2;
