//! Tail densities at `ν_p` and the criteria for strict stochastic dominance of
//! the right tail over the left one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, Side};
use crate::error::{Error, Result};
use crate::pmean::{solve_pmean, tail_gap, tail_integral, tail_integral_range, PMeanPoint};
use crate::quad::Scaled;

/// Default number of grid points for cdf comparisons and crossing scans.
pub const DEFAULT_GRID: usize = 2048;
/// Points in the monotonicity scans of the pdf and its log-slope.
pub const SHAPE_GRID: usize = 1024;
/// Largest tolerated `|Δ|` that still counts as equality.
pub const EQUAL_TOL: f64 = 1e-9;
/// Smallest `max Δ` accepted as strict.
pub const STRICT_GAP: f64 = 1e-6;
/// Right-tail mass left out by truncating an infinite tail.
pub const TRUNCATION_MASS: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    RightDominatesStrictly,
    LeftDominatesStrictly,
    Equal,
    CrossingDetected,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::RightDominatesStrictly => "right_dominates_strictly",
            Verdict::LeftDominatesStrictly => "left_dominates_strictly",
            Verdict::Equal => "equal",
            Verdict::CrossingDetected => "crossing_detected",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// The scaled tail densities `y^{p-1} f(ν ∓ y) / H_p`.
#[derive(Debug, Clone)]
pub struct TailPair<'a> {
    dist: &'a Distribution,
    pub p: f64,
    pub nu_p: f64,
    pub h_p: f64,
    pub ln_h_p: f64,
    /// Left and right tail masses divided by `H_p` (both 1 up to quadrature error).
    pub left_mass: f64,
    pub right_mass: f64,
}

/// Build the tail densities at a solved point, cross-checking that both tails
/// carry the same mass.
pub fn build_tail_pair<'a>(dist: &'a Distribution, pt: &PMeanPoint) -> Result<TailPair<'a>> {
    let q = pt.p - 1.0;
    let r = tail_integral(dist, pt.nu_p, Side::Right, q, false)?;
    let l = tail_integral(dist, pt.nu_p, Side::Left, q, false)?;
    let h = r.add(&l).mul_f64(0.5);
    let (right, left) = (r.ratio(&h), l.ratio(&h));
    if (right - left).abs() > NORMALIZATION_TOL {
        return Err(Error::NormalizationMismatch { left, right });
    }
    Ok(TailPair {
        dist,
        p: pt.p,
        nu_p: pt.nu_p,
        h_p: h.value(),
        ln_h_p: h.ln_abs(),
        left_mass: left,
        right_mass: right,
    })
}

impl TailPair<'_> {
    fn density(&self, side: Side, y: f64) -> f64 {
        if !(y > 0.0) || y > tail_gap(self.dist, self.nu_p, side) {
            return 0.0;
        }
        let x = match side {
            Side::Left => self.nu_p - y,
            Side::Right => self.nu_p + y,
        };
        ((self.p - 1.0) * y.ln() + self.dist.ln_pdf(x) - self.ln_h_p).exp()
    }

    pub fn left_density(&self, y: f64) -> f64 {
        self.density(Side::Left, y)
    }

    pub fn right_density(&self, y: f64) -> f64 {
        self.density(Side::Right, y)
    }

    fn mass(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left_mass,
            Side::Right => self.right_mass,
        }
    }

    fn cdf(&self, side: Side, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Ok(0.0);
        }
        if y >= tail_gap(self.dist, self.nu_p, side) {
            return Ok(1.0);
        }
        let h = Scaled::new(1.0, self.ln_h_p);
        // Integrate whichever piece is lighter.
        let head = tail_integral_range(self.dist, self.nu_p, side, self.p - 1.0, 0.0, y)?.ratio(&h);
        let mass = self.mass(side);
        let v = if head < 0.5 {
            head
        } else {
            mass - self.survival(side, y)?
        };
        Ok((v / mass).clamp(0.0, 1.0))
    }

    /// The cdf of one side at every point of an increasing grid, accumulated
    /// from integrals between neighbouring points.
    fn cdf_grid(&self, side: Side, ys: &[f64]) -> Result<Vec<f64>> {
        let gap = tail_gap(self.dist, self.nu_p, side);
        let h = Scaled::new(1.0, self.ln_h_p);
        let q = self.p - 1.0;
        let pieces = (0..ys.len())
            .into_par_iter()
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { ys[i - 1] };
                if lo >= gap {
                    return Ok(0.0);
                }
                Ok(tail_integral_range(self.dist, self.nu_p, side, q, lo, ys[i].min(gap))?.ratio(&h))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mass = self.mass(side);
        let mut acc = 0.0;
        Ok(pieces
            .iter()
            .zip(ys)
            .map(|(piece, &y)| {
                acc += piece;
                if y >= gap {
                    1.0
                } else {
                    (acc / mass).clamp(0.0, 1.0)
                }
            })
            .collect())
    }

    pub fn left_cdf(&self, y: f64) -> Result<f64> {
        self.cdf(Side::Left, y)
    }

    pub fn right_cdf(&self, y: f64) -> Result<f64> {
        self.cdf(Side::Right, y)
    }

    /// Mass of one tail density beyond `y`.
    fn survival(&self, side: Side, y: f64) -> Result<f64> {
        let h = Scaled::new(1.0, self.ln_h_p);
        Ok(tail_integral_range(self.dist, self.nu_p, side, self.p - 1.0, y, f64::INFINITY)?.ratio(&h))
    }

    /// Where the comparison grid stops: the larger finite gap, or the point
    /// beyond which an infinite tail holds less than [`TRUNCATION_MASS`].
    fn horizon(&self) -> Result<f64> {
        let mut horizon: f64 = 0.0;
        for side in [Side::Left, Side::Right] {
            let gap = tail_gap(self.dist, self.nu_p, side);
            if gap.is_finite() {
                horizon = horizon.max(gap);
                continue;
            }
            let mut t = self.dist.spread().max(self.nu_p.abs() * 1e-3);
            let mut found = false;
            for _ in 0..200 {
                if self.survival(side, t)? < TRUNCATION_MASS {
                    found = true;
                    break;
                }
                t *= 1.5;
            }
            if !found {
                return Err(Error::DivergentIntegral("tail mass does not decay".into()));
            }
            horizon = horizon.max(t);
        }
        Ok(horizon)
    }
}

/// Result of the direct cdf comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfOutcome {
    pub verdict: Verdict,
    /// `min Δ` with `Δ = left_cdf − right_cdf`.
    pub min_gap: f64,
    pub max_gap: f64,
    pub grid_size: usize,
    /// Truncation point of the grid.
    pub horizon: f64,
}

fn comparison_grid(tp: &TailPair, horizon: f64, n: usize) -> Vec<f64> {
    let mut ys = Vec::with_capacity(n + 8);
    let geo = n / 2;
    let uni = n / 4;
    let ends = n - geo - uni;
    let lo = horizon * 1e-12;
    for i in 0..geo {
        ys.push(lo * (horizon / lo).powf(i as f64 / (geo - 1) as f64));
    }
    for i in 1..=uni {
        ys.push(horizon * i as f64 / uni as f64);
    }
    let finite_gaps: Vec<f64> = [Side::Left, Side::Right]
        .iter()
        .map(|s| tail_gap(tp.dist, tp.nu_p, *s))
        .filter(|g| g.is_finite())
        .collect();
    if !finite_gaps.is_empty() {
        let per = ends / finite_gaps.len();
        for g in &finite_gaps {
            for i in 0..per {
                let off = g * 1e-12 * (1e12f64).powf(i as f64 / per.max(2) as f64 - 1e-9);
                ys.push(g - off);
            }
        }
    } else {
        for i in 0..ends {
            ys.push(horizon * (i as f64 + 0.5) / ends as f64);
        }
    }
    ys.retain(|y| *y > 0.0 && *y <= horizon);
    ys.sort_by(|a, b| a.total_cmp(b));
    ys.dedup();
    ys
}

/// Classify `Δ = left_cdf − right_cdf` over a grid.
pub fn classify_gaps(min_gap: f64, max_gap: f64) -> Verdict {
    if min_gap >= -EQUAL_TOL && max_gap <= EQUAL_TOL {
        Verdict::Equal
    } else if min_gap >= -EQUAL_TOL && max_gap > STRICT_GAP {
        Verdict::RightDominatesStrictly
    } else if max_gap <= EQUAL_TOL && min_gap < -STRICT_GAP {
        Verdict::LeftDominatesStrictly
    } else if min_gap < -EQUAL_TOL && max_gap > EQUAL_TOL {
        Verdict::CrossingDetected
    } else {
        Verdict::Inconclusive
    }
}

/// Compare the two tail cdfs on a grid of `grid_size` points (≥ 64).
pub fn cdf_dominance(tp: &TailPair, grid_size: usize) -> Result<CdfOutcome> {
    if grid_size < 64 {
        return Err(Error::InvalidGrid(format!("grid_size {grid_size} is below 64")));
    }
    let horizon = tp.horizon()?;
    let ys = comparison_grid(tp, horizon, grid_size);
    let left = tp.cdf_grid(Side::Left, &ys)?;
    let right = tp.cdf_grid(Side::Right, &ys)?;
    let gaps: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l - r).collect();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let max_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CdfOutcome {
        verdict: classify_gaps(min_gap, max_gap),
        min_gap,
        max_gap,
        grid_size: ys.len(),
        horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingStatus {
    /// `r > 0` on `(0, c)`, `r < 0` after, and `ν−L ≤ R−ν`: right dominates.
    Satisfied,
    /// The mirror image: `r < 0` then `r > 0`, and `R−ν ≤ ν−L`: left dominates.
    SatisfiedMirrored,
    /// A single crossing, but the side condition fails; the criterion does not apply.
    SideConditionFails,
    NoCrossing,
    MultipleCrossings,
    NotUnimodal,
}

impl CrossingStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CrossingStatus::Satisfied => "satisfied",
            CrossingStatus::SatisfiedMirrored => "satisfied_mirrored",
            CrossingStatus::SideConditionFails => "side_condition_fails",
            CrossingStatus::NoCrossing => "no_crossing",
            CrossingStatus::MultipleCrossings => "multiple_crossings",
            CrossingStatus::NotUnimodal => "not_unimodal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingOutcome {
    pub status: CrossingStatus,
    pub c: Option<f64>,
}

/// Scan `r(x) = f(ν−x) − f(ν+x)` on `(0, min(ν−L, R−ν))` for a single sign
/// change.
pub fn single_crossing(dist: &Distribution, pt: &PMeanPoint) -> CrossingOutcome {
    single_crossing_with(dist, pt, DEFAULT_GRID)
}

pub fn single_crossing_with(dist: &Distribution, pt: &PMeanPoint, n: usize) -> CrossingOutcome {
    if dist.mode().is_none() {
        return CrossingOutcome {
            status: CrossingStatus::NotUnimodal,
            c: None,
        };
    }
    let nu = pt.nu_p;
    let left_gap = tail_gap(dist, nu, Side::Left);
    let right_gap = tail_gap(dist, nu, Side::Right);
    let mut w = left_gap.min(right_gap);
    if !w.is_finite() {
        // Both tails infinite: scan out to where the pdf is negligible.
        w = (dist.quantile(1.0 - 1e-12) - nu).max(nu - dist.quantile(1e-12));
    }
    let r = |x: f64| dist.pdf(nu - x) - dist.pdf(nu + x);
    let scale = dist.pdf(nu).max(dist.pdf(dist.mode().unwrap_or(nu)));
    let zero = 1e-12 * scale;
    let mut signs: Vec<(f64, i8)> = Vec::with_capacity(n);
    for i in 1..n {
        let x = w * i as f64 / n as f64;
        let v = r(x);
        if v.is_nan() {
            continue;
        }
        let s = if v > zero {
            1
        } else if v < -zero {
            -1
        } else {
            0
        };
        if s != 0 {
            signs.push((x, s));
        }
    }
    let changes: Vec<usize> = (1..signs.len()).filter(|&i| signs[i].1 != signs[i - 1].1).collect();
    match changes.len() {
        0 => CrossingOutcome {
            status: CrossingStatus::NoCrossing,
            c: None,
        },
        1 => {
            let i = changes[0];
            let (mut a, first) = signs[i - 1];
            let (mut b, _) = signs[i];
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if (r(m) > 0.0) == (first > 0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            let c = 0.5 * (a + b);
            let status = if first > 0 && left_gap <= right_gap {
                CrossingStatus::Satisfied
            } else if first < 0 && right_gap <= left_gap {
                CrossingStatus::SatisfiedMirrored
            } else {
                CrossingStatus::SideConditionFails
            };
            CrossingOutcome { status, c: Some(c) }
        }
        _ => CrossingOutcome {
            status: CrossingStatus::MultipleCrossings,
            c: None,
        },
    }
}

fn shape_grid(dist: &Distribution) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..SHAPE_GRID)
        .map(|i| dist.quantile((i as f64 + 0.5) / SHAPE_GRID as f64))
        .filter(|x| dist.support().contains(*x))
        .collect();
    xs.dedup();
    xs
}

/// Whether the pdf is nonincreasing on the support (1024 quantile points,
/// at least one strict decrease).
pub fn decreasing_pdf(dist: &Distribution) -> bool {
    let fs: Vec<f64> = shape_grid(dist).iter().map(|&x| dist.pdf(x)).collect();
    let mut strict = false;
    for w in fs.windows(2) {
        if w[1] > w[0] * (1.0 + 1e-12) {
            return false;
        }
        if w[1] < w[0] {
            strict = true;
        }
    }
    strict
}

/// Whether `d/dx ln f` is nonincreasing on 1024 interior quantile points.
pub fn log_concavity(dist: &Distribution) -> Result<bool> {
    if !dist.is_differentiable() {
        return Err(Error::NonDifferentiablePdf);
    }
    let slopes = shape_grid(dist)
        .iter()
        .map(|&x| dist.log_pdf_slope(x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(slopes.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub cdf_gap: Verdict,
    pub single_crossing: CrossingStatus,
    pub decreasing_pdf: bool,
    /// `None` when the pdf is not differentiable.
    pub log_concave: Option<bool>,
}

/// All dominance criteria at one `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub p: f64,
    pub verdict: Verdict,
    pub criteria: Criteria,
    pub c: Option<f64>,
    pub min_cdf_gap: f64,
}

/// Solve for `ν_p` and run every criterion.
pub fn dominance_report(dist: &Distribution, p: f64, grid_size: usize) -> Result<DominanceReport> {
    let pt = solve_pmean(dist, p)?;
    dominance_report_at(dist, &pt, grid_size)
}

pub fn dominance_report_at(dist: &Distribution, pt: &PMeanPoint, grid_size: usize) -> Result<DominanceReport> {
    let tp = build_tail_pair(dist, pt)?;
    let cdf = cdf_dominance(&tp, grid_size)?;
    let crossing = single_crossing(dist, pt);
    let log_concave = match log_concavity(dist) {
        Ok(v) => Some(v),
        Err(Error::NonDifferentiablePdf) => None,
        Err(e) => return Err(e),
    };
    Ok(DominanceReport {
        p: pt.p,
        verdict: cdf.verdict,
        criteria: Criteria {
            cdf_gap: cdf.verdict,
            single_crossing: crossing.status,
            decreasing_pdf: decreasing_pdf(dist),
            log_concave,
        },
        c: crossing.c,
        min_cdf_gap: cdf.min_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    fn dist(spec: DistributionSpec) -> Distribution {
        Distribution::new(spec).unwrap()
    }

    #[test]
    fn exponential_median_tails() {
        let e = dist(DistributionSpec::exponential(1.0));
        let pt = solve_pmean(&e, 1.0).unwrap();
        let tp = build_tail_pair(&e, &pt).unwrap();
        assert!((tp.h_p - 0.5).abs() < 1e-12);
        let ln2 = std::f64::consts::LN_2;
        for &y in &[0.1, 0.5] {
            assert!((tp.left_density(y) - (-(ln2 - y)).exp() / 0.5).abs() < 1e-10);
            assert!((tp.right_density(y) - (-(ln2 + y)).exp() / 0.5).abs() < 1e-10);
        }
        // Left cdf: (e^{y} − 1) e^{−ln 2} / (1/2) = e^{y} − 1.
        assert!((tp.left_cdf(0.3).unwrap() - (0.3f64.exp() - 1.0)).abs() < 1e-10);
        assert!((tp.right_cdf(0.3).unwrap() - (1.0 - (-0.3f64).exp())).abs() < 1e-10);
        let out = cdf_dominance(&tp, 256).unwrap();
        assert_eq!(out.verdict, Verdict::RightDominatesStrictly);
    }

    #[test]
    fn normal_is_equal() {
        let n = dist(DistributionSpec::normal(0.0, 1.0));
        let pt = solve_pmean(&n, 2.0).unwrap();
        let tp = build_tail_pair(&n, &pt).unwrap();
        for &y in &[0.01, 0.7, 2.5] {
            assert!((tp.left_density(y) - tp.right_density(y)).abs() < 1e-9);
        }
        assert_eq!(cdf_dominance(&tp, 256).unwrap().verdict, Verdict::Equal);
        assert_eq!(single_crossing(&n, &pt).status, CrossingStatus::NoCrossing);
    }

    #[test]
    fn small_grid_rejected() {
        let e = dist(DistributionSpec::exponential(1.0));
        let pt = solve_pmean(&e, 2.0).unwrap();
        let tp = build_tail_pair(&e, &pt).unwrap();
        assert!(matches!(cdf_dominance(&tp, 63), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn mismatched_point_detected() {
        let e = dist(DistributionSpec::exponential(1.0));
        let mut pt = solve_pmean(&e, 2.0).unwrap();
        pt.nu_p += 0.01;
        assert!(matches!(
            build_tail_pair(&e, &pt),
            Err(Error::NormalizationMismatch { .. })
        ));
    }

    #[test]
    fn shape_checks() {
        assert!(decreasing_pdf(&dist(DistributionSpec::exponential(1.0))));
        assert!(decreasing_pdf(&dist(DistributionSpec::gamma(0.5, 1.0))));
        assert!(!decreasing_pdf(&dist(DistributionSpec::beta(2.0, 5.0))));
        assert!(log_concavity(&dist(DistributionSpec::gamma(2.0, 1.0))).unwrap());
        assert!(log_concavity(&dist(DistributionSpec::beta(2.0, 5.0))).unwrap());
        assert!(!log_concavity(&dist(DistributionSpec::lognormal(0.0, 1.0))).unwrap());
    }
}
