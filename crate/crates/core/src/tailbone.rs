//! Sample Fréchet p-means in ℝᵈ under the Euclidean norm, the trajectory
//! `p ↦ ν_p` ("tailbone") and its limiting direction `ζ`.
//!
//! All sums over sample points are reduced in fixed-size chunks whose partial
//! results are combined in index order, so results do not depend on the
//! thread count.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};

const CHUNK: usize = 4096;
pub const MAX_ITER: usize = 500;
const WEISZFELD_MAX_ITER: usize = 20_000;
/// Stop when a step is shorter than this, relative to the data scale.
pub const STEP_TOL: f64 = 1e-10;
/// Stop when `‖∇F‖ < GRAD_TOL (1 + F)`.
pub const GRAD_TOL: f64 = 1e-9;
/// Relative decrease of `F` too small to see through rounding.
const UNRESOLVED_DECREASE: f64 = 1e-10;
/// Angular agreement required between the last two secants for `ζ`.
pub const ZETA_ANGLE_TOL: f64 = 1e-2;

/// `n` points in ℝᵈ stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    d: usize,
    data: Vec<f64>,
}

impl SampleSet {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidSamples("points have different dimensions".into()));
        }
        Self::from_flat(d, points.concat())
    }

    pub fn from_flat(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 || data.is_empty() {
            return Err(Error::InvalidSamples("sample set is empty".into()));
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::InvalidSamples(format!(
                "{} values do not split into rows of {d}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSamples(format!(
                "non-finite component in point {}",
                i / d
            )));
        }
        Ok(SampleSet { d, data })
    }

    /// Zip equally long coordinate columns into points.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidSamples("columns differ in length".into()));
        }
        let data = (0..n).flat_map(|i| columns.iter().map(move |c| c[i])).collect();
        Self::from_flat(columns.len(), data)
    }

    /// `n` independent draws of a vector with the given independent marginals.
    pub fn product(marginals: &[&Distribution], n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let columns: Vec<Vec<f64>> = marginals.iter().map(|m| m.sample(&mut rng, n)).collect();
        Self::from_columns(&columns)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    fn resample<R: Rng>(&self, rng: &mut R) -> SampleSet {
        let n = self.len();
        let mut data = Vec::with_capacity(self.data.len());
        for _ in 0..n {
            data.extend_from_slice(self.point(rng.gen_range(0..n)));
        }
        SampleSet { d: self.d, data }
    }

    /// Apply `x ↦ Q x + b`.
    pub fn transform(&self, q: &DMatrix<f64>, b: &[f64]) -> SampleSet {
        let bv = DVector::from_column_slice(b);
        let data = self
            .points()
            .flat_map(|x| {
                (q * DVector::from_column_slice(x) + &bv)
                    .iter()
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect();
        SampleSet { d: self.d, data }
    }

    /// Reduce `f` over chunks of points and add the partials in order.
    fn reduce<A, F, G>(&self, init: A, f: F, combine: G) -> A
    where
        A: Clone + Send + Sync,
        F: Fn(&mut A, &[f64]) + Sync,
        G: Fn(&mut A, &A),
    {
        let partials: Vec<A> = self
            .data
            .par_chunks(CHUNK * self.d)
            .map(|chunk| {
                let mut acc = init.clone();
                for x in chunk.chunks_exact(self.d) {
                    f(&mut acc, x);
                }
                acc
            })
            .collect();
        let mut total = init;
        for p in &partials {
            combine(&mut total, p);
        }
        total
    }

    pub fn mean(&self) -> Vec<f64> {
        let d = self.d;
        let sum = self.reduce(
            vec![0.0; d],
            |acc, x| acc.iter_mut().zip(x).for_each(|(a, v)| *a += v),
            |t, p| t.iter_mut().zip(p).for_each(|(a, v)| *a += v),
        );
        let n = self.len() as f64;
        sum.into_iter().map(|s| s / n).collect()
    }

    fn max_distance(&self, a: &[f64]) -> f64 {
        self.reduce(0.0f64, |m, x| *m = m.max(dist(x, a)), |t, p| *t = t.max(*p))
    }

    /// Root mean square distance from the mean; fixes the step tolerance scale.
    fn spread(&self) -> f64 {
        let m = self.mean();
        let ss = self.reduce(0.0, |acc, x| *acc += dist2(x, &m), |t, p| *t += p);
        (ss / self.len() as f64).sqrt()
    }
}

fn dist2(x: &[f64], a: &[f64]) -> f64 {
    x.iter().zip(a).map(|(u, v)| (u - v) * (u - v)).sum()
}

fn dist(x: &[f64], a: &[f64]) -> f64 {
    dist2(x, a).sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Result of one p-mean solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdPMean {
    pub p: f64,
    pub nu: Vec<f64>,
    /// `(1/n) Σ ‖x_i − ν‖^p`; `inf` if it overflows (see `ln_objective`).
    pub objective: f64,
    pub ln_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NdPMean {
    /// Turn an unconverged result into [`Error::NonConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
            })
        }
    }
}

/// `ln F(a)` with `F(a) = (1/n) Σ ‖x_i − a‖^p`, scaled by the largest distance.
pub fn ln_objective(s: &SampleSet, p: f64, a: &[f64]) -> f64 {
    let m = s.max_distance(a);
    if m == 0.0 {
        return f64::NEG_INFINITY;
    }
    let sum = s.reduce(0.0, |acc, x| *acc += (dist(x, a) / m).powf(p), |t, v| *t += v);
    p * m.ln() + (sum / s.len() as f64).ln()
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidP(p));
    }
    Ok(())
}

/// The sample p-mean, started from the sample mean.
pub fn frechet_pmean_nd(s: &SampleSet, p: f64) -> Result<NdPMean> {
    frechet_pmean_nd_from(s, p, &s.mean())
}

/// The sample p-mean, started from `start` (or from the mean if that is
/// better).
pub fn frechet_pmean_nd_from(s: &SampleSet, p: f64, start: &[f64]) -> Result<NdPMean> {
    check_p(p)?;
    if start.len() != s.dim() {
        return Err(Error::InvalidSamples("start point has the wrong dimension".into()));
    }
    let finish = |nu: Vec<f64>, iterations, converged| {
        let ln_objective = ln_objective(s, p, &nu);
        NdPMean {
            p,
            nu,
            objective: ln_objective.exp(),
            ln_objective,
            iterations,
            converged,
        }
    };
    if p == 2.0 {
        return Ok(finish(s.mean(), 0, true));
    }
    if p == 1.0 && s.dim() == 1 {
        return Ok(finish(vec![median_1d(s)], 0, true));
    }
    let mean = s.mean();
    let a0 = if ln_objective(s, p, start) < ln_objective(s, p, &mean) {
        start.to_vec()
    } else {
        mean
    };
    let scale = s.spread();
    let (nu, iterations, converged) = if p == 1.0 {
        weiszfeld(s, a0, scale)
    } else {
        newton(s, p, a0, scale)
    };
    Ok(finish(nu, iterations, converged))
}

fn median_1d(s: &SampleSet) -> f64 {
    let mut v = s.data.clone();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Weiszfeld's iteration with the Vardi–Zhang correction at sample points.
fn weiszfeld(s: &SampleSet, mut a: Vec<f64>, scale: f64) -> (Vec<f64>, usize, bool) {
    let d = s.dim();
    let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
    for iter in 1..=WEISZFELD_MAX_ITER {
        // (Σ x_i/r_i, Σ 1/r_i, Σ (x_i − a)/r_i, multiplicity of a)
        let init = (vec![0.0; d], 0.0, vec![0.0; d], 0usize);
        let (wx, w, resid, eta) = s.reduce(
            init,
            |acc, x| {
                let r = dist(x, &a);
                if r <= tiny {
                    acc.3 += 1;
                    return;
                }
                for k in 0..d {
                    acc.0[k] += x[k] / r;
                    acc.2[k] += (x[k] - a[k]) / r;
                }
                acc.1 += 1.0 / r;
            },
            |t, p| {
                t.0.iter_mut().zip(&p.0).for_each(|(u, v)| *u += v);
                t.1 += p.1;
                t.2.iter_mut().zip(&p.2).for_each(|(u, v)| *u += v);
                t.3 += p.3;
            },
        );
        if w == 0.0 {
            return (a, iter, true);
        }
        let t: Vec<f64> = wx.iter().map(|v| v / w).collect();
        let next: Vec<f64> = if eta == 0 {
            t
        } else {
            let r = norm(&resid);
            if r <= eta as f64 {
                // The sample point itself is optimal.
                return (a, iter, true);
            }
            let g = eta as f64 / r;
            t.iter().zip(&a).map(|(ti, ai)| (1.0 - g) * ti + g * ai).collect()
        };
        let step = dist(&next, &a);
        a = next;
        if step < STEP_TOL * (norm(&a) + scale) {
            return (a, iter, true);
        }
    }
    (a, WEISZFELD_MAX_ITER, false)
}

/// Scaled gradient and Hessian: with `m = max ‖x_i − a‖`,
/// `∇F = m^{p−1} g` and `∇²F = m^{p−2} H`.
fn scaled_derivatives(s: &SampleSet, p: f64, a: &[f64], m: f64) -> (DVector<f64>, DMatrix<f64>, f64) {
    let d = s.dim();
    let init = (vec![0.0; d], vec![0.0; d * d], 0.0);
    let (g, h, f) = s.reduce(
        init,
        |acc, x| {
            let r = dist(x, a) / m;
            if r == 0.0 {
                return;
            }
            let u: Vec<f64> = (0..d).map(|k| (a[k] - x[k]) / (r * m)).collect();
            let rp2 = r.powf(p - 2.0);
            acc.2 += rp2 * r * r;
            for k in 0..d {
                acc.0[k] += p * rp2 * r * u[k];
                for l in 0..d {
                    let id = if k == l { 1.0 } else { 0.0 };
                    acc.1[k * d + l] += p * rp2 * (id + (p - 2.0) * u[k] * u[l]);
                }
            }
        },
        |t, q| {
            t.0.iter_mut().zip(&q.0).for_each(|(u, v)| *u += v);
            t.1.iter_mut().zip(&q.1).for_each(|(u, v)| *u += v);
            t.2 += q.2;
        },
    );
    let n = s.len() as f64;
    (DVector::from_vec(g) / n, DMatrix::from_row_slice(d, d, &h) / n, f / n)
}

/// Damped Newton with an IRLS fallback, all in scaled form.
fn newton(s: &SampleSet, p: f64, mut a: Vec<f64>, scale: f64) -> (Vec<f64>, usize, bool) {
    let d = s.dim();
    let mut ln_f = ln_objective(s, p, &a);
    for iter in 1..=MAX_ITER {
        let m = s.max_distance(&a);
        if m == 0.0 {
            return (a, iter, true);
        }
        let (g, h, f_scaled) = scaled_derivatives(s, p, &a, m);
        // ‖∇F‖ / (1 + F), in logs.
        let ln_grad = (p - 1.0) * m.ln() + g.norm().ln();
        let ln_one_plus_f = if ln_f > 0.0 {
            ln_f + (-ln_f).exp().ln_1p()
        } else {
            ln_f.exp().ln_1p()
        };
        if ln_grad - ln_one_plus_f < GRAD_TOL.ln() {
            return (a, iter, true);
        }
        let newton_dir = h.cholesky().map(|c| -c.solve(&g) * m);
        // Directional derivative relative to F: ∇F·δ / F = g·δ / (m f).
        let mut accepted = None;
        if let Some(dir) = newton_dir.filter(|v| v.iter().all(|x| x.is_finite())) {
            let slope = g.dot(&dir) / (m * f_scaled);
            // Near the minimum F stops resolving progress before the gradient
            // does; there the full step is judged by whether it shrinks ∇F.
            if slope.abs() < UNRESOLVED_DECREASE {
                accepted = gradient_step(s, p, &a, &dir, ln_grad);
            }
            if accepted.is_none() && slope < 0.0 {
                accepted = line_search(s, p, &a, &dir, ln_f, slope);
            }
            if accepted.is_none() {
                accepted = gradient_step(s, p, &a, &dir, ln_grad);
            }
        }
        if accepted.is_none() {
            accepted = irls_step(s, p, &a, m, ln_f);
        }
        let Some((next, ln_next)) = accepted else {
            // No descent possible: at the numerical minimum.
            return (a, iter, true);
        };
        let step = dist(&next, &a);
        a = next;
        ln_f = ln_next;
        if step < STEP_TOL * (norm(&a) + scale) {
            return (a, iter, true);
        }
        debug_assert_eq!(a.len(), d);
    }
    (a, MAX_ITER, false)
}

fn ln_gradient_norm(s: &SampleSet, p: f64, a: &[f64]) -> f64 {
    let m = s.max_distance(a);
    if m == 0.0 {
        return f64::NEG_INFINITY;
    }
    let (g, _, _) = scaled_derivatives(s, p, a, m);
    (p - 1.0) * m.ln() + g.norm().ln()
}

fn gradient_step(s: &SampleSet, p: f64, a: &[f64], dir: &DVector<f64>, ln_grad: f64) -> Option<(Vec<f64>, f64)> {
    let trial: Vec<f64> = a.iter().zip(dir.iter()).map(|(x, v)| x + v).collect();
    (ln_gradient_norm(s, p, &trial) < ln_grad).then(|| {
        let ln_f = ln_objective(s, p, &trial);
        (trial, ln_f)
    })
}

/// Armijo backtracking on `ln F`.
fn line_search(s: &SampleSet, p: f64, a: &[f64], dir: &DVector<f64>, ln_f: f64, slope: f64) -> Option<(Vec<f64>, f64)> {
    let mut t = 1.0;
    for _ in 0..60 {
        let trial: Vec<f64> = a.iter().zip(dir.iter()).map(|(x, v)| x + t * v).collect();
        let ln_trial = ln_objective(s, p, &trial);
        if ln_trial <= ln_f + 1e-4 * t * slope {
            return Some((trial, ln_trial));
        }
        t *= 0.5;
    }
    None
}

/// One reweighted average `Σ w_i x_i / Σ w_i` with `w_i = ‖x_i − a‖^{p−2}`,
/// kept only if it lowers `F`.
fn irls_step(s: &SampleSet, p: f64, a: &[f64], m: f64, ln_f: f64) -> Option<(Vec<f64>, f64)> {
    let d = s.dim();
    let (wx, w) = s.reduce(
        (vec![0.0; d], 0.0),
        |acc, x| {
            let r = dist(x, a) / m;
            if r == 0.0 {
                return;
            }
            let wi = r.powf(p - 2.0);
            acc.0.iter_mut().zip(x).for_each(|(u, v)| *u += wi * v);
            acc.1 += wi;
        },
        |t, q| {
            t.0.iter_mut().zip(&q.0).for_each(|(u, v)| *u += v);
            t.1 += q.1;
        },
    );
    if !(w > 0.0) || !w.is_finite() {
        return None;
    }
    let next: Vec<f64> = wx.iter().map(|v| v / w).collect();
    let ln_next = ln_objective(s, p, &next);
    (ln_next < ln_f).then_some((next, ln_next))
}

/// Bootstrap standard error of each coordinate of the sample p-mean.
pub fn bootstrap_se(s: &SampleSet, p: f64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centre = frechet_pmean_nd(s, p)?.nu;
    let d = s.dim();
    let mut ss = vec![0.0; d];
    let mut sum = vec![0.0; d];
    for _ in 0..reps {
        let r = s.resample(&mut rng);
        let nu = frechet_pmean_nd_from(&r, p, &centre)?.nu;
        for k in 0..d {
            sum[k] += nu[k];
            ss[k] += nu[k] * nu[k];
        }
    }
    let b = reps as f64;
    Ok((0..d)
        .map(|k| {
            let mean = sum[k] / b;
            ((ss[k] / b - mean * mean).max(0.0) * b / (b - 1.0)).sqrt()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailboneTrajectory {
    pub entries: Vec<NdPMean>,
    /// Unit vector, or `None` when the trailing secants disagree.
    pub zeta: Option<Vec<f64>>,
}

impl TailboneTrajectory {
    pub fn zeta_unstable(&self) -> bool {
        self.zeta.is_none()
    }
}

/// Solve along an increasing grid of `p ≥ 1`, warm-starting each point from
/// the previous one. Unconverged entries are kept and flagged.
pub fn tailbone_trajectory(s: &SampleSet, p_grid: &[f64]) -> Result<TailboneTrajectory> {
    if p_grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    for &p in p_grid {
        check_p(p)?;
    }
    let mut entries: Vec<NdPMean> = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let start = entries.last().map_or_else(|| s.mean(), |e| e.nu.clone());
        entries.push(frechet_pmean_nd_from(s, p, &start)?);
    }
    let zeta = direction_zeta(&entries);
    Ok(TailboneTrajectory { entries, zeta })
}

/// The last normalized secant `Δν/Δp`, provided it agrees with the one before
/// within [`ZETA_ANGLE_TOL`] radians.
pub fn direction_zeta(entries: &[NdPMean]) -> Option<Vec<f64>> {
    let conv: Vec<&NdPMean> = entries.iter().filter(|e| e.converged).collect();
    if conv.len() < 3 {
        return None;
    }
    let tail = &conv[conv.len() - 3..];
    let secant = |a: &NdPMean, b: &NdPMean| -> Option<Vec<f64>> {
        let dp = b.p - a.p;
        if !(dp > 0.0) {
            return None;
        }
        let v: Vec<f64> = a.nu.iter().zip(&b.nu).map(|(x, y)| (y - x) / dp).collect();
        let n = norm(&v);
        (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
    };
    let s1 = secant(tail[0], tail[1])?;
    let s2 = secant(tail[1], tail[2])?;
    let cos = s1.iter().zip(&s2).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
    (cos.acos() <= ZETA_ANGLE_TOL).then_some(s2)
}
