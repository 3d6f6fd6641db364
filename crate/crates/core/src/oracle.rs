//! Self-check suite against closed forms and independently known values.
//! Every check is deterministic, so repeated runs give identical reports.

use serde::{Deserialize, Serialize};

use crate::distributions::{mirrored_table, Distribution, DistributionSpec};
use crate::dominance::{build_tail_pair, cdf_dominance, single_crossing, CrossingStatus, Verdict, DEFAULT_GRID};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::pmean::{limit_at_zero, pmean_curve, solve_pmean, PMeanCurve};
use crate::skewness::{gamma_iff_nu4, magnitude_ell, van_zwet};
use crate::tailbone::{frechet_pmean_nd, SampleSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    /// Allowed `|observed − expected|`.
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
    pub passed: usize,
    pub total: usize,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

/// Everything the suite produces: the report and a reference curve.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub report: OracleReport,
    /// Log-normal(0, 1) curve on the full domain, written as a CSV artifact.
    pub curve: PMeanCurve,
}

struct Suite {
    checks: Vec<OracleCheck>,
}

impl Suite {
    fn abs(&mut self, name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) {
        let passed = (observed - expected).abs() <= tolerance;
        self.checks.push(OracleCheck {
            name: name.into(),
            observed,
            expected,
            tolerance,
            passed,
        });
    }

    fn rel(&mut self, name: impl Into<String>, observed: f64, expected: f64, rel: f64) {
        self.abs(name, observed, expected, rel * expected.abs());
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.abs(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0);
    }
}

fn dist(spec: DistributionSpec) -> Result<Distribution> {
    Distribution::new(spec)
}

/// Root of `a³ − 3a² + 6a − 6`, the unit exponential's `ν4`, by bisection.
fn exponential_nu4() -> f64 {
    let f = |a: f64| ((a - 3.0) * a + 6.0) * a - 6.0;
    let (mut lo, mut hi) = (1.0, 2.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if f(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

pub fn run_oracle_suite() -> Result<OracleRun> {
    let mut s = Suite { checks: Vec::new() };

    for (mu, s2) in [(0.0, 1.0), (0.5, 0.5), (2.0, 0.25)] {
        let d = dist(DistributionSpec::lognormal(mu, s2))?;
        for p in [0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0] {
            let exact = (mu + 0.5 * (p - 1.0) * s2).exp();
            s.rel(
                format!("lognormal({mu},{s2}) nu_{p}"),
                solve_pmean(&d, p)?.nu_p,
                exact,
                1e-6,
            );
        }
    }

    let ln = dist(DistributionSpec::lognormal(0.5, 0.5))?;
    s.rel("lognormal(0.5,0.5) mode", ln.mode().unwrap_or(f64::NAN), 1.0, 1e-12);
    for (p, e) in [(1.0, 0.5), (2.0, 0.75), (4.0, 1.25)] {
        s.rel(
            format!("lognormal(0.5,0.5) nu_{p}"),
            solve_pmean(&ln, p)?.nu_p,
            f64::exp(e),
            1e-6,
        );
    }

    let ex = dist(DistributionSpec::exponential(1.0))?;
    s.abs(
        "exponential nu_1",
        solve_pmean(&ex, 1.0)?.nu_p,
        std::f64::consts::LN_2,
        1e-10,
    );
    s.abs("exponential nu_2", solve_pmean(&ex, 2.0)?.nu_p, 1.0, 1e-10);
    s.abs(
        "exponential nu_4",
        solve_pmean(&ex, 4.0)?.nu_p,
        exponential_nu4(),
        1e-10,
    );

    for (label, spec) in [
        ("exponential(1)", DistributionSpec::exponential(1.0)),
        ("gamma(2,1)", DistributionSpec::gamma(2.0, 1.0)),
        ("lognormal(0,0.5)", DistributionSpec::lognormal(0.0, 0.5)),
        ("beta(2,5)", DistributionSpec::beta(2.0, 5.0)),
    ] {
        let r = gamma_iff_nu4(&dist(spec)?)?;
        let tol = 1e-6 * (1.0 + r.gamma_direct.abs());
        s.abs(format!("{label} cubic identity"), r.gamma_from_nu4, r.gamma_direct, tol);
        s.flag(format!("{label} sign(gamma) = sign(nu4 - nu2)"), r.signs_agree);
    }
    s.abs("exponential(1) gamma", gamma_iff_nu4(&ex)?.gamma_direct, 2.0, 1e-9);

    let gamma2 = dist(DistributionSpec::gamma(2.0, 1.0))?;
    let mirrored = dist(mirrored_table(&gamma2, 40.0, 4001))?;
    let m = gamma_iff_nu4(&mirrored)?;
    s.flag("mirrored gamma(2,1) gamma < 0", m.gamma_direct < 0.0);
    s.flag("mirrored gamma(2,1) nu4 < nu2", m.nu4 < m.nu2);

    let normal = dist(DistributionSpec::normal(0.0, 1.0))?;
    for p in [0.5, 1.0, 2.0, 3.0, 6.0] {
        s.abs(format!("normal(0,1) nu_{p}"), solve_pmean(&normal, p)?.nu_p, 0.0, 1e-8);
    }

    for s2 in [0.25, 1.0] {
        let ell = magnitude_ell(&dist(DistributionSpec::lognormal(0.0, s2))?);
        s.abs(
            format!("lognormal(0,{s2}) ell"),
            ell.ell.unwrap_or(f64::NAN),
            s2 / 2.0,
            1e-3,
        );
    }

    let ln01 = dist(DistributionSpec::lognormal(0.0, 1.0))?;
    let lim = limit_at_zero(&ln01, &[0.2, 0.1, 0.05, 0.025])?;
    s.abs("lognormal(0,1) lim p->0 nu_p", lim, f64::exp(-0.5), 1e-3);
    s.flag("lognormal(0,1) lim p->0 nu_p > mode", lim > f64::exp(-1.0));

    let pt = solve_pmean(&gamma2, 2.0)?;
    let crossing = single_crossing(&gamma2, &pt);
    let c_star = (pt.nu_p * (pt.nu_p - 1.0)).sqrt();
    s.flag(
        "gamma(2,1) p=2 single crossing",
        crossing.status == CrossingStatus::Satisfied,
    );
    s.flag(
        "gamma(2,1) p=2 crossing in (c*, nu)",
        crossing.c.is_some_and(|c| c > c_star && c < pt.nu_p),
    );

    let pt = solve_pmean(&ex, 1.0)?;
    let tp = build_tail_pair(&ex, &pt)?;
    s.abs("exponential(1) H_1", tp.h_p, 0.5, 1e-12);
    s.flag(
        "exponential(1) p=1 right tail dominates",
        cdf_dominance(&tp, DEFAULT_GRID)?.verdict == Verdict::RightDominatesStrictly,
    );
    s.flag("gamma(2,1) van Zwet", van_zwet(&gamma2));

    let square = SampleSet::new(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![2.0, 2.0]])?;
    for p in [1.0, 2.0, 3.0] {
        let nu = frechet_pmean_nd(&square, p)?.nu;
        s.abs(format!("square p={p} first coordinate"), nu[0], 1.0, 1e-9);
        s.abs(format!("square p={p} second coordinate"), nu[1], 1.0, 1e-9);
    }

    let triangle = dist(DistributionSpec::custom(vec![0.0, 1.0], vec![2.0, 0.0]))?;
    s.abs("triangle cdf(1/2)", triangle.cdf(0.5), 0.75, 1e-12);

    let curve = pmean_curve(&ln01, &GridSpec::default_for(&ln01, true)?.values(), true)?;
    let passed = s.checks.iter().filter(|c| c.passed).count();
    let total = s.checks.len();
    Ok(OracleRun {
        report: OracleReport {
            checks: s.checks,
            passed,
            total,
        },
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let run = run_oracle_suite().unwrap();
        let failed: Vec<&OracleCheck> = run.report.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(run.report.total > 40);
    }
}
