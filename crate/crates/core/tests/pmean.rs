use frechet_skew::distributions::mirrored_table;
use frechet_skew::pmean::{balance_residual, dnu_dp_general, dnu_dp_interior, pmean_curve, solve_pmean, RESIDUAL_TOL};
use frechet_skew::{Distribution, DistributionSpec};
use gauss_quad::{GaussLaguerre, GaussLegendre};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

fn dist(spec: DistributionSpec) -> Distribution {
    Distribution::new(spec).unwrap()
}

/// ν_p of the unit exponential from `Σ ν^{p+k} / (k! (p+k)) = Γ(p)`,
/// solved by bisection.
fn exponential_oracle(p: f64) -> f64 {
    let lhs = |nu: f64| {
        let (mut term, mut sum) = (nu.powf(p), 0.0);
        for k in 0..400 {
            sum += term / (p + k as f64);
            term *= nu / (k as f64 + 1.0);
        }
        sum - gamma(p)
    };
    let (mut lo, mut hi) = (1e-9, 4.0 * p + 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn exponential_matches_series_oracle() {
    let e = dist(DistributionSpec::exponential(1.0));
    for &p in &[0.5, 1.0, 1.5, 3.0, 4.0, 7.3, 16.0] {
        let nu = solve_pmean(&e, p).unwrap().nu_p;
        let oracle = exponential_oracle(p);
        assert!((nu - oracle).abs() < 1e-9 * oracle, "p={p}: {nu} vs {oracle}");
    }
    assert!((exponential_oracle(4.0) - 1.5960716379833215).abs() < 1e-12);
}

#[test]
fn lognormal_closed_form() {
    for &(mu, s2) in &[(0.0, 1.0), (0.5, 0.5), (2.0, 0.25)] {
        let d = dist(DistributionSpec::lognormal(mu, s2));
        for &p in &[0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0] {
            let pt = solve_pmean(&d, p).unwrap();
            let cf = d.closed_form_pmean(p).unwrap();
            assert!((pt.nu_p - cf).abs() <= 1e-6 * (1.0 + cf), "({mu},{s2}) p={p}");
            assert!(pt.residual.abs() <= RESIDUAL_TOL);
        }
    }
}

#[test]
fn residual_vanishes_at_root() {
    let specs = [
        DistributionSpec::gamma(2.0, 1.0),
        DistributionSpec::gamma(0.5, 1.0),
        DistributionSpec::beta(2.0, 5.0),
        DistributionSpec::pareto(3.0),
        DistributionSpec::normal(1.0, 2.0),
    ];
    for spec in specs {
        let d = dist(spec);
        for &p in &[0.5, 1.0, 1.7, 2.0, 3.0] {
            let pt = solve_pmean(&d, p).unwrap();
            let g = balance_residual(&d, p, pt.nu_p).unwrap();
            assert!(g.abs() <= RESIDUAL_TOL * pt.h_p, "{:?} p={p}: {g}", d.spec());
        }
    }
}

#[test]
fn derivative_formulas_match_finite_differences() {
    let specs = [
        DistributionSpec::gamma(2.0, 1.0),
        DistributionSpec::beta(2.0, 5.0),
        DistributionSpec::lognormal(0.0, 1.0),
    ];
    for spec in specs {
        let d = dist(spec);
        for &p in &[1.5, 2.0, 3.0] {
            let h = 1e-4;
            let fd = (solve_pmean(&d, p + h).unwrap().nu_p - solve_pmean(&d, p - h).unwrap().nu_p) / (2.0 * h);
            let pt = solve_pmean(&d, p).unwrap();
            let interior = dnu_dp_interior(&d, &pt).unwrap();
            let general = dnu_dp_general(&d, &pt).unwrap();
            assert!(
                (interior - fd).abs() <= 1e-4 * fd.abs(),
                "{:?} p={p}: {interior} vs {fd}",
                d.spec()
            );
            assert!(
                (general - fd).abs() <= 1e-4 * fd.abs(),
                "{:?} p={p}: {general} vs {fd}",
                d.spec()
            );
        }
    }
}

#[test]
fn normal_is_fixed_at_center() {
    let d = dist(DistributionSpec::normal(0.0, 1.0));
    for &p in &[0.25, 0.5, 1.0, 2.0, 3.0, 6.0] {
        assert!(solve_pmean(&d, p).unwrap().nu_p.abs() < 1e-8);
    }
}

#[test]
fn mirrored_gamma_reflects_pmeans() {
    let g = dist(DistributionSpec::gamma(2.0, 1.0));
    let m = dist(mirrored_table(&g, 40.0, 4001));
    for &p in &[0.5, 1.0, 2.0, 3.0] {
        let a = solve_pmean(&g, p).unwrap().nu_p;
        let b = solve_pmean(&m, p).unwrap().nu_p;
        assert!((a + b).abs() < 1e-6, "p={p}: {a} vs {b}");
    }
}

/// `∫ |x − a|^p x e^{−x} dx` for the gamma(2, 1) density, split at `a`.
fn gamma2_objective(p: f64, a: f64, legendre: &GaussLegendre, laguerre: &GaussLaguerre) -> f64 {
    // Right: x = a + t, weight t^p e^{-t}, remaining factor (a + t) e^{-a}.
    let right = (-a).exp() * laguerre.integrate(|t| a + t);
    // Left: x = a − s with s = a v², which smooths s^p at v = 0.
    let left = legendre.integrate(0.0, 1.0, |v| {
        let s = a * v * v;
        s.powf(p) * (a - s) * (s - a).exp() * 2.0 * a * v
    });
    right + left
}

#[test]
fn argmin_agrees_with_balance_root() {
    let d = dist(DistributionSpec::gamma(2.0, 1.0));
    let legendre = GaussLegendre::new(200).unwrap();
    for &p in &[1.5, 2.0, 3.0] {
        let laguerre = GaussLaguerre::new(60, p).unwrap();
        let argmin =
            frechet_skew::roots::golden_section(|a| gamma2_objective(p, a, &legendre, &laguerre), 0.5, 5.0, 1e-11);
        let nu = solve_pmean(&d, p).unwrap().nu_p;
        assert!((argmin - nu).abs() < 1e-6, "p={p}: {argmin} vs {nu}");
    }
}

#[test]
fn curve_examples() {
    let ln = dist(DistributionSpec::lognormal(0.0, 1.0));
    let c = pmean_curve(&ln, &[0.5, 1.0, 2.0, 3.0, 4.0], true).unwrap();
    let expected = [(-0.25f64).exp(), 1.0, 0.5f64.exp(), 1f64.exp(), 1.5f64.exp()];
    for (pt, e) in c.points.iter().zip(expected) {
        assert!((pt.nu_p - e).abs() < 1e-8 * e);
    }
    let e = dist(DistributionSpec::exponential(1.0));
    let c = pmean_curve(&e, &[1.0, 2.0, 4.0], false).unwrap();
    let nus: Vec<f64> = c.points.iter().map(|p| p.nu_p).collect();
    assert!((nus[0] - std::f64::consts::LN_2).abs() < 1e-10);
    assert!((nus[1] - 1.0).abs() < 1e-10);
    assert!((nus[2] - 1.5960716379833215).abs() < 1e-10);
    assert!(c.points.iter().all(|p| p.dnu_dp.unwrap() > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_equivariance(scale in 0.05f64..20.0, p in 0.3f64..5.0) {
        // ν_p(cX) = c ν_p(X) for the scale families.
        let base = solve_pmean(&dist(DistributionSpec::gamma(2.0, 1.0)), p).unwrap().nu_p;
        let scaled = solve_pmean(&dist(DistributionSpec::gamma(2.0, 1.0 / scale)), p).unwrap().nu_p;
        prop_assert!((scaled - scale * base).abs() <= 1e-8 * scale * base.max(1.0));
        let e1 = solve_pmean(&dist(DistributionSpec::exponential(1.0)), p).unwrap().nu_p;
        let ec = solve_pmean(&dist(DistributionSpec::exponential(1.0 / scale)), p).unwrap().nu_p;
        prop_assert!((ec - scale * e1).abs() <= 1e-8 * scale * e1.max(1.0));
    }

    #[test]
    fn normal_affine_equivariance(a in 0.1f64..10.0, b in -50.0f64..50.0, p in 0.3f64..6.0) {
        let nu = solve_pmean(&dist(DistributionSpec::normal(b, a * a)), p).unwrap().nu_p;
        prop_assert!((nu - b).abs() <= 1e-8 * (1.0 + a + b.abs()));
    }
}
