use frechet_skew::distributions::mirrored_table;
use frechet_skew::pmean::solve_pmean;
use frechet_skew::skewness::{classify, gamma_iff_nu4, magnitude_ell, pearson_coefficients, van_zwet, Classification};
use frechet_skew::{Distribution, DistributionSpec};

fn dist(spec: DistributionSpec) -> Distribution {
    Distribution::new(spec).unwrap()
}

fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

fn linear(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn mirrored_gamma() -> Distribution {
    let g = dist(DistributionSpec::gamma(2.0, 1.0));
    dist(mirrored_table(&g, 40.0, 4001))
}

/// Root of `a³ − 3a² + 6a − 6` by bisection on `[1, 2]`.
fn exponential_nu4() -> f64 {
    let f = |a: f64| a * a * a - 3.0 * a * a + 6.0 * a - 6.0;
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

#[test]
fn lognormal_moment_skewness() {
    let s2: f64 = 1.0;
    let pc = pearson_coefficients(&dist(DistributionSpec::lognormal(0.0, s2))).unwrap();
    let exact = (s2.exp() + 2.0) * (s2.exp() - 1.0).sqrt();
    assert!((pc.moment_skewness.unwrap() / exact - 1.0).abs() < 1e-8);
    assert!(pc.median_skewness.unwrap() > 0.0);
}

#[test]
fn cubic_identity() {
    let e = gamma_iff_nu4(&dist(DistributionSpec::exponential(1.0))).unwrap();
    assert!((e.nu4 - exponential_nu4()).abs() < 1e-10);
    assert!((e.gamma_direct - 2.0).abs() < 1e-9);
    for spec in [
        DistributionSpec::exponential(1.0),
        DistributionSpec::gamma(2.0, 1.0),
        DistributionSpec::lognormal(0.0, 0.5),
        DistributionSpec::beta(2.0, 5.0),
        DistributionSpec::lognormal(0.5, 0.5),
    ] {
        let r = gamma_iff_nu4(&dist(spec)).unwrap();
        assert!(r.difference.abs() <= 1e-6 * (1.0 + r.gamma_direct.abs()), "{r:?}");
        assert!(r.signs_agree);
    }
}

#[test]
fn lognormal_anchor_values() {
    let r = gamma_iff_nu4(&dist(DistributionSpec::lognormal(0.5, 0.5))).unwrap();
    assert!((r.nu4 / 1.25f64.exp() - 1.0).abs() < 1e-9);
    assert!((r.nu2 / 0.75f64.exp() - 1.0).abs() < 1e-9);
}

#[test]
fn sign_equivalence_includes_negative_case() {
    let m = gamma_iff_nu4(&mirrored_gamma()).unwrap();
    assert!(m.gamma_direct < -1.0);
    assert!(m.nu4 < m.nu2);
    assert!(m.signs_agree);
    let n = gamma_iff_nu4(&dist(DistributionSpec::normal(0.0, 1.0))).unwrap();
    assert!(n.gamma_direct.abs() < 1e-9 && n.nu4.abs() < 1e-9 && n.nu2.abs() < 1e-9);
    assert!(n.signs_agree);
}

#[test]
fn classification_examples() {
    let cases = [
        (
            DistributionSpec::pareto(0.5),
            linear(1.0, 1.49, 16),
            false,
            Classification::TrulyModePositive,
        ),
        (
            DistributionSpec::beta(2.0, 5.0),
            geometric(1.0, 8.0, 16),
            false,
            Classification::TrulyModePositive,
        ),
        (
            DistributionSpec::lognormal(0.0, 1.0),
            geometric(0.25, 6.0, 16),
            true,
            Classification::TrulyModePositiveFullDomain,
        ),
        (
            DistributionSpec::exponential(1.0),
            geometric(0.01, 8.0, 16),
            true,
            Classification::TrulyModePositiveFullDomain,
        ),
        (
            DistributionSpec::normal(0.0, 1.0),
            geometric(0.25, 6.0, 16),
            true,
            Classification::Symmetric,
        ),
    ];
    for (spec, grid, full, expected) in cases {
        let d = dist(spec);
        let r = classify(&d, &grid, full).unwrap();
        assert_eq!(r.classification, expected, "{:?}", d.family());
        assert!(r.offending_p.is_none());
        if expected.base() == "truly_mode_positive" {
            assert!(r.van_zwet, "{:?}", d.family());
        }
    }
    let m = classify(&mirrored_gamma(), &geometric(1.0, 6.0, 12), false).unwrap();
    assert_eq!(m.classification, Classification::TrulyModeNegative);
    assert!(!m.van_zwet);
}

#[test]
fn mode_positive_orders_centroids() {
    for spec in [
        DistributionSpec::gamma(2.0, 1.0),
        DistributionSpec::beta(2.0, 5.0),
        DistributionSpec::lognormal(0.0, 0.5),
    ] {
        let d = dist(spec);
        let r = classify(&d, &geometric(1.0, 6.0, 10), false).unwrap();
        assert_eq!(r.classification, Classification::TrulyModePositive);
        let nu = |p: f64| solve_pmean(&d, p).unwrap().nu_p;
        let nu0 = d.mode().unwrap();
        assert!(nu0 < nu(1.0) && nu(1.0) < nu(2.0) && nu(2.0) < nu(4.0));
    }
}

#[test]
fn short_grid_rejected() {
    let d = dist(DistributionSpec::exponential(1.0));
    assert!(classify(&d, &linear(1.0, 3.0, 7), false).is_err());
}

#[test]
fn ell_for_lognormal() {
    for s2 in [0.25, 1.0] {
        let a = magnitude_ell(&dist(DistributionSpec::lognormal(0.0, s2)));
        assert!((a.ell.unwrap() - s2 / 2.0).abs() < 1e-3, "{a:?}");
        let b = magnitude_ell(&dist(DistributionSpec::lognormal(2.0, s2)));
        assert!((a.ell.unwrap() - b.ell.unwrap()).abs() < 1e-6);
        // Shifting μ rescales X, which leaves every h value unchanged.
        for ((pa, ha), (pb, hb)) in a.samples.iter().zip(&b.samples) {
            assert_eq!(pa, pb);
            assert!((ha - hb).abs() < 1e-6);
        }
    }
}

#[test]
fn ell_for_exponential_vanishes() {
    // h(p) decays like 1/p, so the limit is 0.
    let e = magnitude_ell(&dist(DistributionSpec::exponential(1.0)));
    assert!(!e.diverged);
    assert!(e.ell.unwrap().abs() < 1e-5, "{e:?}");
    let h8 = e.samples.iter().find(|s| s.0 == 8.0).unwrap().1;
    let h64 = e.samples.iter().find(|s| s.0 == 64.0).unwrap().1;
    assert!((h8 - 0.13946083962748118).abs() < 1e-6);
    assert!((h64 - 0.015689562960460413).abs() < 1e-6);
}

#[test]
fn ell_unavailable_cases() {
    let b = magnitude_ell(&dist(DistributionSpec::beta(2.0, 5.0)));
    assert!(b.bounded_support && b.ell.is_none());
    // h blows up as p approaches the end of the domain.
    let p = magnitude_ell(&dist(DistributionSpec::pareto(3.0)));
    assert!(p.diverged && p.ell.is_none());
}

#[test]
fn van_zwet_cases() {
    assert!(van_zwet(&dist(DistributionSpec::gamma(2.0, 1.0))));
    assert!(van_zwet(&dist(DistributionSpec::normal(0.0, 1.0))));
    assert!(!van_zwet(&mirrored_gamma()));
}

#[test]
fn report_json_fields() {
    let d = dist(DistributionSpec::lognormal(0.0, 1.0));
    let r = classify(&d, &geometric(0.25, 6.0, 16), true).unwrap();
    let v = r.to_json("curve.csv");
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
    assert_eq!(keys, ["classification", "curve_csv_path", "ell", "pearson", "van_zwet"]);
    assert_eq!(v["classification"], "truly_mode_positive_full_domain");
    assert_eq!(r.classification.to_string(), "truly_mode_positive (full domain)");
}
