use frechet_skew_bench::{exponential, gamma2, lognormal, product_samples};

#[test]
fn fixtures_build() {
    assert_eq!(exponential().mode(), Some(0.0));
    assert!(gamma2().mode().is_some());
    assert!(lognormal().mode().is_some());
    let s = product_samples(100);
    assert_eq!((s.len(), s.dim()), (100, 2));
}
