//! Fixtures shared by the benchmarks.

use frechet_skew::tailbone::SampleSet;
use frechet_skew::{Distribution, DistributionSpec};

pub fn exponential() -> Distribution {
    Distribution::new(DistributionSpec::exponential(1.0)).expect("valid spec")
}

pub fn gamma2() -> Distribution {
    Distribution::new(DistributionSpec::gamma(2.0, 1.0)).expect("valid spec")
}

pub fn lognormal() -> Distribution {
    Distribution::new(DistributionSpec::lognormal(0.0, 1.0)).expect("valid spec")
}

/// `n` draws from exponential × normal with a fixed seed.
pub fn product_samples(n: usize) -> SampleSet {
    let e = exponential();
    let g = Distribution::new(DistributionSpec::normal(0.0, 1.0)).expect("valid spec");
    SampleSet::product(&[&e, &g], n, 7).expect("valid sampler")
}
