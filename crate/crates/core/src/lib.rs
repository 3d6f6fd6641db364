//! Fréchet p-means of continuous distributions and the skewness diagnostics
//! built on them.
//!
//! The p-mean `ν_p` minimizes `E|X − a|^p`; for a continuous law it is the
//! root of `E[(X−a)_+^{p−1}] = E[(a−X)_+^{p−1}]`. A distribution whose `ν_p`
//! increases with `p` is *truly positively skewed*. This crate solves for
//! `ν_p` by quadrature, certifies monotonicity on grids, checks the tail
//! dominance conditions that imply it, and computes sample p-means in ℝᵈ.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod dominance;
pub mod error;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod pmean;
pub mod quad;
pub mod roots;
pub mod skewness;
mod special;
pub mod tailbone;

pub use distributions::{Distribution, DistributionSpec, Family, Interpolation, MomentDomain, Side, Support};
pub use dominance::{CrossingStatus, DominanceReport, TailPair, Verdict};
pub use error::{Error, ErrorClass, Result};
pub use grid::{GridSpec, Spacing};
pub use pmean::{DerivativeMethod, DomainUsed, PMeanCurve, PMeanPoint};
pub use skewness::{Classification, PearsonCoefficients, SkewnessReport};
pub use tailbone::{NdPMean, SampleSet, TailboneTrajectory};
