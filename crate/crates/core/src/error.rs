use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("custom pdf integrates to {integral}, which deviates from 1 by more than {tolerance}")]
    UnnormalizedCustomPdf { integral: f64, tolerance: f64 },

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("quadrature failed to reach tolerance (estimate {value}, error {error})")]
    QuadratureFailure { value: f64, error: f64 },

    #[error("no sign change of the balance residual for p = {p} on [{lo}, {hi}]")]
    NoBracket { p: f64, lo: f64, hi: f64 },

    #[error("p = {0} is too close to 1 for the interior derivative formula")]
    NearSingularP(f64),

    #[error("pdf is not differentiable (linear interpolation)")]
    NonDifferentiablePdf,

    #[error("tail masses disagree at the p-mean: left {left}, right {right}")]
    NormalizationMismatch { left: f64, right: f64 },

    #[error("no grid point lies in the admissible domain")]
    EmptyDomainIntersection,

    #[error("moment diverges: {0}")]
    MomentDiverges(String),

    #[error("invalid p = {0}")]
    InvalidP(f64),

    #[error("iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("invalid samples: {0}")]
    InvalidSamples(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad user input: parameters, tables, grids, samples.
    Input,
    /// The numerics broke down on valid input.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParams(_)
            | Error::UnnormalizedCustomPdf { .. }
            | Error::InvalidP(_)
            | Error::InvalidSamples(_)
            | Error::InvalidGrid(_)
            | Error::EmptyDomainIntersection => ErrorClass::Input,
            _ => ErrorClass::Numerical,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::UnnormalizedCustomPdf { .. } => "UnnormalizedCustomPdf",
            Error::DivergentIntegral(_) => "DivergentIntegral",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::NoBracket { .. } => "NoBracket",
            Error::NearSingularP(_) => "NearSingularP",
            Error::NonDifferentiablePdf => "NonDifferentiablePdf",
            Error::NormalizationMismatch { .. } => "NormalizationMismatch",
            Error::EmptyDomainIntersection => "EmptyDomainIntersection",
            Error::MomentDiverges(_) => "MomentDiverges",
            Error::InvalidP(_) => "InvalidP",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::InvalidSamples(_) => "InvalidSamples",
            Error::InvalidGrid(_) => "InvalidGrid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
