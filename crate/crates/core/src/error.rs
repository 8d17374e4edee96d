use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {x} lies within the exclusion radius of the pole at {pole}")]
    SingularPoint { x: Complex64, pole: Complex64 },
    #[error("multivalued perturbation evaluated without a branch state")]
    BranchRequired,
    #[error("series did not converge within {terms} terms")]
    NoConvergence { terms: usize },
    #[error("lower parameter {0} is a non-positive integer")]
    InvalidLower(Complex64),
    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),
    #[error("index {index} out of range for {len} values")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("path passes within {distance:e} of singularity {point}")]
    PathThroughSingularity { point: Complex64, distance: f64 },
    #[error("step size underflow at arclength {s} (h = {h:e})")]
    StepSizeUnderflow { s: f64, h: f64 },
    #[error("non-finite value encountered near {0}")]
    NonFiniteValue(Complex64),
    #[error("fundamental matrix is ill-conditioned (cond = {0:e})")]
    IllConditioned(f64),
    #[error("integrand is not integrable at {point} (local exponent {exponent:.4})")]
    NonIntegrableEndpoint { point: Complex64, exponent: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("loops do not share a basepoint ({0} vs {1})")]
    InconsistentBasepoint(Complex64, Complex64),
    #[error("weight is not integrable: {0}")]
    NonIntegrableWeight(String),
    #[error("forcing is not integrable: {0}")]
    NonIntegrableForcing(String),
    #[error("Wronskian vanishes at {0}")]
    WronskianVanishes(Complex64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
