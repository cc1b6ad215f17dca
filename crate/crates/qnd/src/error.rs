//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by grid construction and single-mode state operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 16 points, got {0}")]
    TooFewPoints(usize),

    #[error("grid half-width must be positive and finite, got {0}")]
    InvalidExtent(f64),

    #[error("amplitude buffer has {got} entries, grid has {expected} nodes")]
    LengthMismatch { got: usize, expected: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("variance must be positive and finite, got {0}")]
    NonPositiveVariance(f64),

    #[error("Fock index {0} exceeds the stable recurrence bound 60")]
    FockTooLarge(usize),

    #[error("state support exceeds the grid: {0}")]
    SupportViolation(String),

    #[error("state norm vanished (destructive cancellation)")]
    ZeroNorm,

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("trace deviates from one by {0:.3e}")]
    TraceDeviation(f64),
}

/// Errors raised along the measurement chain and by derived quantities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasurementError {
    #[error(transparent)]
    Grid(#[from] GridError),

    #[error("probe squeezing modulus must be finite and non-negative, got {0}")]
    InvalidProbe(f64),

    #[error("mixing angle must lie strictly inside (0, pi/2), got {0}")]
    DegenerateSetup(f64),

    #[error("transmittivity must lie strictly inside (0, 1), got {0}")]
    InvalidTransmittivity(f64),

    #[error(
        "kernel width {sigma:.3e} is below the grid spacing {dx:.3e}; \
         take the projective limit analytically instead"
    )]
    UnderResolvedKernel { sigma: f64, dx: f64 },

    #[error("outcome probability vanished at x = {0}")]
    VanishingProbability(f64),

    #[error("homodyne slice norm vanished at x = {0}")]
    VanishingSlice(f64),

    #[error("two-mode grid is limited to 512 points per axis, got {0}")]
    TwoModeGridTooLarge(usize),

    #[error("distribution mass deviates from one by {0:.3e}")]
    UnnormalizedDistribution(f64),

    #[error("negative density {value:.3e} at node {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("sample count must be at least 1")]
    EmptySample,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Errors raised by the trade-off optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("bracket must satisfy 0 < lo < hi, got [{0}, {1}]")]
    InvalidBracket(f64, f64),

    #[error("objective is not unimodal on the bracket (interior valley near x = {0:.6})")]
    NotUnimodal(f64),

    #[error("F - G does not change sign on [{0}, {1}]")]
    NoSignChange(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Measurement(#[from] MeasurementError),
}
