//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while discretizing or solving an equation.
#[derive(Debug, Error)]
pub enum Error {
    /// An evaluation point fell outside the unit interval `[0, 1)`.
    #[error("t = {0} is outside the unit interval [0, 1)")]
    OutsideUnitInterval(f64),

    /// A resolution was requested whose cell count is not a power of two.
    /// Walsh functions are only cell-constant on dyadic grids.
    #[error("m = {0} is not a power of two")]
    NotPowerOfTwo(usize),

    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A Brownian path was sampled on a grid that does not match the
    /// resolution it is being combined with.
    #[error("Brownian path sampled for m = {path_m} does not match m = {expected_m}")]
    ResolutionMismatch { path_m: usize, expected_m: usize },

    /// A time did not land on the half-step grid of a Brownian path.
    #[error("t = {0} is not on the half-step sample grid")]
    OffGrid(f64),

    /// A Brownian path built from raw values did not start at zero.
    #[error("Brownian path must start at B(0) = 0, got {0}")]
    NonzeroOrigin(f64),

    /// No registered problem under this name.
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    /// Fredholm limits must be multiples of the cell width so that the
    /// orthonormality step of the derivation stays valid.
    #[error("Fredholm limits [{alpha}, {beta}] are not aligned to the cell grid h = {h}")]
    UnalignedFredholmLimits { alpha: f64, beta: f64, h: f64 },

    /// Invalid Fredholm limits (need 0 <= alpha < beta <= 1).
    #[error("Fredholm limits [{alpha}, {beta}] must satisfy 0 <= alpha < beta <= 1")]
    InvalidFredholmLimits { alpha: f64, beta: f64 },

    /// The assembled system matrix could not be factorized, or the
    /// factorization produced a solution with an unacceptable residual.
    #[error("system matrix is singular or numerically rank-deficient (m = {m})")]
    SingularSystem { m: usize },

    /// A regularity constant or step width was negative.
    #[error("{name} must be non-negative, got {value}")]
    NegativeConstant { name: &'static str, value: f64 },

    /// The step width fed to the error bound must lie in (0, 1].
    #[error("cell width h must lie in (0, 1], got {0}")]
    InvalidStepWidth(f64),

    /// Rate estimation needs at least three resolutions.
    #[error("convergence study needs at least 3 entries, got {0}")]
    TooFewResolutions(usize),

    /// Rate estimation requires resolutions that strictly double.
    #[error("resolutions must strictly double, got {previous} -> {next}")]
    NonDoublingResolutions { previous: usize, next: usize },

    /// All observed errors hit zero (or below); the rate is saturated and a
    /// log-log fit is meaningless.
    #[error("error of {0} at m = {1} saturates the convergence rate")]
    RateSaturated(f64, usize),

    /// Monte Carlo needs at least one path.
    #[error("Monte Carlo needs n_paths >= 1")]
    NoPaths,

    /// A single path of a Monte Carlo run failed to solve.
    #[error("path {index} failed: {source}")]
    PathSolveFailed {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
