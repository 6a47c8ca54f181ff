use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `N^2 > q + alpha + sigma` fails, so an unstable or marginal mode would
    /// be left out of the design.
    #[error("mode condition violated: N^2 = {n_squared} must exceed q + alpha + sigma = {bound}")]
    ModeCondition { n_squared: f64, bound: f64 },

    #[error("position {0} outside [0, pi]")]
    PositionOutOfRange(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("weights must be strictly positive (entry {index} is {value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("no stabilizing solution: {0}")]
    NoStabilizingSolution(String),

    #[error("invariant subspace degenerate (condition number {0:.3e})")]
    DegenerateSubspace(f64),

    #[error("resonant q: q = {q} coincides with eigenvalue lambda_{n}")]
    ResonantReaction { q: f64, n: usize },

    #[error("matrix {0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("spectral radius condition failed: rho = {rho} >= gamma^-2 = {bound}")]
    SpectralCondition { rho: f64, bound: f64 },

    #[error("explicit stability guard violated: dt * lambda_(M-1) = {product} > 1 (dt = {dt}, lambda = {lambda})")]
    StabilityGuard { dt: f64, lambda: f64, product: f64 },

    #[error("quadrature points P = {points} must be at least 2M = {needed}")]
    Aliasing { points: usize, needed: usize },

    #[error("simulation produced a non-finite value; last valid time {0}")]
    NonFinite(f64),

    #[error("trace does not carry per-mode coefficients")]
    MissingModes,

    #[error("mode scan exceeded cap N = {0}")]
    ScanCapExceeded(usize),
}
