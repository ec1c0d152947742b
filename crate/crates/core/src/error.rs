use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid simplex vector: {0}")]
    InvalidSimplex(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("marginal is zero at x = {x}; conditional is undefined")]
    ZeroMarginal { x: usize },

    #[error("support violation at (x = {x}, y = {y}): divergence is infinite")]
    SupportViolation { x: usize, y: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nonpositive probability {value} at (x = {x}, y = {y}): cross-entropy loss is infinite")]
    NonpositiveProbability { x: usize, y: usize, value: f64 },

    #[error("eta must be positive, got {0}")]
    NonpositiveEta(f64),

    #[error("degenerate normalizer at x = {x}")]
    DegenerateNormalizer { x: usize },

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("pointwise loss {loss} exceeds the bound M = {bound} at (x = {x}, y = {y}) for hypothesis {k}")]
    LossBoundViolated {
        k: usize,
        x: usize,
        y: usize,
        loss: f64,
        bound: f64,
    },

    #[error("source conditionals disagree at x = {x}; the squared-loss decomposition needs a shared conditional")]
    ConditionalMismatch { x: usize },

    #[error("J_z vanishes at point {point} with positive weight")]
    NonpositiveJz { point: usize },

    #[error("inner solver found no improving step after {iters} iterations")]
    InnerStall { iters: usize },

    #[error("fixed-point iteration did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("simplex grid too large: {0} points")]
    GridTooLarge(u128),

    #[error("finite-difference probe leaves the simplex")]
    InfeasibleProbe,

    #[error("empty sample")]
    EmptySample,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
