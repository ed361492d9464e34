use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite state")]
    NonFiniteState,

    #[error("state must have at least one component")]
    EmptyState,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown problem `{name}`; available: linear-scalar, linear-decay, nonautonomous, zero-rhs")]
    UnknownProblem { name: String },

    #[error("invalid problem: {0}")]
    InvalidProblem(&'static str),

    #[error("invalid mesh: {0}")]
    InvalidMesh(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("integration blow-up at t = {t}")]
    IntegrationBlowUp { t: f64 },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointDidNotConverge { iterations: usize, residual: f64 },

    #[error("contraction violated: h*L = {hl} >= 1")]
    ContractionViolated { hl: f64 },

    #[error("step too large for backward-Euler constant: h = {h} > 1/(2L) = {limit}")]
    StepTooLarge { h: f64, limit: f64 },

    #[error("interval index {index} outside 1..={intervals}")]
    IntervalOutOfRange { index: usize, intervals: usize },

    #[error("order fit needs at least 3 usable points, got {usable}")]
    InsufficientPoints { usable: usize },

    #[error("step sizes must be positive and strictly decreasing")]
    UnorderedSteps,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),

    #[error("problem `{0}` has no closed-form solution")]
    NoExactSolution(String),

    #[error("missing constant `{0}`")]
    MissingConstant(&'static str),
}
