use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unbounded a-extent: coordinate {0} has an infinite interval")]
    UnboundedA(usize),

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("step size underflow at t = {t} (h = {h}); the problem may be stiff")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("Riccati solution escaped (norm {norm:e}) at t = {t}")]
    RiccatiBlowUp { t: f64, norm: f64 },

    #[error("point outside graph coverage: {0}")]
    OutsideCoverage(String),

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error("matrix is not in real Jordan form: {0}")]
    NotJordan(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exit pattern not monotone at node {node}: {detail}")]
    NonMonotone { node: usize, detail: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("iteration diverged: {0}")]
    Divergence(String),

    #[error("standing assumption violated: {0}")]
    StandingAssumption(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("parameter `{name}` out of range: {detail}")]
    ParameterRange { name: String, detail: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
