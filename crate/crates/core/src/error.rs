use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("order violation at index {index}: lower {lower} > upper {upper}")]
    OrderViolation { index: usize, lower: f64, upper: f64 },
    #[error("non-finite interval endpoint at index {0}")]
    NonFinite(usize),
    #[error("negative perturbation {value} at index {index}")]
    NegativePerturbation { index: usize, value: f64 },
    #[error("division by an interval containing zero: [{lower}, {upper}]")]
    DivisionByIntervalContainingZero { lower: f64, upper: f64 },
    #[error("domain error in {op} on [{lower}, {upper}]")]
    Domain { op: &'static str, lower: f64, upper: f64 },
    #[error("unsupported primitive `{0}`")]
    UnsupportedPrimitive(String),
    #[error("shape inference failed: {0}")]
    ShapeInference(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("primitive `{0}` is not differentiable on the given box")]
    NonDifferentiable(&'static str),
    #[error("center lies outside the evaluation box (coordinate {0})")]
    CenterOutsideBox(usize),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("decomposition arguments are not ordered")]
    UnorderedArguments,
    #[error("invalid integration settings: {0}")]
    InvalidStep(String),
    #[error("non-finite state at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },
    #[error("network schema error: {0}")]
    Schema(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported activation `{0}`")]
    UnsupportedActivation(String),
    #[error("invalid partition divisions: {0}")]
    InvalidDivisions(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("optimizer did not reach feasibility (worst violation {violation:e})")]
    NonConvergence { violation: f64 },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
