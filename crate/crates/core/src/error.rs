use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },

    #[error("node index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("node counts differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cannot combine a directed and an undirected network")]
    DirectednessMismatch,

    #[error("operation requires an undirected network")]
    DirectedUnsupported,

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("degenerate denominator: both networks have zero cycle count")]
    DegenerateDenominator,

    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("n = {n} exceeds the enumeration limit of {limit}")]
    TooLargeForEnumeration { n: usize, limit: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Bernoulli matrix entry ({i}, {j}) = {value} is outside [0, 1)")]
    ProbabilityOutOfRange { i: usize, j: usize, value: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("target SNR {target} unreachable; achievable range over the bracket is [{min}, {max}]")]
    TargetUnreachable { target: f64, min: f64, max: f64 },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
