use thiserror::Error;

use crate::system::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet must be nonempty with unique symbols: {0}")]
    InvalidAlphabet(String),

    #[error("duplicate factor id `{0}` in product space")]
    DuplicateFactor(String),

    #[error("column {column} is not stochastic: {reason}")]
    NonStochastic { column: usize, reason: String },

    #[error("table shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("unknown symbol `{symbol}` for `{factor}`")]
    UnknownSymbol { factor: String, symbol: String },

    #[error("function table is not total: missing output for input {0}")]
    NotTotal(String),

    #[error("space mismatch: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("factor id `{0}` occurs on both sides of a tensor product")]
    FactorCollision(String),

    #[error("map is not surjective: row {row} is all zero{}", subsystem.as_ref().map(|s| format!(" (subsystem {s})")).unwrap_or_default())]
    NotSurjective {
        row: String,
        subsystem: Option<String>,
    },

    #[error("unknown factor `{0}`")]
    UnknownFactor(String),

    #[error("time window is empty")]
    EmptyWindow,

    #[error("temperature must be positive")]
    NonpositiveTemperature,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("invalid system: {}", violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidSystem { violations: Vec<Violation> },

    #[error("budget exceeded: {count} {what} > limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        count: usize,
        limit: usize,
    },

    #[error("occasion `{0}` is not a target of the subsystem")]
    NotATarget(String),

    #[error("subsystem has no effective pairs")]
    EmptySubsystem,

    #[error("{inner} is not contained in {outer}")]
    NotASubsystem { inner: String, outer: String },

    #[error("sections disagree on their overlap: {0}")]
    Incompatible(String),

    #[error("glued column {column} sums to {sum}, not 1")]
    NotStochastic { column: usize, sum: String },

    #[error("context {context} is not contained in {subsystem}")]
    ContextNotContained { context: String, subsystem: String },

    #[error("output places weight on `{0}`, which no input can produce")]
    UnsupportedOutput(String),

    #[error("not a partition of the sources: {0}")]
    NotAPartition(String),

    #[error("output `{0}` is not in the image")]
    NotInImage(String),

    #[error("function is not surjective: `{0}` is never produced")]
    NotSurjectiveFunction(String),

    #[error("{0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Whether this error came from reading or decoding input rather than
    /// from the analysis itself.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Parse(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
