use thiserror::Error;

/// Errors produced by graph construction, game loading and the solvers.
///
/// Agent labels inside messages are 1-based, matching the document formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have at least one agent")]
    NoAgents,
    #[error("agent {agent} out of range 1..={n}")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("self-loop on agent {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("action dependency graph contains a cycle through agent {0}")]
    Cycle(usize),
    #[error("decision order is not a permutation of 1..={0}")]
    InvalidPermutation(usize),
    #[error("decision order places agent {to} before its dependency {from}")]
    OrderInconsistent { from: usize, to: usize },
    #[error("graph size mismatch: {0} vs {1} agents")]
    SizeMismatch(usize, usize),
    #[error("position {position} out of range 1..={n}")]
    PositionOutOfRange { position: usize, n: usize },
    #[error("exhaustive search limited to {max} agents, got {n}")]
    TooManyAgents { n: usize, max: usize },
    #[error("joint action space of size {size} exceeds the enumeration cap {cap}")]
    EnumerationCap { size: u128, cap: u64 },
    #[error("unknown built-in instance `{0}`")]
    UnknownInstance(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("transition at state {state}, joint action {action:?} is not a distribution: {reason}")]
    InvalidTransition {
        state: usize,
        action: Vec<usize>,
        reason: String,
    },
    #[error("game has no transition tables")]
    MissingTransitions,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("operation requires an independent (empty-ADG) policy")]
    NotIndependent,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular linear system in policy evaluation")]
    Singular,
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the error stems from bad input rather than an internal failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Singular | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
