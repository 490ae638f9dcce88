use thiserror::Error;

/// Errors raised by model ingestion and the analysis operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate event `{0}`")]
    DuplicateEvent(String),
    #[error("duplicate transition ({0}, {1}) -> {2}")]
    DuplicateTransition(String, String, String),
    #[error("nondeterministic transition: ({state}, {event}) leads to both {first} and {second}")]
    Nondeterministic {
        state: String,
        event: String,
        first: String,
        second: String,
    },
    #[error("model must declare at least one state")]
    NoStates,
    #[error("model has {count} {kind}; at most {max} are supported")]
    TooLarge {
        kind: &'static str,
        count: usize,
        max: usize,
    },
    #[error("invalid control decision: uncontrollable event `{0}` is disabled")]
    InvalidDecision(String),
    #[error("string is not in the plant language: event {position} is undefined")]
    NotInPlantLanguage { position: usize },
    #[error("string disabled by supervisor at position {position}")]
    DisabledBySupervisor { position: usize },
    #[error("supervisor has no decision for observation of length {length}")]
    PolicyUndefined { length: usize },
    #[error("event not enabled at estimator state")]
    NotEnabled,
    #[error("decision changed on a supervisor-unobservable event at position {position}")]
    DecisionChangedSilently { position: usize },
    #[error("malformed flow: {0}")]
    MalformedFlow(String),
    #[error("malformed trace at line {line}: {message}")]
    MalformedTrace { line: usize, message: String },
    #[error("unreachable observation: no behavior matches the first {position} observed events")]
    UnreachableObservation { position: usize },
    #[error("observation infeasible at position {position}")]
    InfeasibleObservation { position: usize },
    #[error("invalid control structure: {0}")]
    InvalidStructure(String),
    #[error("invalid supervisor policy: {0}")]
    InvalidPolicy(String),
    #[error(
        "size guard exceeded: {decision_states} decision states and {observation_states} \
         observation states explored (limit {limit})"
    )]
    SizeGuard {
        limit: usize,
        decision_states: usize,
        observation_states: usize,
    },
}

impl Error {
    pub(crate) fn syntax(err: &serde_json::Error) -> Self {
        Error::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
