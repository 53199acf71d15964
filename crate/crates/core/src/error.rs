use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("reserved word `{word}` used as a variable at {line}:{column}")]
    ReservedWord {
        word: String,
        line: usize,
        column: usize,
    },

    #[error("invalid variable name `{0}`")]
    InvalidName(String),

    #[error("duplicate variable `{0}` in ordered variable set")]
    DuplicateVariable(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("quantifier encountered in a formula required to be quantifier-free")]
    UnexpectedQuantifier,

    #[error("formula is not closed; free variables: {}", .0.join(", "))]
    FreeVariables(Vec<String>),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("renaming into `{0}` would be captured by a quantifier")]
    VariableCapture(String),

    #[error("enumeration budget exceeded: need {needed} variables, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("order search over {agents} agents exceeds the limit of {max}")]
    TooManyOrders { agents: usize, max: usize },

    #[error("variable `{var}` is shared by agents `{first}` and `{second}`")]
    OverlappingVariables {
        var: String,
        first: String,
        second: String,
    },

    #[error("constraint uses variable `{0}` owned by no agent")]
    UnknownVariable(String),

    #[error("agent index {index} out of range for a mechanism with {agents} agents")]
    AgentOutOfRange { index: usize, agents: usize },

    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),

    #[error("agent `{agent}` has no action labelled `{label}`")]
    UnknownLabel { agent: String, label: String },

    #[error("agent `{0}` has no action labels")]
    MissingActions(String),

    #[error("invalid action encoding for agent `{agent}`: {message}")]
    InvalidAction { agent: String, message: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("fresh variable `{0}` collides with an existing variable")]
    FreshCollision(String),

    #[error("brute-force and QBF verdicts diverge on {class}: brute={brute}, qbf={qbf}\n{details}")]
    Divergence {
        class: String,
        brute: bool,
        qbf: bool,
        details: String,
    },

    #[error("malformed QDIMACS at line {line}: {message}")]
    Qdimacs { line: usize, message: String },

    #[error("QBF solver `{0}` could not be started")]
    SolverMissing(String),

    #[error("QBF solver timed out after {0:?}")]
    SolverTimeout(std::time::Duration),

    #[error("QBF solver produced no verdict: {0}")]
    SolverOutput(String),

    #[error("{0}")]
    Io(String),

    #[error("invalid mechanism file: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
