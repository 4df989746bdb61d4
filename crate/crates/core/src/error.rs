use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("invalid group specification: {0}")]
    InvalidSpec(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("malformed exponent `{0}`")]
    MalformedExponent(String),

    #[error("elements belong to different group contexts")]
    ContextMismatch,

    #[error("operation requires a finitely presented context")]
    NotFp,

    #[error("no quotient with index {0}")]
    NoSuchQuotient(usize),

    #[error("the ball of infinite radius is only available for finite groups")]
    InfiniteBall,

    #[error("symbols of kind {0} have a permanent co-orientation and cannot be reversed")]
    NotReversible(char),

    #[error("arity mismatch: expected {expected} entries, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("cannot merge group ring terms: equality of `{0}` and `{1}` is undecided")]
    UnknownMerge(String, String),

    #[error("tuples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("assignment is not total: missing value for universe index {0}")]
    PartialAssignment(usize),

    #[error("symbol `{0}` does not lie in the universe")]
    OutsideUniverse(String),

    #[error("element does not belong to the target group: {0}")]
    GroupMismatch(String),
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }
}
