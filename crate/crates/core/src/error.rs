use thiserror::Error;

/// Errors reported by every layer of the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("formula is not ground: free variable `{0}`")]
    NotGround(String),
    #[error("atom not allowed here: {0}")]
    ForbiddenAtom(String),
    #[error("node `{0}` does not belong to the structure")]
    NotInStructure(String),
    #[error("term depth exceeds the closure bound of {0}")]
    ClosureBound(usize),
    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),
    #[error("operation requires a finite structure")]
    InfiniteStructure,
    #[error("operation requires a homogeneous or finite structure")]
    NotHomogeneous,
    #[error("no equivalence class matches node `{0}`")]
    UnknownClass(String),
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("invalid update for command `{command}`: {message}")]
    InvalidUpdate { command: String, message: String },
    #[error("tuple lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("tuples are not locally isomorphic")]
    NotLocallyIsomorphic,
    #[error("triple is not in normal form: {0}")]
    NotNormal(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("configuration mentions a predicate unknown to the automaton: `{0}`")]
    BadConfiguration(String),
    #[error("resource limit reached: {0}")]
    Limit(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
