use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("{what} exceeded cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("oracle returned zero for non-identity word `{0}`")]
    TotalityBreach(String),

    #[error("radius {needed} exceeds oracle validity radius {available}")]
    ValidityExceeded { needed: u32, available: u32 },

    #[error("word `{word}` lies outside the scope radius {radius}")]
    OutOfScope { word: String, radius: u32 },

    #[error("Magnus truncation at degree {degree} cannot separate `{word}` from the identity")]
    TruncationTooSmall { word: String, degree: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("tie-at-scale: `{0}` fixes every reference point")]
    TieAtScale(String),

    #[error("oracle inconsistency: {0}")]
    Inconsistent(String),

    #[error("non-monotone input: {0}")]
    NonMonotone(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("postcondition violated: {0}")]
    Postcondition(String),
}

impl Error {
    /// CLI exit status: validation failures 2, resource caps 3, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownGenerator(_) | Error::Parse(_) | Error::Invalid(_) => 2,
            Error::ValidityExceeded { .. } | Error::Unsupported(_) => 2,
            Error::CapExceeded { .. } => 3,
            _ => 1,
        }
    }
}
