use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("{name} = {value} is outside its admissible range: {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: String,
    },

    #[error("difference node {node} lies outside the domain [{lo}, {hi}]")]
    NodeOutsideDomain { node: f64, lo: f64, hi: f64 },

    #[error("unknown function id `{0}`")]
    UnknownFunction(String),

    #[error("duplicate function id `{0}`")]
    DuplicateFunction(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("linear system for the reference is singular")]
    SingularReference,

    #[error("minimax iteration did not certify: bracket [{lo:e}, {hi:e}]")]
    NotCertified { lo: f64, hi: f64 },

    #[error("malformed configuration: {0}")]
    Config(String),

    #[error("report serialization failed: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, constraint: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            value,
            constraint: constraint.into(),
        }
    }
}
