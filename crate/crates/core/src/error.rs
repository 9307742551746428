use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {what} needs {needed}, limit {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("z is not realizable: fiber of coordinate {coordinate} (value {value}) is empty")]
    Unrealizable { coordinate: usize, value: u8 },
    #[error("unsupported gadget: {0}")]
    Unsupported(String),
    #[error("not in the biased regime")]
    NotBiased,
    #[error("gadget is in the biased regime")]
    Biased,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("malformed protocol tree: {0}")]
    MalformedTree(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
