use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: {msg}")]
    Domain { line: usize, msg: String },

    #[error("invalid parameter `{param}`: {msg}")]
    Param { param: &'static str, msg: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("instance too large: {len} intervals (limit {limit})")]
    TooLarge { len: usize, limit: usize },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(param: &'static str, msg: impl Into<String>) -> Self {
        Error::Param {
            param,
            msg: msg.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
