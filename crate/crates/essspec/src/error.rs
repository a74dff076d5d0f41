//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdent { offset: usize, name: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("lambda is within {distance:e} of an eigenvalue of D(t)")]
    Pole { distance: f64 },
    #[error("limit diverges (sign {sign})")]
    Diverged { sign: i8 },
    #[error("limit does not settle (oscillatory tableau)")]
    Oscillatory,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("case not uniform; split the window ({0})")]
    CaseNotUniform(String),
    #[error("not Case III: {0}")]
    NotCaseIII(String),
    #[error("Lane-Emden solution has no zero before t_max = {t_max}")]
    NoZero { t_max: f64 },
    #[error("{module}: {source}")]
    Context {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Tags the error with the module it surfaced from; nested tags keep the innermost.
    pub fn in_module(self, module: &'static str) -> Self {
        match self {
            e @ Error::Context { .. } => e,
            e => Error::Context {
                module,
                source: Box::new(e),
            },
        }
    }

    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for input problems (bad expressions, configs, models) as opposed to numeric failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self.root(),
            Error::Syntax { .. }
                | Error::UnknownIdent { .. }
                | Error::Model(_)
                | Error::Config { .. }
                | Error::NotCaseIII(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
