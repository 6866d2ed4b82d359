use thiserror::Error;

/// Errors surfaced by this crate.
///
/// The CLI maps these onto distinct exit codes, so the split matters:
/// `Config` and `Domain` are caller mistakes, `UnsupportedRegime` means the
/// requested closed form does not exist for the given model, `SizeLimit`
/// means an exact computation was refused because it would not fit the
/// budget, and `Validation` reports a failed self-check suite.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error("validation failed: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedRegime(msg.into())
    }

    pub fn size_limit(msg: impl Into<String>) -> Self {
        Error::SizeLimit(msg.into())
    }
}
