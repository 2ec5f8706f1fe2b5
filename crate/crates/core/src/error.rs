use thiserror::Error;

/// Errors produced by the backtesting library.
///
/// The variants map onto three caller-facing classes: bad arguments
/// ([`Error::Domain`], [`Error::Contract`], [`Error::Usage`]) and bad input
/// data ([`Error::Data`], [`Error::Io`]). See [`Error::is_data_error`].
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The request itself is malformed (empty input, unknown format, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Input data failed validation. `row` is the 1-based data row, if known.
    #[error("{}", format_data(*.row, .message))]
    Data { row: Option<usize>, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn format_data(row: Option<usize>, message: &str) -> String {
    match row {
        Some(row) => format!("data error at row {row}: {message}"),
        None => format!("data error: {message}"),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn data(row: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Data {
            row,
            message: msg.into(),
        }
    }

    /// True for errors caused by the input data rather than by the request.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Data { .. } | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
