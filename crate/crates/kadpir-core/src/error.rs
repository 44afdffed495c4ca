use crate::scheme::SchemeId;

/// Errors surfaced by the PIR layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("row index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },

    #[error("scheme {scheme} does not support {rows} rows of width {row_width}: {reason}")]
    Unsupported {
        scheme: SchemeId,
        rows: usize,
        row_width: usize,
        reason: &'static str,
    },

    #[error("scheme mismatch: state built for {state}, message tagged {message}")]
    SchemeMismatch { state: SchemeId, message: SchemeId },

    #[error("database has {db_rows} rows but the query declared only {declared}")]
    DeclaredRowsTooSmall { db_rows: usize, declared: usize },

    #[error("record of {len} bytes does not fit a row of width {row_width}")]
    RecordTooLong { len: usize, row_width: usize },

    #[error("database must contain at least one row")]
    EmptyDatabase,

    #[error("malformed message: {0}")]
    Malformed(String),

    #[error("decryption failure: {0}")]
    DecryptionFailure(String),

    #[error("substitution exponent {0} is unreachable with the available keys")]
    UnreachableExponent(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
