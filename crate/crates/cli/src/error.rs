use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at row {row}, column {column:?}: {message}")]
    Parse { row: usize, column: String, message: String },

    #[error("dates must increase strictly: {date} at row {row}")]
    NonMonotoneDates { row: usize, date: NaiveDate },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("invalid data: {0}")]
    Invalid(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<csv::Error> for IoError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            return IoError::Io(e.to_string());
        }
        let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
        IoError::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e.to_string())
    }
}

/// Process exit codes.
pub mod exit {
    pub const USAGE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const MODEL: i32 = 3;
    pub const IO: i32 = 4;
}

/// Maps an error chain to its exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<IoError>() {
            return match e {
                IoError::Io(_) => exit::IO,
                _ => exit::PARSE,
            };
        }
        if let Some(e) = cause.downcast_ref::<carima_core::Error>() {
            return match e {
                carima_core::Error::Config(_) => exit::USAGE,
                _ => exit::MODEL,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return exit::IO;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() || cause.downcast_ref::<toml::de::Error>().is_some() {
            return exit::PARSE;
        }
        if cause.downcast_ref::<UsageError>().is_some() {
            return exit::USAGE;
        }
    }
    exit::MODEL
}

/// Invalid flag combinations caught after argument parsing.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);
