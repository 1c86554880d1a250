//! Process-level error taxonomy: configuration problems exit 1, file and
//! format problems exit 2, numeric failures exit 3.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<inrf_core::Error> for CliError {
    fn from(e: inrf_core::Error) -> Self {
        use inrf_core::Error;
        match &e {
            Error::InvalidParam(_)
            | Error::Incompatible(_)
            | Error::UnsupportedDerivative(_)
            | Error::EmptyMeasurement => CliError::Config(e.to_string()),
            Error::Signal(_) => CliError::Io(e.to_string()),
            Error::NonFinite { .. } | Error::Nyquist { .. } | Error::WindowTruncation { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attach the offending path to a raw I/O error.
pub fn io_at(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
