use std::fmt;

use gts_core::GtsError;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(msg: impl fmt::Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: msg.to_string(),
        }
    }

    pub fn numeric(msg: impl fmt::Display) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: msg.to_string(),
        }
    }

    pub fn not_converged(msg: impl fmt::Display) -> Self {
        Self {
            code: EXIT_NOT_CONVERGED,
            message: msg.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Bad files, arguments and parameters are input errors; everything else is numeric.
impl From<GtsError> for CliError {
    fn from(e: GtsError) -> Self {
        match e {
            GtsError::Io(_)
            | GtsError::Parse { .. }
            | GtsError::EmptySample
            | GtsError::InvalidArgument(_)
            | GtsError::Domain { .. }
            | GtsError::Degenerate(_) => CliError::input(e),
            _ => CliError::numeric(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e)
    }
}
