use std::fmt;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// A failure carrying the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: msg.into(),
        }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: msg.into(),
        }
    }

    /// Prefix the message with the pipeline stage that failed.
    pub fn at(mut self, stage: &str) -> Self {
        self.message = format!("{stage}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<levyfit::Error> for CliError {
    fn from(e: levyfit::Error) -> Self {
        use levyfit::Error as E;
        let code = match &e {
            E::Config(_) | E::ParameterDomain(_) => EXIT_CONFIG,
            E::Data(_) | E::Degenerate(_) => EXIT_DATA,
            E::Quadrature { .. }
            | E::PathExplosion { .. }
            | E::Initialization(_)
            | E::Optimization(_) => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
