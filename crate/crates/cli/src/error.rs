use std::fmt;

use gie_core::Error as CoreError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_TRUNCATION: i32 = 4;

/// One problem with one config field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(Vec<FieldError>),
    Numerical(String),
    Truncation(String),
    Io(String),
}

impl CliError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config(vec![FieldError {
            field: field.into(),
            message: message.into(),
        }])
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Truncation(_) => EXIT_TRUNCATION,
            CliError::Io(_) => EXIT_IO,
        }
    }

    /// Attributes a core error raised while running `context`.
    pub fn from_core(context: &str, e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { name, reason } => {
                CliError::field(format!("{context}.{name}"), reason)
            }
            CoreError::Units(m) | CoreError::Dimension(m) | CoreError::UnknownLabel(m) => {
                CliError::field(context, m)
            }
            CoreError::Truncation { .. } => CliError::Truncation(format!("{context}: {e}")),
            CoreError::Numerical(_) | CoreError::Quadrature { .. } | CoreError::InvalidState(_) => {
                CliError::Numerical(format!("{context}: {e}"))
            }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(errs) => {
                writeln!(f, "invalid configuration:")?;
                for e in errs {
                    writeln!(f, "  {e}")?;
                }
                Ok(())
            }
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Truncation(m) => write!(f, "truncation leakage: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
