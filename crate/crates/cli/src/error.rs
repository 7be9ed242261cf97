use std::fmt;

/// Failure classes with stable exit codes: 2 for usage, parse and I/O
/// problems, 3 for analysis failures on well-formed input.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(_) => 3,
        }
    }

    pub fn analysis(e: impl fmt::Display) -> Self {
        CliError::Analysis(e.to_string())
    }

    pub fn usage(e: impl fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Analysis(m) => write!(f, "analysis error: {m}"),
        }
    }
}
