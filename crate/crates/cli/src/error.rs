use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", config_message(.line, .field, .message))]
    Config {
        line: Option<usize>,
        field: String,
        message: String,
    },
    #[error("numerical failure: {0}")]
    Numerical(#[from] ratchet::Error),
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn config_message(line: &Option<usize>, field: &str, message: &str) -> String {
    match line {
        Some(line) => format!("config line {line}, field '{field}': {message}"),
        None => format!("config field '{field}': {message}"),
    }
}

impl CliError {
    pub fn config(line: Option<usize>, field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// 1 for configuration and I/O problems, 2 for numerical failures,
    /// 3 for failed verification checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<ratchet::Aborted> for CliError {
    fn from(a: ratchet::Aborted) -> Self {
        CliError::Numerical(a.into())
    }
}
