use std::fmt;

use qrsteg_core::ErrorKind;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qrsteg_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File { path: String, source: qrsteg_core::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Usage = 2,
    Format = 3,
    Crypto = 4,
    Capacity = 5,
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exit::Ok => "ok",
            Exit::Usage => "usage",
            Exit::Format => "format",
            Exit::Crypto => "crypto",
            Exit::Capacity => "capacity",
        })
    }
}

fn core_exit(e: &qrsteg_core::Error) -> Exit {
    match e.kind() {
        ErrorKind::Format => Exit::Format,
        ErrorKind::Crypto => Exit::Crypto,
        ErrorKind::Capacity => Exit::Capacity,
        ErrorKind::Input => Exit::Usage,
    }
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Core(e) | CliError::File { source: e, .. } => core_exit(e),
            CliError::Usage(_) => Exit::Usage,
            CliError::Csv(_) => Exit::Format,
        }
    }

    /// One JSON object on one line, for scripts that wrap the tool.
    pub fn machine_line(&self) -> String {
        let exit = self.exit();
        serde_json::json!({ "error": exit.to_string(), "code": exit as i32, "message": self.to_string() }).to_string()
    }
}

/// Attaches a file path to a core error.
pub trait WithPath<T> {
    fn at(self, path: &std::path::Path) -> CliResult<T>;
}

impl<T> WithPath<T> for qrsteg_core::Result<T> {
    fn at(self, path: &std::path::Path) -> CliResult<T> {
        self.map_err(|source| CliError::File { path: path.display().to_string(), source })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}
