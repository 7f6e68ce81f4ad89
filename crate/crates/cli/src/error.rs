use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", bullet_list(.0))]
    Config(Vec<String>),

    #[error(transparent)]
    Core(#[from] medvocab_core::Error),

    #[error("{0}")]
    Data(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn bullet_list(items: &[String]) -> String {
    items
        .iter()
        .map(|p| format!("  - {p}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn config(problem: impl Into<String>) -> Self {
        CliError::Config(vec![problem.into()])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration problems, 4 for violated internal invariants and
    /// 3 for everything the input data caused.
    pub fn exit_code(&self) -> u8 {
        use medvocab_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::InvalidArgument(_)) => 2,
            CliError::Core(E::Invariant(_)) => 4,
            CliError::Core(_) | CliError::Data(_) | CliError::Io { .. } => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
