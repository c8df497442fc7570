use fixwit_core::instance::ModelError;
use fixwit_core::rational::ParseRationalError;
use fixwit_core::game::GameError;
use fixwit_core::{FixpointError, LatticeError, WitnessError};

/// Errors surfaced by the CLI and the server. `exit_code` maps them to the
/// process status: 2 for usage errors, 1 for everything else.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{context}: {message} (at column {column})")]
    Syntax { context: String, message: String, column: usize },
    #[error("{0}")]
    Usage(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("malformed JSON in {what}: {source}")]
    Json { what: String, source: serde_json::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Fixpoint(#[from] FixpointError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Game(#[from] GameError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Syntax { .. }
            | CliError::Usage(_)
            | CliError::UnknownState(_)
            | CliError::Model(_)
            | CliError::Json { .. }
            | CliError::Io { .. }
            | CliError::Rational(_)
            | CliError::Lattice(_) => 2,
            CliError::Fixpoint(_) | CliError::Witness(_) | CliError::Game(_) => 1,
        }
    }

    pub fn syntax(context: &str, message: impl Into<String>, column: usize) -> Self {
        CliError::Syntax { context: context.to_string(), message: message.into(), column }
    }
}
