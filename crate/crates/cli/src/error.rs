use thiserror::Error;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<rfcoh::Error> for CliError {
    fn from(e: rfcoh::Error) -> Self {
        use rfcoh::Error as E;
        let msg = e.to_string();
        match e {
            E::Io(_) => CliError::Io(msg),
            E::Parse { .. }
            | E::InvalidParameter { .. }
            | E::SimConfig(_)
            | E::GridTooCoarse { .. }
            | E::GridTooNarrow { .. }
            | E::LagExceedsDuration { .. }
            | E::LabelCollision(_)
            | E::Empty(_)
            | E::FitPrecondition(_)
            | E::OracleRequiresIdealPhotons { .. } => CliError::Config(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
