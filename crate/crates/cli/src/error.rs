use std::path::PathBuf;

use es_core::dynamics::MonitorFailure;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("gate failed: {0}")]
    Gate(String),

    #[error("monitor {:?} tripped at t = {} (value {:e}, threshold {:e})", .0.kind, .0.t, .0.value, .0.threshold)]
    Monitor(MonitorFailure),

    #[error("numerical fault: {0}")]
    Numerical(es_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Output(String),
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Output(_) => 1,
            CliError::Config(_) => 2,
            CliError::Gate(_) => 3,
            CliError::Monitor(f) if f.kind == es_core::dynamics::MonitorKind::NonFinite => 5,
            CliError::Monitor(_) => 4,
            CliError::Numerical(_) => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<es_core::Error> for CliError {
    fn from(e: es_core::Error) -> Self {
        use es_core::Error as E;
        match e {
            E::InvalidParameter(m) => CliError::Config(m),
            E::GateFailed(m) => CliError::Gate(m),
            E::Io(source) => CliError::Io {
                path: PathBuf::new(),
                source,
            },
            other => CliError::Numerical(other),
        }
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_GATE: u8 = 3;
pub const EXIT_MONITOR: u8 = 4;
pub const EXIT_NUMERICAL: u8 = 5;
