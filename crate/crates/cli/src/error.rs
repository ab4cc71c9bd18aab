use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] homoeoid::Error),
    #[error("no run artifacts under {0}")]
    EmptyDirectory(String),
}

impl CliError {
    /// 2 for anything the caller could fix, 1 for failures during a run.
    pub fn exit_code(&self) -> i32 {
        use homoeoid::Error as E;
        match self {
            Self::Core(E::InsufficientData(_) | E::Singular | E::NonConvergent { .. } | E::DegenerateIntersection) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.to_string())
    }
}
