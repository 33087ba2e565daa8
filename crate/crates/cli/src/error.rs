use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Schema(String),

    #[error("config: {module}: {source}")]
    Build {
        module: &'static str,
        #[source]
        source: charmat_core::Error,
    },

    #[error("{module}: {source}")]
    Numeric {
        module: &'static str,
        #[source]
        source: charmat_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Schema(_) | Self::Build { .. } => 2,
            Self::Numeric { .. } | Self::Io { .. } | Self::ChecksFailed(_) => 1,
        }
    }
}

/// Tags a core error with the module it came from.
pub trait Provenance<T> {
    fn numeric(self, module: &'static str) -> Result<T, CliError>;
    fn config(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> Provenance<T> for charmat_core::Result<T> {
    fn numeric(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numeric { module, source })
    }

    fn config(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Build { module, source })
    }
}
