use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{message}")]
    Integrator { message: String, t_reached: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Integrator { .. } => 3,
            CliError::Io { .. } => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Integrator { .. } => "integrator",
            CliError::Io { .. } => "io",
            CliError::Other(_) => "error",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// One line, `key=value` fields, message last and quoted.
    pub fn machine_line(&self) -> String {
        let msg = self.to_string().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
        match self {
            CliError::Integrator { t_reached, .. } => {
                format!("error kind={} exit={} t_reached={t_reached:e} message=\"{msg}\"", self.kind(), self.exit_code())
            }
            _ => format!("error kind={} exit={} message=\"{msg}\"", self.kind(), self.exit_code()),
        }
    }
}

impl From<dimer::Error> for CliError {
    fn from(e: dimer::Error) -> Self {
        if let Some(t_reached) = e.time_reached() {
            return CliError::Integrator { message: e.to_string(), t_reached };
        }
        let root = match &e {
            dimer::Error::Scenario { source, .. } => source.as_ref(),
            other => other,
        };
        match root {
            dimer::Error::UnknownScenario { .. }
            | dimer::Error::UnknownObservable { .. }
            | dimer::Error::UnknownState { .. }
            | dimer::Error::InvalidParams(_)
            | dimer::Error::InvalidConfig(_)
            | dimer::Error::ZeroSeparation => CliError::Usage(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}
