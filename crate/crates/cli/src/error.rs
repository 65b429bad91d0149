use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("numerical failure: {0}")]
    Numeric(bbm_core::Error),

    #[error("threshold failure: {0}")]
    Threshold(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<bbm_core::Error> for CliError {
    /// Parameter errors raised by the core name the offending field.
    fn from(err: bbm_core::Error) -> Self {
        match err {
            bbm_core::Error::InvalidParameter { name, reason } => Self::Config {
                path: name.to_string(),
                reason,
            },
            other => Self::Numeric(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numeric(_) | Self::Io(_) => 1,
            Self::Config { .. } => 2,
            Self::Threshold(_) => 3,
        }
    }

    /// Machine-readable record written next to the artifacts.
    pub fn record(&self) -> serde_json::Value {
        let mut record = serde_json::json!({
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        let kind = match self {
            Self::Config { path, .. } => {
                record["path"] = path.clone().into();
                "config"
            }
            Self::Numeric(bbm_core::Error::Divergence { step, time }) => {
                record["step"] = (*step).into();
                record["time"] = (*time).into();
                "divergence"
            }
            Self::Numeric(bbm_core::Error::NoConvergence { iterations, history, .. }) => {
                record["iterations"] = (*iterations).into();
                record["history"] = history.clone().into();
                "no_convergence"
            }
            Self::Numeric(_) => "numeric",
            Self::Threshold(_) => "threshold",
            Self::Io(_) => "io",
        };
        record["kind"] = kind.into();
        record
    }
}
