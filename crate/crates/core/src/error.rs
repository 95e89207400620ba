use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown featlet `{0}`")]
    UnknownFeatlet(String),

    #[error("invalid template `{0}`")]
    InvalidTemplate(String),

    #[error("probe set is empty")]
    EmptyProbeSet,

    #[error("feature set for stage {0} is empty")]
    EmptyFeatureSet(&'static str),

    #[error("product `{product}` violates the {stage} featlet constraint")]
    StageConstraint {
        stage: &'static str,
        product: String,
    },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl AsRef<str>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().to_string(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
