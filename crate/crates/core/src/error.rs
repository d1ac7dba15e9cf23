use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error("{0}")]
    Invalid(String),
    #[error("dataset `{0}` is empty")]
    EmptyDataset(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("dataset name `{0}` already in use")]
    DuplicateName(String),
    #[error("network is empty")]
    EmptyNetwork,
    #[error("partition does not match network: {0}")]
    PartitionMismatch(String),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed xml: {0}")]
    Xml(String),
    #[error("session directory is locked by {0}")]
    Locked(PathBuf),
    #[error("remote source: {0}")]
    Remote(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for errors caused by bad arguments or configuration rather than
    /// by the data being processed.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_) | Error::UnknownFormat(_) | Error::DuplicateName(_)
        )
    }

    /// Short stable identifier of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::UnknownFormat(_) => "unknown-format",
            Error::Invalid(_) => "invalid",
            Error::EmptyDataset(_) => "empty-dataset",
            Error::NotFound(_) => "not-found",
            Error::DuplicateName(_) => "duplicate-name",
            Error::EmptyNetwork => "empty-network",
            Error::PartitionMismatch(_) => "partition-mismatch",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Xml(_) => "xml",
            Error::Locked(_) => "locked",
            Error::Remote(_) => "remote",
        }
    }
}
