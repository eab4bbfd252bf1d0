use thiserror::Error;

/// Errors raised while reading, building or analysing a microgrid.
#[derive(Debug, Error)]
pub enum Error {
    /// A document or record is malformed. `locus` names the offending record,
    /// e.g. `lines[1]`.
    #[error("{locus}: {message}")]
    Model { locus: String, message: String },

    #[error("per-unit normalization: {0}")]
    PerUnit(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("solver configuration: {0}")]
    Config(String),

    #[error("measurement comparison: {0}")]
    Compare(String),

    #[error("unsupported format_version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn model(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Model {
            locus: locus.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
