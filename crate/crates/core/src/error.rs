use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),

    #[error("unknown correspondence `{0}`")]
    UnknownCorrespondence(String),

    #[error("exact evaluation needs {needed} answer classes, above the cap of 2^{cap}; use monte carlo mode")]
    CapExceeded { needed: usize, cap: u32 },

    #[error("instance too large for exhaustive search: {size} correspondences (limit {limit})")]
    InstanceTooLarge { size: usize, limit: usize },

    #[error("answer on `{0}` contradicts every view with non-zero probability")]
    InconsistentAnswer(String),

    #[error("abbreviation template requires a non-empty schema name")]
    MissingSchemaName,

    #[error("ground truth has no verdict for correspondence `{0}`")]
    GroundTruthMissing(String),

    #[error("transcript has no entry for correspondence `{0}`")]
    TranscriptMiss(String),

    #[error("environment variable {0} is not set")]
    MissingApiKey(&'static str),

    #[error("http request failed: {0}")]
    HttpFailure(String),

    #[error("could not parse oracle response: {0}")]
    ParseFailure(String),

    #[error("no matcher produced any correspondence for these schemas")]
    DegenerateSchemas,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn json(path: impl AsRef<std::path::Path>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for failures that originate in an oracle backend.
    pub fn is_oracle_failure(&self) -> bool {
        matches!(
            self,
            Error::GroundTruthMissing(_)
                | Error::TranscriptMiss(_)
                | Error::MissingApiKey(_)
                | Error::HttpFailure(_)
                | Error::ParseFailure(_)
                | Error::MissingSchemaName
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Json { .. })
    }
}
