use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems with region markers inside a single file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkerError {
    #[error("{path}:{line}: unbalanced region marker")]
    Unbalanced { path: String, line: usize },
    #[error("{path}:{line}: region begin marker inside an open region")]
    Nested { path: String, line: usize },
    #[error("{path}:{line}: region marker in a file with `open` visibility")]
    InOpenFile { path: String, line: usize },
}

impl MarkerError {
    pub fn with_path(self, path: &str) -> Self {
        match self {
            MarkerError::Unbalanced { line, .. } => MarkerError::Unbalanced { path: path.to_owned(), line },
            MarkerError::Nested { line, .. } => MarkerError::Nested { path: path.to_owned(), line },
            MarkerError::InOpenFile { line, .. } => MarkerError::InOpenFile { path: path.to_owned(), line },
        }
    }
}

/// Pipeline stage an error was raised in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Forward,
    Select,
    Invalidate,
    Schedule,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Forward => "forward",
            Stage::Select => "select",
            Stage::Invalidate => "invalidate",
            Stage::Schedule => "schedule",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("reference error: {0}")]
    Reference(String),
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error(transparent)]
    Marker(#[from] MarkerError),
    #[error("patch does not apply: {0}")]
    Apply(String),
    #[error("conflict needs human review: {0}")]
    Conflict(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("soc `{0}` already exists")]
    DuplicateSoc(String),
    #[error("unknown soc family `{0}`")]
    UnknownFamily(String),
    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Innermost error, with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
