use std::fmt;
use std::path::PathBuf;

use crate::language::LanguageCode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A language with fewer in-range sentences than a split asked for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortfall {
    pub language: LanguageCode,
    pub available: usize,
    pub requested: usize,
}

impl fmt::Display for Shortfall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} available, {} requested",
            self.language, self.available, self.requested
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown language code {0:?}")]
    UnknownLanguage(String),
    #[error("line {line}: unknown language code {code:?}")]
    UnknownLanguageAt { line: usize, code: String },
    #[error("line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("insufficient data: {}", join(.0))]
    InsufficientData(Vec<Shortfall>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no text is long enough to produce a single n-gram")]
    EmptyVocabulary,
    #[error("class {0} has no training samples")]
    EmptyClass(LanguageCode),
    #[error("training label {0} is not one of the declared classes")]
    UndeclaredClass(LanguageCode),
    #[error("corpus for {0} is empty")]
    EmptyCorpus(LanguageCode),
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("checksum mismatch in {0}")]
    ChecksumMismatch(String),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("prediction count {found} does not match test set size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(items: &[Shortfall]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
