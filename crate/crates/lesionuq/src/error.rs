use std::io;
use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: bad magic {found:?}, expected \"UQS1\"", path.display())]
    BadMagic { path: PathBuf, found: [u8; 4] },

    #[error("{}: truncated file: need {expected} bytes, found {found}", path.display())]
    TruncatedFile { path: PathBuf, expected: u64, found: u64 },

    #[error("{}: {found} bytes where {expected} were expected", path.display())]
    TrailingData { path: PathBuf, expected: u64, found: u64 },

    #[error("{}: unsupported format: {reason}", path.display())]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{}:{line}: duplicate id {id:?}", path.display())]
    DuplicateId { path: PathBuf, line: usize, id: String },

    #[error("{}:{line}: unknown class {class:?} (expected melanoma, nevus or seborrheic_keratosis)", path.display())]
    UnknownClass { path: PathBuf, line: usize, class: String },

    #[error("{}:{line}: missing or non-string key {key:?}", path.display())]
    MissingKey { path: PathBuf, line: usize, key: &'static str },

    #[error("{}:{line}: {source}", path.display())]
    ManifestSyntax { path: PathBuf, line: usize, source: serde_json::Error },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("{context}: {source}")]
    Analysis { context: String, source: lesionuq_core::Error },

    #[error("{} not found; run `lesionuq {hint}` first", path.display())]
    MissingUpstream { path: PathBuf, hint: &'static str },

    #[error("{0}")]
    Inconsistent(String),

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<Path>) -> impl FnOnce(io::Error) -> Error {
        let path = path.as_ref().to_path_buf();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn csv(path: impl AsRef<Path>) -> impl FnOnce(csv::Error) -> Error {
        let path = path.as_ref().to_path_buf();
        move |source| {
            if source.is_io_error() {
                match source.into_kind() {
                    csv::ErrorKind::Io(source) => Error::Io { path, source },
                    _ => unreachable!(),
                }
            } else {
                Error::Csv { path, source }
            }
        }
    }

    pub(crate) fn json(path: impl AsRef<Path>) -> impl FnOnce(serde_json::Error) -> Error {
        let path = path.as_ref().to_path_buf();
        move |source| Error::Json { path, source }
    }

    pub(crate) fn analysis(context: impl Into<String>) -> impl FnOnce(lesionuq_core::Error) -> Error {
        let context = context.into();
        move |source| Error::Analysis { context, source }
    }

    /// Process exit code: 2 configuration, 3 I/O, 4 data validation,
    /// 5 statistical precondition.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } | Error::MissingUpstream { .. } => 3,
            Error::Analysis { source, .. } if source.is_statistical() => 5,
            Error::Analysis { source: lesionuq_core::Error::InvalidConfig(_), .. } => 2,
            _ => 4,
        }
    }
}
