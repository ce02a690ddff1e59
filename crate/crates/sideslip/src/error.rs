use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: malformed header {found:?}")]
    MalformedHeader { path: PathBuf, found: Vec<String> },

    #[error("{path}:{line}: expected {expected} fields, found {found}")]
    RowArity { path: PathBuf, line: u64, expected: usize, found: usize },

    #[error("{path}:{line}: time does not increase")]
    NonMonotoneTime { path: PathBuf, line: u64 },

    #[error("{path}:{line}: sample spacing {dt} s is not 0.02 s")]
    IrregularSpacing { path: PathBuf, line: u64, dt: f64 },

    #[error("{path}:{line}: cannot parse `{value}` in column {column}")]
    Parse { path: PathBuf, line: u64, column: String, value: String },

    #[error("{path}: unsupported format version {found} (expected {expected})")]
    UnsupportedVersion { path: PathBuf, found: u64, expected: u64 },

    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{0}")]
    Schema(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] sideslip_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 2 usage, 3 data or schema, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Core(e) if e.is_numerical() => 4,
            _ => 3,
        }
    }
}
