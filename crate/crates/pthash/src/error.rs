use std::io;
use std::path::PathBuf;

/// Failures while constructing a function.
#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    /// Two keys produced the same 128-bit digest under the current seed —
    /// almost always duplicate input keys, which no reseed can separate.
    #[error("duplicate 128-bit key hash in bucket {bucket} (hash {hash:#018x}); \
             the input most likely contains duplicate keys")]
    DuplicateHash { bucket: u32, hash: u64 },

    /// No pilot below the search limit placed the bucket.
    #[error("pilot search for bucket {bucket} exhausted the limit of {limit} candidates")]
    PilotSearchExhausted { bucket: u32, limit: u64 },

    /// Every reseed attempt failed; `last` is the final attempt's failure.
    #[error("construction failed after {attempts} seed attempt(s): {last}")]
    RetriesExhausted {
        attempts: u32,
        #[source]
        last: Box<BuildError>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The external-memory byte budget cannot hold the mandatory state.
    #[error("memory budget of {budget} bytes is too small: {need}")]
    BudgetTooSmall { budget: usize, need: String },

    #[error("partition {index} failed: {source}")]
    Partition {
        index: u64,
        #[source]
        source: Box<BuildError>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl BuildError {
    /// True for failures that a fresh seed could plausibly fix.
    pub(crate) fn is_retryable(&self) -> bool {
        matches!(
            self,
            BuildError::DuplicateHash { .. } | BuildError::PilotSearchExhausted { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        BuildError::Io { path: path.into(), source }
    }
}

/// Failures while decoding a serialized function.
#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("not a pthash function file (bad magic)")]
    BadMagic,

    #[error("unsupported format version {0}")]
    UnsupportedFormatVersion(u8),

    /// The file was produced with a different key digest or pilot mixer;
    /// evaluating it here would silently return wrong values.
    #[error("unsupported hash version {0}")]
    UnsupportedHashVersion(u8),

    #[error("truncated input")]
    Truncated,

    #[error("corrupt function file: {0}")]
    Corrupt(&'static str),
}
