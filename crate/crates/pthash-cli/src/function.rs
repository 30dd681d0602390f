//! Loading function files of either layout for querying.

use std::fs;
use std::io;
use std::path::Path;

use pthash::{EncoderKind, Mphf, PartitionedMphf};

use crate::CliError;

/// A deserialized function file: flat or partitioned, behind one lookup
/// surface so the query/verify/bench commands don't care which.
#[derive(Debug)]
pub(crate) enum FunctionFile {
    Flat(Box<Mphf>),
    Partitioned(PartitionedMphf),
}

impl FunctionFile {
    /// Byte offset of the layout tag in the wire header: it follows the
    /// 8-byte magic and the format- and hash-version bytes.
    const TAG_OFFSET: usize = 10;
    /// Tag value marking the partitioned container.
    const TAG_PARTITIONED: u8 = 0xF0;

    pub(crate) fn load(path: &Path) -> Result<Self, CliError> {
        let data = fs::read(path)
            .map_err(|e| CliError::io(format!("reading function file {}", path.display()), e))?;
        let parsed = if data.get(Self::TAG_OFFSET) == Some(&Self::TAG_PARTITIONED) {
            PartitionedMphf::from_bytes(&data).map(FunctionFile::Partitioned)
        } else {
            Mphf::from_bytes(&data).map(|f| FunctionFile::Flat(Box::new(f)))
        };
        parsed.map_err(|e| {
            CliError::io(
                format!("decoding function file {}", path.display()),
                io::Error::new(io::ErrorKind::InvalidData, e),
            )
        })
    }

    pub(crate) fn lookup(&self, key: &[u8]) -> u64 {
        match self {
            FunctionFile::Flat(f) => f.lookup(key),
            FunctionFile::Partitioned(f) => f.lookup(key),
        }
    }

    pub(crate) fn num_keys(&self) -> u64 {
        match self {
            FunctionFile::Flat(f) => f.num_keys(),
            FunctionFile::Partitioned(f) => f.num_keys(),
        }
    }

    pub(crate) fn bits_per_key(&self) -> f64 {
        match self {
            FunctionFile::Flat(f) => f.bits_per_key(),
            FunctionFile::Partitioned(f) => f.bits_per_key(),
        }
    }

    pub(crate) fn seed(&self) -> u64 {
        match self {
            FunctionFile::Flat(f) => f.seed(),
            FunctionFile::Partitioned(f) => f.seed(),
        }
    }

    pub(crate) fn encoder(&self) -> EncoderKind {
        match self {
            FunctionFile::Flat(f) => f.encoder(),
            FunctionFile::Partitioned(f) => f.encoder(),
        }
    }

    /// Layout label for CSV rows.
    pub(crate) fn layout(&self) -> &'static str {
        match self {
            FunctionFile::Flat(_) => "flat",
            FunctionFile::Partitioned(_) => "hem",
        }
    }
}
