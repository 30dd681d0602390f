//! Minimal perfect hashing over arbitrary byte keys.
//!
//! A [`Mphf`] maps each of the `n` distinct keys it was built from to a unique
//! value in `[0, n)` while storing only a few bits per key. Construction
//! hashes every key once, groups the hashes into skewed buckets, and then
//! searches each bucket (largest first) for a small integer *pilot* that
//! displaces the bucket's keys into still-free slots of a table of size
//! `n' = ceil(n / alpha)`. Pilots compress well; positions past `n` are folded
//! back into `[0, n)` through a compressed remap of the unused slots.
//!
//! ```
//! use pthash::{build, BuildConfig};
//!
//! let keys: Vec<&[u8]> = vec![b"ale", b"stout", b"porter", b"lager"];
//! let f = build(&keys, &BuildConfig::default()).unwrap();
//! let mut values: Vec<u64> = keys.iter().map(|k| f.lookup(k)).collect();
//! values.sort_unstable();
//! assert_eq!(values, vec![0, 1, 2, 3]);
//! ```
//!
//! Construction scales past one core ([`BuildConfig::workers`]) and past RAM
//! ([`build_external`] spills sorted runs under a byte budget). Very large key
//! sets can instead be split into independently built partitions
//! ([`build_partitioned`]), trading a second hash per lookup for embarrassing
//! parallelism. Serialized functions are bit-stable: the same keys, seed and
//! configuration produce byte-identical files regardless of worker count or
//! memory mode.

pub mod bits;
mod build;
mod error;
mod extmem;
pub mod hashing;
pub mod encoders;
mod hem;
mod mphf;
pub mod util;
mod wire;

pub use build::{
    build, build_free_array, build_with_stats, map, merge, search_parallel, search_sequential,
    BucketCollection, BuildConfig, BuildStats, FreeArray, Pair, PairBlock, PilotsTable,
    SearchOutput, SizeClass, TakenBitmap,
};
pub use encoders::EncoderKind;
pub use error::{BuildError, DecodeError};
pub use extmem::{build_external, build_external_with_stats, ExternalBuildStats, MemoryBudget};
pub use hem::{
    build_partitioned, build_partitioned_with_stats, partition_keys, HemConfig, PartitionedMphf,
};
pub use mphf::Mphf;
