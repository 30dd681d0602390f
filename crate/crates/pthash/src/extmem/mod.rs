//! Construction that keeps its intermediate state on disk.
//!
//! The in-core pipeline materializes every `(bucket, hash)` pair, roughly
//! 12 bytes per key — at billions of keys that dwarfs the function being
//! built. This module runs the same map → merge → search pipeline through
//! sorted spill files instead, holding only a caller-chosen budget's worth
//! of buffers plus the slot bitmap in memory:
//!
//! - **map** hashes keys into a budget-sized buffer and writes each sorted
//!   batch out as a run, about `12n / budget` files in total;
//! - **merge** replays the runs as one sorted stream, splitting it into one
//!   file per bucket size so the search can visit buckets largest-first
//!   without sorting anything in memory;
//! - **search** streams buckets through a bounded ring into the usual
//!   ticketed workers, spilling committed pilots and merging them into the
//!   final table at the end.
//!
//! The result is bit-for-bit the function the in-core builder produces for
//! the same keys and configuration. Temporary files live in a private
//! directory that is removed when the build finishes, succeeds or not.

mod runs;
mod search;

use std::path::Path;

use tempfile::TempDir;

use crate::build::{
    build_free_array, map, table_size, with_retries, BuildConfig, BuildStats,
};
use crate::error::BuildError;
use crate::hashing::{BucketMapper, Murmur3};
use crate::mphf::Mphf;

use runs::{merge_runs_into_classes, spill_path, write_run, RECORD_BYTES};
use search::search_external;

/// How much working memory the external builder may use for its buffers and
/// the slot bitmap. Keys, the finished function, and per-file I/O buffers
/// (a few kilobytes each) are not charged against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    bytes: usize,
}

impl MemoryBudget {
    /// Smallest accepted budget. Below this even the bookkeeping for a
    /// handful of keys won't fit.
    pub const MIN_BYTES: usize = 4096;

    pub fn new(bytes: usize) -> Result<Self, BuildError> {
        if bytes < Self::MIN_BYTES {
            return Err(BuildError::BudgetTooSmall {
                budget: bytes,
                need: format!("at least {} bytes", Self::MIN_BYTES),
            });
        }
        Ok(Self { bytes })
    }

    pub fn bytes(&self) -> usize {
        self.bytes
    }

    /// Size for the `BufReader`/`BufWriter` instances on spill files: grows
    /// with the budget but stays a rounding error beside it.
    pub(crate) fn io_buffer_bytes(&self) -> usize {
        (self.bytes / 1024).clamp(8 << 10, 1 << 20)
    }
}

/// Construction counters specific to the external pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExternalBuildStats {
    /// Sorted runs written by the map phase.
    pub map_files: usize,
    /// Bucket files written by the merge phase, one per distinct size.
    pub class_files: usize,
    /// Sorted pilot runs spilled by the search phase.
    pub pilot_files: usize,
}

/// Builds the same function [`crate::build`] would, spending at most
/// `budget` on intermediate state. Temporary files go to the system
/// temp directory.
pub fn build_external<K: AsRef<[u8]> + Sync>(
    keys: &[K],
    config: &BuildConfig,
    budget: MemoryBudget,
) -> Result<Mphf, BuildError> {
    build_external_in(keys, config, budget, None).map(|(f, _, _)| f)
}

/// Like [`build_external`], also reporting construction counters and letting
/// the caller pick where spill files live (`None` means the system temp
/// directory).
pub fn build_external_with_stats<K: AsRef<[u8]> + Sync>(
    keys: &[K],
    config: &BuildConfig,
    budget: MemoryBudget,
    tmp_dir: Option<&Path>,
) -> Result<(Mphf, BuildStats, ExternalBuildStats), BuildError> {
    build_external_in(keys, config, budget, tmp_dir)
}

fn build_external_in<K: AsRef<[u8]> + Sync>(
    keys: &[K],
    config: &BuildConfig,
    budget: MemoryBudget,
    tmp_dir: Option<&Path>,
) -> Result<(Mphf, BuildStats, ExternalBuildStats), BuildError> {
    config.validate()?;
    let tmp = match tmp_dir {
        Some(dir) => TempDir::new_in(dir).map_err(|e| BuildError::io(dir, e))?,
        None => {
            TempDir::new().map_err(|e| BuildError::io(std::env::temp_dir(), e))?
        }
    };
    with_retries(config.seed, config.retries, |seed, attempt| {
        let (mphf, mut stats, external) =
            single_attempt(keys, config, seed, budget, tmp.path())?;
        stats.build_attempts = attempt + 1;
        Ok((mphf, stats, external))
    })
}

fn single_attempt<K: AsRef<[u8]> + Sync>(
    keys: &[K],
    config: &BuildConfig,
    seed: u64,
    budget: MemoryBudget,
    dir: &Path,
) -> Result<(Mphf, BuildStats, ExternalBuildStats), BuildError> {
    let n = keys.len() as u64;
    let n_prime = table_size(n, config.alpha);
    let mapper = BucketMapper::with_param_c(n, config.c);
    let io_buffer_bytes = budget.io_buffer_bytes();

    let run_paths = map_to_runs(keys, &mapper, seed, budget, dir, io_buffer_bytes)?;
    let (classes, merged_keys) =
        merge_runs_into_classes(&run_paths, dir, seed, budget.bytes(), io_buffer_bytes)?;
    debug_assert_eq!(merged_keys, n);
    // The runs are dead weight once merged; drop them so the search's spills
    // reuse the disk space.
    for path in &run_paths {
        let _ = std::fs::remove_file(path);
    }

    let output = search_external(
        &classes,
        mapper.m(),
        n_prime,
        config.workers,
        config.search_limit,
        budget,
        seed,
        dir,
    )?;
    for class in &classes {
        let _ = std::fs::remove_file(&class.path);
    }

    let free = build_free_array(&output.taken, n);
    let stats = BuildStats {
        num_keys: n,
        table_size: n_prime,
        num_buckets: mapper.m(),
        max_bucket_size: classes.first().map_or(0, |c| c.size),
        pilot_attempts: output.attempts,
        seed,
        build_attempts: 0,
    };
    let external = ExternalBuildStats {
        map_files: run_paths.len(),
        class_files: classes.len(),
        pilot_files: output.pilot_files,
    };
    let mphf = Mphf::from_parts(seed, mapper, n_prime, config.encoder, &output.pilots, &free);
    Ok((mphf, stats, external))
}

/// Hashes keys in budget-sized batches, writing each sorted batch as a run.
fn map_to_runs<K: AsRef<[u8]> + Sync>(
    keys: &[K],
    mapper: &BucketMapper,
    seed: u64,
    budget: MemoryBudget,
    dir: &Path,
    io_buffer_bytes: usize,
) -> Result<Vec<std::path::PathBuf>, BuildError> {
    let batch = budget.bytes() / RECORD_BYTES;
    let mut paths = Vec::new();
    for chunk in keys.chunks(batch.max(1)) {
        let blocks = map(chunk, mapper, seed, 1, &Murmur3);
        let path = spill_path(dir, seed, "map", paths.len());
        let pairs = blocks.first().map_or(&[][..], |b| &b.pairs);
        write_run(&path, pairs, io_buffer_bytes)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::build_with_stats;
    use crate::encoders::EncoderKind;
    use crate::util::generate_keys;

    #[test]
    fn budget_floor_is_enforced() {
        let err = MemoryBudget::new(MemoryBudget::MIN_BYTES - 1).unwrap_err();
        match err {
            BuildError::BudgetTooSmall { budget, .. } => assert_eq!(budget, 4095),
            other => panic!("unexpected error: {other:?}"),
        }
        assert_eq!(MemoryBudget::new(1 << 20).unwrap().bytes(), 1 << 20);
    }

    #[test]
    fn io_buffers_scale_with_the_budget_within_bounds() {
        assert_eq!(MemoryBudget::new(4096).unwrap().io_buffer_bytes(), 8 << 10);
        assert_eq!(MemoryBudget::new(64 << 20).unwrap().io_buffer_bytes(), 64 << 10);
        assert_eq!(MemoryBudget::new(usize::MAX).unwrap().io_buffer_bytes(), 1 << 20);
    }

    #[test]
    fn external_build_matches_in_core_build_bit_for_bit() {
        let keys = generate_keys(20_000, 11);
        let config = BuildConfig { seed: 11, ..BuildConfig::default() };
        let (in_core, core_stats) = build_with_stats(&keys, &config).unwrap();

        let budget = MemoryBudget::new(64 << 10).unwrap();
        let (external, stats, files) =
            build_external_with_stats(&keys, &config, budget, None).unwrap();

        assert_eq!(external.to_bytes(), in_core.to_bytes());
        assert_eq!(stats.pilot_attempts, core_stats.pilot_attempts);
        assert_eq!(stats.max_bucket_size, core_stats.max_bucket_size);
        // 20k keys at 12 bytes each against a 64 KiB budget: several runs.
        assert_eq!(files.map_files, 20_000usize.div_ceil((64 << 10) / 12));
        assert!(files.pilot_files >= 2, "pilot spills: {}", files.pilot_files);
        assert!(files.class_files > 3);
    }

    #[test]
    fn external_build_handles_tiny_and_empty_inputs() {
        let budget = MemoryBudget::new(MemoryBudget::MIN_BYTES).unwrap();
        let config = BuildConfig::default();

        let empty: Vec<Vec<u8>> = Vec::new();
        let f = build_external(&empty, &config, budget).unwrap();
        assert_eq!(f.num_keys(), 0);
        assert_eq!(f.to_bytes(), crate::build::build(&empty, &config).unwrap().to_bytes());

        let one = vec![b"solo".to_vec()];
        let f = build_external(&one, &config, budget).unwrap();
        assert_eq!(f.lookup(b"solo"), 0);
    }

    #[test]
    fn spill_files_live_in_the_requested_directory_and_are_cleaned_up() {
        let dir = tempfile::TempDir::new().unwrap();
        let keys = generate_keys(2_000, 3);
        let config = BuildConfig { seed: 3, encoder: EncoderKind::Compact, ..Default::default() };
        let budget = MemoryBudget::new(8 << 10).unwrap();
        build_external_with_stats(&keys, &config, budget, Some(dir.path())).unwrap();
        // The builder's private subdirectory is gone, leaving ours empty.
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn duplicate_keys_exhaust_retries_externally_too() {
        let mut keys = generate_keys(100, 9);
        keys[50] = keys[20];
        let config = BuildConfig::default();
        let budget = MemoryBudget::new(MemoryBudget::MIN_BYTES).unwrap();
        let err = build_external(&keys, &config, budget).unwrap_err();
        match err {
            BuildError::RetriesExhausted { attempts, last } => {
                assert_eq!(attempts, 3);
                assert!(matches!(*last, BuildError::DuplicateHash { .. }));
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }
}
