//! Partitioned construction: many small functions posing as one big one.
//!
//! Keys are first dealt into partitions by an independent hash, and each
//! partition gets its own self-contained function over a dedicated seed.
//! Partitions are built in parallel — coarser and cheaper than sharing one
//! bucket stream across threads — and a failed partition retries alone
//! instead of restarting the whole input. Lookups add the partition's offset
//! to its local value, so the whole still maps onto `0..n`.
//!
//! The price is a second level of indirection and slightly worse space: each
//! partition rounds its own table up, carries its own header, and the offset
//! table itself must stay resident.

use crate::build::{attempt_with_mapper, with_retries, BuildConfig, BuildStats};
use crate::encoders::EncoderKind;
use crate::error::BuildError;
use crate::hashing::{partition_hash, BucketMapper, KeyHasher, Murmur3};
use crate::mphf::Mphf;
use crate::util::mix64;

/// Settings for [`build_partitioned`].
#[derive(Debug, Clone)]
pub struct HemConfig {
    /// Per-partition settings. `workers` here counts the threads building
    /// whole partitions; the search inside one partition is sequential.
    pub build: BuildConfig,
    /// Target keys per partition. The count comes out to
    /// `max(1, round(n / avg_partition_size))`.
    pub avg_partition_size: u64,
    /// Exact partition count, overriding the average when set.
    pub num_partitions: Option<u64>,
}

impl Default for HemConfig {
    fn default() -> Self {
        Self {
            build: BuildConfig::default(),
            avg_partition_size: 5_000_000,
            num_partitions: None,
        }
    }
}

impl HemConfig {
    fn validate(&self) -> Result<(), BuildError> {
        self.build.validate()?;
        if self.avg_partition_size == 0 {
            return Err(BuildError::Config("average partition size must be positive".into()));
        }
        if self.num_partitions == Some(0) {
            return Err(BuildError::Config("partition count must be positive".into()));
        }
        Ok(())
    }

    fn partition_count(&self, num_keys: u64) -> u64 {
        match self.num_partitions {
            Some(count) => count,
            None => {
                let rounded = (num_keys as f64 / self.avg_partition_size as f64).round() as u64;
                rounded.max(1)
            }
        }
    }
}

/// Deals keys into `num_partitions` groups by their partition hash,
/// preserving input order within each group. Exposed mostly for inspecting
/// balance; [`build_partitioned`] calls it internally.
pub fn partition_keys<K: AsRef<[u8]>>(
    keys: &[K],
    seed: u64,
    num_partitions: u64,
) -> Vec<Vec<&[u8]>> {
    let count = num_partitions.max(1);
    let mut partitions: Vec<Vec<&[u8]>> = vec![Vec::new(); count as usize];
    for key in keys {
        let digest = Murmur3.hash_key(key.as_ref(), seed);
        partitions[(partition_hash(digest) % count) as usize].push(key.as_ref());
    }
    partitions
}

/// A function assembled from independently built partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedMphf {
    global_seed: u64,
    /// Where each partition's value range starts; the extra last entry is the
    /// total key count.
    offsets: Vec<u64>,
    parts: Vec<Mphf>,
}

impl PartitionedMphf {
    pub(crate) fn from_decoded(global_seed: u64, offsets: Vec<u64>, parts: Vec<Mphf>) -> Self {
        Self { global_seed, offsets, parts }
    }

    /// The key's value in `0..num_keys()`, distinct for every key the
    /// function was built over. As with [`Mphf::lookup`], other keys get an
    /// arbitrary in-range value.
    pub fn lookup(&self, key: &[u8]) -> u64 {
        let n = self.num_keys();
        if n == 0 {
            return 0;
        }
        let digest = Murmur3.hash_key(key, self.global_seed);
        let part = (partition_hash(digest) % self.parts.len() as u64) as usize;
        // Members never hit the clamp; keys outside the set can land in an
        // empty partition whose offset is the end of the range.
        (self.offsets[part] + self.parts[part].lookup(key)).min(n - 1)
    }

    pub fn num_keys(&self) -> u64 {
        *self.offsets.last().expect("offsets always hold a terminating total")
    }

    pub fn is_empty(&self) -> bool {
        self.num_keys() == 0
    }

    pub fn num_partitions(&self) -> u64 {
        self.parts.len() as u64
    }

    pub fn seed(&self) -> u64 {
        self.global_seed
    }

    /// Pilot-table representation shared by every partition.
    pub fn encoder(&self) -> EncoderKind {
        self.parts.first().map_or_else(EncoderKind::default, Mphf::encoder)
    }

    /// Payload bits: every partition's pilots and redirects, plus the offset
    /// table that lookups consult — unlike a single function's fixed header,
    /// it grows with the partition count, so it counts.
    pub fn space_bits(&self) -> u64 {
        let offsets = self.offsets.len() as u64 * 64;
        offsets + self.parts.iter().map(Mphf::space_bits).sum::<u64>()
    }

    pub fn bits_per_key(&self) -> f64 {
        if self.num_keys() == 0 {
            return 0.0;
        }
        self.space_bits() as f64 / self.num_keys() as f64
    }

    pub(crate) fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub(crate) fn parts(&self) -> &[Mphf] {
        &self.parts
    }
}

/// Builds a partitioned function over `keys`, which must be distinct.
pub fn build_partitioned<K: AsRef<[u8]> + Sync>(
    keys: &[K],
    config: &HemConfig,
) -> Result<PartitionedMphf, BuildError> {
    build_partitioned_with_stats(keys, config).map(|(f, _)| f)
}

/// Like [`build_partitioned`], also reporting counters aggregated across
/// partitions (`build_attempts` is the deepest retry chain any partition
/// needed).
pub fn build_partitioned_with_stats<K: AsRef<[u8]> + Sync>(
    keys: &[K],
    config: &HemConfig,
) -> Result<(PartitionedMphf, BuildStats), BuildError> {
    config.validate()?;
    let n = keys.len() as u64;
    let count = config.partition_count(n);
    let partitions = partition_keys(keys, config.build.seed, count);

    // Partitions share one global bucket budget instead of each rounding its
    // own up, so the bucket-per-key ratio stays what `c` asked for.
    let buckets_total = BucketMapper::with_param_c(n, config.build.c).m();
    let quota = buckets_total / count;
    let remainder = buckets_total % count;
    let plan: Vec<PartitionPlan> = partitions
        .iter()
        .enumerate()
        .map(|(index, part_keys)| {
            let num_keys = part_keys.len() as u64;
            let buckets = match num_keys {
                0 => 0,
                // At least one bucket each, even when keys outnumber buckets.
                _ => (quota + u64::from((index as u64) < remainder)).max(1),
            };
            PartitionPlan { seed: mix64(config.build.seed ^ mix64(index as u64)), buckets }
        })
        .collect();

    let workers = config.build.workers.min(partitions.len()).max(1);
    let built = if workers == 1 {
        build_stripe(&partitions, &plan, &config.build, 0, 1)?
    } else {
        build_striped(&partitions, &plan, &config.build, workers)?
    };

    let mut offsets = Vec::with_capacity(partitions.len() + 1);
    let mut parts = Vec::with_capacity(partitions.len());
    let mut total = 0u64;
    let mut stats = BuildStats {
        num_keys: n,
        table_size: 0,
        num_buckets: 0,
        max_bucket_size: 0,
        pilot_attempts: 0,
        seed: config.build.seed,
        build_attempts: 0,
    };
    for (part, part_stats) in built {
        offsets.push(total);
        total += part_stats.num_keys;
        stats.table_size += part_stats.table_size;
        stats.num_buckets += part_stats.num_buckets;
        stats.max_bucket_size = stats.max_bucket_size.max(part_stats.max_bucket_size);
        stats.pilot_attempts += part_stats.pilot_attempts;
        stats.build_attempts = stats.build_attempts.max(part_stats.build_attempts);
        parts.push(part);
    }
    offsets.push(total);

    Ok((PartitionedMphf { global_seed: config.build.seed, offsets, parts }, stats))
}

struct PartitionPlan {
    seed: u64,
    buckets: u64,
}

/// Builds every `stride`-th partition starting at `first`, in index order.
fn build_stripe(
    partitions: &[Vec<&[u8]>],
    plan: &[PartitionPlan],
    config: &BuildConfig,
    first: usize,
    stride: usize,
) -> Result<Vec<(Mphf, BuildStats)>, BuildError> {
    (first..partitions.len())
        .step_by(stride)
        .map(|index| {
            build_partition(&partitions[index], config, &plan[index]).map_err(|source| {
                BuildError::Partition { index: index as u64, source: Box::new(source) }
            })
        })
        .collect()
}

/// Fans partitions out over `workers` threads in static stripes, then
/// reassembles the results in partition order. With several failures the
/// lowest-indexed one wins, matching the sequential path.
fn build_striped(
    partitions: &[Vec<&[u8]>],
    plan: &[PartitionPlan],
    config: &BuildConfig,
    workers: usize,
) -> Result<Vec<(Mphf, BuildStats)>, BuildError> {
    let mut stripes = Vec::with_capacity(workers);
    let outcome = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|first| {
                scope.spawn(move || build_stripe(partitions, plan, config, first, workers))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("partition builder panicked")).collect::<Vec<_>>()
    });

    let mut failure: Option<BuildError> = None;
    for result in outcome {
        match result {
            Ok(stripe) => stripes.push(stripe),
            Err(error) => {
                let index = |e: &BuildError| match e {
                    BuildError::Partition { index, .. } => *index,
                    _ => u64::MAX,
                };
                if failure.as_ref().is_none_or(|held| index(&error) < index(held)) {
                    failure = Some(error);
                }
            }
        }
    }
    if let Some(error) = failure {
        return Err(error);
    }

    // Stripe w holds partitions w, w + workers, ...; deal them back out.
    let total: usize = stripes.iter().map(Vec::len).sum();
    let mut slots: Vec<Option<(Mphf, BuildStats)>> = (0..total).map(|_| None).collect();
    for (first, stripe) in stripes.into_iter().enumerate() {
        for (step, part) in stripe.into_iter().enumerate() {
            slots[first + step * workers] = Some(part);
        }
    }
    Ok(slots.into_iter().map(|s| s.expect("every partition built exactly once")).collect())
}

/// Builds one partition, retrying with derived seeds on its own.
fn build_partition(
    keys: &[&[u8]],
    config: &BuildConfig,
    plan: &PartitionPlan,
) -> Result<(Mphf, BuildStats), BuildError> {
    with_retries(plan.seed, config.retries, |seed, attempt| {
        let mapper = BucketMapper::new(keys.len() as u64, plan.buckets);
        let (mphf, mut stats) = attempt_with_mapper(keys, config, mapper, 1, seed)?;
        stats.build_attempts = attempt + 1;
        Ok((mphf, stats))
    })
}
