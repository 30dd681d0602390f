//! Pilot search over buckets streamed from disk.
//!
//! The ticketed search engine is the same one used in core; what changes is
//! the plumbing on either side. Buckets flow through a bounded ring that the
//! calling thread fills from the class files, and committed pilots land in a
//! bounded buffer that spills sorted runs, merged into the final table at the
//! end. The slot bitmap is the one search structure that must stay resident,
//! so the pair buffer gets whatever budget remains beside it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::build::{run_search, BucketFeed, Pair, PilotSink, PilotsTable, TakenBitmap, TurnCell, POISON};
use crate::error::BuildError;
use crate::hashing::Mix64;

use super::runs::{spill_path, write_run, ClassReader, ClassRun, RunReader, RECORD_BYTES};
use super::MemoryBudget;

/// One ring slot: a bucket id and its position hashes. The hash vector is
/// reused across refills, so a slot settles at the largest bucket size that
/// ever passed through it.
struct Slot {
    id: u32,
    hashes: Vec<u64>,
}

/// A bounded, single-producer ring of buckets in rank order.
///
/// The loader publishes rank `r` by storing `r + 1` into `produced` with
/// `Release`; a worker's `Acquire` load of `produced` makes the slot contents
/// visible. Slot reuse is gated on the commit ticket: the loader only
/// overwrites a slot once the ticket counter has moved past its previous
/// occupant, which the workers' `Release` ticket stores order against the
/// loader's `Acquire` reads. `produced == POISON` tells waiting workers the
/// rest of the feed will never arrive.
pub(crate) struct RingFeed {
    slots: Vec<TurnCell<Slot>>,
    produced: AtomicU64,
    len: usize,
}

impl RingFeed {
    pub(crate) fn new(capacity: usize, len: usize) -> Self {
        let slots =
            (0..capacity.max(1)).map(|_| TurnCell::new(Slot { id: 0, hashes: Vec::new() })).collect();
        Self { slots, produced: AtomicU64::new(0), len }
    }

    pub(crate) fn capacity(&self) -> usize {
        self.slots.len()
    }

    /// Fills rank's slot ahead of publication.
    ///
    /// # Safety
    ///
    /// The caller must be the sole producer and must have observed
    /// `turn + capacity > rank` with `Acquire`, so the slot's previous
    /// occupant (`rank - capacity`) was committed and abandoned by its
    /// worker.
    unsafe fn fill(&self, rank: usize, id: u32, hashes: &[u64]) {
        let slot = &mut *self.slots[rank % self.slots.len()].as_ptr();
        slot.id = id;
        slot.hashes.clear();
        slot.hashes.extend_from_slice(hashes);
    }

    fn publish(&self, rank: u64) {
        self.produced.store(rank + 1, Ordering::Release);
    }

    fn abort(&self) {
        self.produced.store(POISON, Ordering::Release);
    }
}

impl BucketFeed for RingFeed {
    fn len(&self) -> usize {
        self.len
    }

    fn bucket(&self, rank: usize) -> Option<(u32, &[u64])> {
        loop {
            let produced = self.produced.load(Ordering::Acquire);
            if produced == POISON {
                return None;
            }
            if produced > rank as u64 {
                break;
            }
            std::thread::yield_now();
        }
        // Safety: the Acquire load above saw the slot published, and the
        // loader won't touch it again until this rank's ticket is passed on,
        // which outlives the borrow (the engine drops it before committing).
        let slot = unsafe { &*self.slots[rank % self.slots.len()].as_ptr() };
        Some((slot.id, &slot.hashes))
    }

    fn aborted(&self) -> bool {
        self.produced.load(Ordering::Relaxed) == POISON
    }
}

/// Streams buckets from the class files into the ring, largest class first.
///
/// Runs on the calling thread while the workers search. Stops quietly when
/// the ticket counter is poisoned (some worker already holds the real error);
/// on its own I/O failure it poisons the feed so no worker waits forever.
fn pump_buckets(
    feed: &RingFeed,
    classes: &[ClassRun],
    turn: &AtomicU64,
    io_buffer_bytes: usize,
) -> Result<(), BuildError> {
    let result = (|| {
        let capacity = feed.capacity() as u64;
        let mut hashes = Vec::new();
        let mut rank = 0u64;
        for class in classes {
            let mut reader = ClassReader::open(class, io_buffer_bytes)?;
            while let Some(id) = reader.next_into(&mut hashes)? {
                loop {
                    let ticket = turn.load(Ordering::Acquire);
                    if ticket == POISON {
                        // The erroring worker can't wake siblings still
                        // waiting on the feed; do it for them.
                        feed.abort();
                        return Ok(());
                    }
                    if rank < ticket + capacity {
                        break;
                    }
                    std::thread::yield_now();
                }
                // Safety: sole producer; the wait above established that the
                // slot's previous occupant was committed.
                unsafe { feed.fill(rank as usize, id, &hashes) };
                feed.publish(rank);
                rank += 1;
            }
        }
        Ok(())
    })();
    if result.is_err() {
        feed.abort();
    }
    result
}

/// Commit sink that stages `(bucket, pilot)` pairs in a bounded buffer and
/// spills each full buffer to disk as a run sorted by bucket id.
pub(crate) struct SpillSink {
    buffer: Vec<Pair>,
    capacity: usize,
    dir: PathBuf,
    seed: u64,
    files: Vec<PathBuf>,
    io_buffer_bytes: usize,
}

impl SpillSink {
    fn new(dir: &Path, seed: u64, capacity: usize, io_buffer_bytes: usize) -> Self {
        Self {
            buffer: Vec::with_capacity(capacity),
            capacity,
            dir: dir.to_path_buf(),
            seed,
            files: Vec::new(),
            io_buffer_bytes,
        }
    }

    fn spill(&mut self) -> Result<(), BuildError> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        // Commits arrive in bucket-rank order (falling size); runs must be
        // sorted by id instead.
        self.buffer.sort_unstable();
        let path = spill_path(&self.dir, self.seed, "pilot", self.files.len());
        write_run(&path, &self.buffer, self.io_buffer_bytes)?;
        self.files.push(path);
        self.buffer.clear();
        Ok(())
    }

    /// Flushes the tail buffer and hands back the spilled run paths.
    fn finish(mut self) -> Result<Vec<PathBuf>, BuildError> {
        self.spill()?;
        Ok(self.files)
    }
}

impl PilotSink for SpillSink {
    fn commit(&mut self, bucket_id: u32, pilot: u64) -> Result<(), BuildError> {
        self.buffer.push(Pair { id: bucket_id, hash: pilot });
        if self.buffer.len() >= self.capacity {
            self.spill()?;
        }
        Ok(())
    }
}

/// Merges the sorted pilot runs back into a dense table indexed by bucket id.
/// The table is the build's output, so it isn't charged against the budget.
fn merge_pilot_runs(
    files: &[PathBuf],
    num_buckets: u64,
    io_buffer_bytes: usize,
) -> Result<PilotsTable, BuildError> {
    let mut pilots = PilotsTable::zeroed(num_buckets);
    let mut readers = Vec::with_capacity(files.len());
    let mut heap = BinaryHeap::with_capacity(files.len());
    for path in files {
        let mut reader = RunReader::open(path, io_buffer_bytes)?;
        if let Some(pair) = reader.next()? {
            heap.push(Reverse((pair, readers.len())));
        }
        readers.push(reader);
    }
    while let Some(Reverse((pair, source))) = heap.pop() {
        pilots.set(pair.id, pair.hash);
        if let Some(next) = readers[source].next()? {
            heap.push(Reverse((next, source)));
        }
    }
    Ok(pilots)
}

#[derive(Debug)]
pub(crate) struct ExternalSearchOutput {
    pub pilots: PilotsTable,
    pub taken: TakenBitmap,
    pub attempts: u64,
    pub pilot_files: usize,
}

/// Runs the pilot search with the bucket stream and the pilot table both out
/// of core. Only the slot bitmap and a pair buffer sized to the leftover
/// budget stay resident.
#[allow(clippy::too_many_arguments)]
pub(crate) fn search_external(
    classes: &[ClassRun],
    num_buckets: u64,
    n_prime: u64,
    workers: usize,
    limit: u64,
    budget: MemoryBudget,
    seed: u64,
    dir: &Path,
) -> Result<ExternalSearchOutput, BuildError> {
    let bitmap_bytes = (n_prime as usize).div_ceil(8);
    let spare = budget.bytes().saturating_sub(bitmap_bytes);
    if spare < RECORD_BYTES {
        return Err(BuildError::BudgetTooSmall {
            budget: budget.bytes(),
            need: format!(
                "{} bytes for the slot bitmap plus {RECORD_BYTES} for one pilot record",
                bitmap_bytes
            ),
        });
    }
    let pair_capacity = spare / RECORD_BYTES;
    let io_buffer_bytes = budget.io_buffer_bytes();

    let taken = TakenBitmap::new(n_prime);
    let total_buckets: u64 = classes.iter().map(|c| c.buckets).sum();
    let feed = RingFeed::new(2 * workers, total_buckets as usize);
    let sink = SpillSink::new(dir, seed, pair_capacity, io_buffer_bytes);
    let (sink, attempts) = run_search(
        &feed,
        n_prime,
        workers,
        limit,
        &Mix64,
        sink,
        &taken,
        |turn| pump_buckets(&feed, classes, turn, io_buffer_bytes),
    )?;
    let files = sink.finish()?;
    let pilots = merge_pilot_runs(&files, num_buckets, io_buffer_bytes)?;
    Ok(ExternalSearchOutput { pilots, taken, attempts, pilot_files: files.len() })
}
