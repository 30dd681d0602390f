//! Sorted runs and size-class bucket files on disk.
//!
//! Every intermediate record is the same 12 bytes: a little-endian `u32` id
//! followed by a little-endian `u64` payload. Map runs store
//! `(bucket, position hash)` sorted by bucket; pilot runs store
//! `(bucket, pilot)` sorted by bucket. Bucket files group whole buckets by
//! size: one record is the bucket id followed by its `size` hashes, and ids
//! ascend within each file.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use crate::build::Pair;
use crate::error::BuildError;

/// On-disk footprint of one `(id, payload)` record.
pub(crate) const RECORD_BYTES: usize = 12;

/// Canonical name for an intermediate file: attempt seed, pipeline stage,
/// running number. The seed keeps retries from colliding in a shared
/// directory.
pub(crate) fn spill_path(dir: &Path, seed: u64, stage: &str, ordinal: usize) -> PathBuf {
    dir.join(format!("{seed:016x}-{stage}-{ordinal:04}.bin"))
}

/// Writes one sorted run of records and flushes it to disk.
pub(crate) fn write_run(path: &Path, pairs: &[Pair], buffer_bytes: usize) -> Result<(), BuildError> {
    let file = File::create(path).map_err(|e| BuildError::io(path, e))?;
    let mut writer = BufWriter::with_capacity(buffer_bytes, file);
    for pair in pairs {
        writer.write_all(&pair.id.to_le_bytes()).map_err(|e| BuildError::io(path, e))?;
        writer.write_all(&pair.hash.to_le_bytes()).map_err(|e| BuildError::io(path, e))?;
    }
    writer.flush().map_err(|e| BuildError::io(path, e))?;
    Ok(())
}

/// Streams records back out of a run file.
pub(crate) struct RunReader {
    path: PathBuf,
    reader: BufReader<File>,
}

impl RunReader {
    pub(crate) fn open(path: &Path, buffer_bytes: usize) -> Result<Self, BuildError> {
        let file = File::open(path).map_err(|e| BuildError::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), reader: BufReader::with_capacity(buffer_bytes, file) })
    }

    /// Next record, or `None` at end of file.
    pub(crate) fn next(&mut self) -> Result<Option<Pair>, BuildError> {
        let mut record = [0u8; RECORD_BYTES];
        match self.reader.read_exact(&mut record) {
            Ok(()) => {
                let id = u32::from_le_bytes(record[0..4].try_into().unwrap());
                let hash = u64::from_le_bytes(record[4..12].try_into().unwrap());
                Ok(Some(Pair { id, hash }))
            }
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => Ok(None),
            Err(e) => Err(BuildError::io(&self.path, e)),
        }
    }
}

/// One size class produced by the merge: `buckets` buckets of exactly `size`
/// keys each, stored back to back in `path` with ascending ids.
#[derive(Debug)]
pub(crate) struct ClassRun {
    pub size: usize,
    pub path: PathBuf,
    pub buckets: u64,
}

/// In-memory staging for one size class between flushes.
struct ClassBuffer {
    size: usize,
    bytes: Vec<u8>,
    buckets: u64,
}

/// Merges sorted map runs into per-size-class bucket files.
///
/// Buckets come off the merged stream in ascending id order; each finished
/// bucket is appended to its class's staging buffer, and when the staged
/// bytes together reach `budget_bytes` every buffer is appended to its file
/// at once. Returns the classes sorted by falling size — concatenating them
/// in that order yields the search's bucket ranking — plus the total key
/// count.
pub(crate) fn merge_runs_into_classes(
    run_paths: &[PathBuf],
    dir: &Path,
    seed: u64,
    budget_bytes: usize,
    io_buffer_bytes: usize,
) -> Result<(Vec<ClassRun>, u64), BuildError> {
    let mut readers = Vec::with_capacity(run_paths.len());
    let mut heap = BinaryHeap::with_capacity(run_paths.len());
    for path in run_paths {
        let mut reader = RunReader::open(path, io_buffer_bytes)?;
        if let Some(pair) = reader.next()? {
            heap.push(Reverse((pair, readers.len())));
        }
        readers.push(reader);
    }

    let mut classes: Vec<ClassBuffer> = Vec::new();
    let mut staged_bytes = 0usize;
    let mut total_keys = 0u64;
    let mut current: Option<(u32, Vec<u64>)> = None;
    let mut previous: Option<Pair> = None;

    // Moves a finished bucket into its class buffer, flushing all buffers to
    // disk when the stage is full.
    let close_bucket = |classes: &mut Vec<ClassBuffer>,
                            staged: &mut usize,
                            id: u32,
                            hashes: &[u64]|
     -> Result<(), BuildError> {
        let class = match classes.iter_mut().find(|c| c.size == hashes.len()) {
            Some(class) => class,
            None => {
                classes.push(ClassBuffer { size: hashes.len(), bytes: Vec::new(), buckets: 0 });
                classes.last_mut().unwrap()
            }
        };
        class.bytes.extend_from_slice(&id.to_le_bytes());
        for &hash in hashes {
            class.bytes.extend_from_slice(&hash.to_le_bytes());
        }
        class.buckets += 1;
        *staged += 4 + 8 * hashes.len();
        if *staged >= budget_bytes {
            flush_class_buffers(classes, dir, seed)?;
            *staged = 0;
        }
        Ok(())
    };

    while let Some(Reverse((pair, source))) = heap.pop() {
        if previous == Some(pair) {
            return Err(BuildError::DuplicateHash { bucket: pair.id, hash: pair.hash });
        }
        previous = Some(pair);
        total_keys += 1;

        match &mut current {
            Some((id, hashes)) if *id == pair.id => hashes.push(pair.hash),
            _ => {
                if let Some((id, hashes)) = current.take() {
                    close_bucket(&mut classes, &mut staged_bytes, id, &hashes)?;
                }
                current = Some((pair.id, vec![pair.hash]));
            }
        }

        if let Some(next) = readers[source].next()? {
            heap.push(Reverse((next, source)));
        }
    }
    if let Some((id, hashes)) = current.take() {
        close_bucket(&mut classes, &mut staged_bytes, id, &hashes)?;
    }
    flush_class_buffers(&mut classes, dir, seed)?;

    let mut runs: Vec<ClassRun> = classes
        .into_iter()
        .map(|c| ClassRun { size: c.size, path: class_path(dir, seed, c.size), buckets: c.buckets })
        .collect();
    runs.sort_unstable_by_key(|run| Reverse(run.size));
    Ok((runs, total_keys))
}

fn class_path(dir: &Path, seed: u64, size: usize) -> PathBuf {
    spill_path(dir, seed, "class", size)
}

/// Appends every staged buffer to its class file in one write each.
fn flush_class_buffers(
    classes: &mut [ClassBuffer],
    dir: &Path,
    seed: u64,
) -> Result<(), BuildError> {
    for class in classes.iter_mut().filter(|c| !c.bytes.is_empty()) {
        let path = class_path(dir, seed, class.size);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| BuildError::io(&path, e))?;
        file.write_all(&class.bytes).map_err(|e| BuildError::io(&path, e))?;
        class.bytes.clear();
    }
    Ok(())
}

/// Streams `(id, hashes)` buckets back out of one class file.
pub(crate) struct ClassReader {
    size: usize,
    remaining: u64,
    path: PathBuf,
    reader: BufReader<File>,
}

impl ClassReader {
    pub(crate) fn open(run: &ClassRun, buffer_bytes: usize) -> Result<Self, BuildError> {
        let file = File::open(&run.path).map_err(|e| BuildError::io(&run.path, e))?;
        Ok(Self {
            size: run.size,
            remaining: run.buckets,
            path: run.path.clone(),
            reader: BufReader::with_capacity(buffer_bytes, file),
        })
    }

    /// Reads the next bucket into `hashes`, returning its id, or `None` once
    /// the recorded bucket count is exhausted.
    pub(crate) fn next_into(&mut self, hashes: &mut Vec<u64>) -> Result<Option<u32>, BuildError> {
        if self.remaining == 0 {
            return Ok(None);
        }
        self.remaining -= 1;
        let mut word = [0u8; 8];
        let mut id_bytes = [0u8; 4];
        self.reader.read_exact(&mut id_bytes).map_err(|e| BuildError::io(&self.path, e))?;
        hashes.clear();
        for _ in 0..self.size {
            self.reader.read_exact(&mut word).map_err(|e| BuildError::io(&self.path, e))?;
            hashes.push(u64::from_le_bytes(word));
        }
        Ok(Some(u32::from_le_bytes(id_bytes)))
    }
}
