//! Serialization. The format is little-endian throughout and fully
//! length-prefixed, so a reader never trusts a count it hasn't checked
//! against the bytes actually present:
//!
//! ```text
//! magic "pthashfn" (8) | format version (1) | hash version (1) | tag (1) | body
//! ```
//!
//! The tag is the pilot encoder's tag for a flat function, or
//! [`TAG_PARTITIONED`] for a container of per-partition bodies. A flat body is
//!
//! ```text
//! seed u64 | n u64 | n' u64 | m u64 | p1 u64 | p2 u64 | pilots | redirects
//! ```
//!
//! followed by the encoder-specific pilot block and the redirect Elias-Fano
//! block. Bit payloads are stored as whole 64-bit words. Decoding re-derives
//! every redundant field (bucket thresholds, bit widths, bitmap lengths) and
//! rejects mismatches, which keeps valid files canonical — re-serializing a
//! decoded function reproduces its bytes — and makes every rank and offset a
//! decoded structure can ever dereference provably in range.

use crate::bits::{words_for, BitVec, CompactBitArray};
use crate::encoders::{
    high_part, low_width, rank_width, split_point, EfPilots, EliasFano, EncoderKind,
    FrontBackDictionary, PartitionedCompact, PilotEncoding, Region,
};
use crate::error::DecodeError;
use crate::hashing::{BucketMapper, HASH_VERSION};
use crate::hem::PartitionedMphf;
use crate::mphf::Mphf;

pub(crate) const MAGIC: [u8; 8] = *b"pthashfn";
pub(crate) const FORMAT_VERSION: u8 = 1;
/// Body tag marking a partitioned container instead of a flat function.
pub(crate) const TAG_PARTITIONED: u8 = 0xF0;

impl Mphf {
    /// Serializes the function. The output depends only on the function's
    /// contents, never on how it was built.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(HASH_VERSION);
        write_flat_body(&mut out, self);
        out
    }

    /// Deserializes a function written by [`Mphf::to_bytes`], validating the
    /// whole structure up front. Untrusted input is fine: corrupt or hostile
    /// bytes yield an error, never a panic or an oversized allocation.
    pub fn from_bytes(data: &[u8]) -> Result<Self, DecodeError> {
        let mut reader = ByteReader::new(data);
        read_header(&mut reader)?;
        let function = read_flat_body(&mut reader)?;
        reader.finish()?;
        Ok(function)
    }

    pub fn write_to<W: std::io::Write>(&self, mut writer: W) -> std::io::Result<()> {
        writer.write_all(&self.to_bytes())
    }

    pub fn read_from<R: std::io::Read>(mut reader: R) -> std::io::Result<Self> {
        let mut data = Vec::new();
        reader.read_to_end(&mut data)?;
        Self::from_bytes(&data)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

impl PartitionedMphf {
    /// Serializes the container: partition count, global seed, the offset
    /// table, then each partition as a flat body.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(HASH_VERSION);
        out.push(TAG_PARTITIONED);
        write_u64(&mut out, self.num_partitions());
        write_u64(&mut out, self.seed());
        for &offset in self.offsets() {
            write_u64(&mut out, offset);
        }
        for part in self.parts() {
            write_flat_body(&mut out, part);
        }
        out
    }

    /// Deserializes a container written by [`PartitionedMphf::to_bytes`],
    /// with the same stance as [`Mphf::from_bytes`]: corrupt or hostile input
    /// errors out, never panics.
    pub fn from_bytes(data: &[u8]) -> Result<Self, DecodeError> {
        let mut reader = ByteReader::new(data);
        read_header(&mut reader)?;
        let tag = reader.u8()?;
        if tag != TAG_PARTITIONED {
            return Err(DecodeError::Corrupt(
                "file holds a single flat function; decode it as Mphf",
            ));
        }
        let num_partitions = reader.u64()?;
        if num_partitions == 0 {
            return Err(DecodeError::Corrupt("no partitions"));
        }
        let global_seed = reader.u64()?;
        let offset_count =
            usize::try_from(add(num_partitions, 1)?).map_err(|_| DecodeError::Truncated)?;
        let offsets = reader.words(offset_count)?;
        if offsets[0] != 0 {
            return Err(DecodeError::Corrupt("offsets must start at zero"));
        }
        if offsets.windows(2).any(|pair| pair[1] < pair[0]) {
            return Err(DecodeError::Corrupt("offsets must not decrease"));
        }
        let mut parts = Vec::with_capacity(offsets.len() - 1);
        for pair in offsets.windows(2) {
            let part = read_flat_body(&mut reader)?;
            if part.num_keys() != pair[1] - pair[0] {
                return Err(DecodeError::Corrupt("partition size disagrees with the offsets"));
            }
            parts.push(part);
        }
        reader.finish()?;
        Ok(PartitionedMphf::from_decoded(global_seed, offsets, parts))
    }

    pub fn write_to<W: std::io::Write>(&self, mut writer: W) -> std::io::Result<()> {
        writer.write_all(&self.to_bytes())
    }

    pub fn read_from<R: std::io::Read>(mut reader: R) -> std::io::Result<Self> {
        let mut data = Vec::new();
        reader.read_to_end(&mut data)?;
        Self::from_bytes(&data)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

/// Checks magic and both version bytes, leaving the reader at the tag.
pub(crate) fn read_header(reader: &mut ByteReader) -> Result<(), DecodeError> {
    let magic = reader.bytes::<8>()?;
    if magic != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let format_version = reader.u8()?;
    if format_version != FORMAT_VERSION {
        return Err(DecodeError::UnsupportedFormatVersion(format_version));
    }
    let hash_version = reader.u8()?;
    if hash_version != HASH_VERSION {
        return Err(DecodeError::UnsupportedHashVersion(hash_version));
    }
    Ok(())
}

/// Writes tag + flat body; shared between flat files and container entries.
pub(crate) fn write_flat_body(out: &mut Vec<u8>, f: &Mphf) {
    out.push(f.pilots.kind().tag());
    write_u64(out, f.seed);
    write_u64(out, f.mapper.n());
    write_u64(out, f.n_prime);
    write_u64(out, f.mapper.m());
    write_u64(out, f.mapper.p1());
    write_u64(out, f.mapper.p2());
    match &f.pilots {
        PilotEncoding::Dictionary(d) => write_dictionary(out, d),
        PilotEncoding::Compact(c) => write_compact(out, c),
        PilotEncoding::EliasFano(e) => write_elias_fano(out, e.sums()),
    }
    write_elias_fano(out, f.free());
}

/// Reads tag + flat body; the counterpart of [`write_flat_body`].
pub(crate) fn read_flat_body(reader: &mut ByteReader) -> Result<Mphf, DecodeError> {
    let tag = reader.u8()?;
    if tag == TAG_PARTITIONED {
        return Err(DecodeError::Corrupt(
            "file holds a partitioned function; decode it as PartitionedMphf",
        ));
    }
    let Some(kind) = EncoderKind::from_tag(tag) else {
        return Err(DecodeError::Corrupt("unknown encoder tag"));
    };
    let seed = reader.u64()?;
    let n = reader.u64()?;
    let n_prime = reader.u64()?;
    let m = reader.u64()?;
    let p1 = reader.u64()?;
    let p2 = reader.u64()?;

    if n == 0 && (n_prime != 0 || m != 0) {
        return Err(DecodeError::Corrupt("empty function with nonzero geometry"));
    }
    if n > 0 && (n_prime < n || m == 0) {
        return Err(DecodeError::Corrupt("table smaller than the key count"));
    }
    // The thresholds are functions of (n, m); stored copies must agree.
    let mapper = BucketMapper::new(n, m);
    if mapper.p1() != p1 || mapper.p2() != p2 {
        return Err(DecodeError::Corrupt("bucket thresholds disagree with n and m"));
    }

    let pilots = match kind {
        EncoderKind::Dictionary => PilotEncoding::Dictionary(read_dictionary(reader)?),
        EncoderKind::Compact => PilotEncoding::Compact(read_compact(reader)?),
        EncoderKind::EliasFano => {
            let sums = read_elias_fano(reader)?;
            if sums.is_empty() || sums.access(0) != 0 {
                return Err(DecodeError::Corrupt("pilot prefix sums must start at zero"));
            }
            PilotEncoding::EliasFano(EfPilots::from_parts(sums))
        }
    };
    if pilots.len() != m {
        return Err(DecodeError::Corrupt("pilot table length disagrees with bucket count"));
    }

    let free = read_elias_fano(reader)?;
    if free.len() != n_prime - n {
        return Err(DecodeError::Corrupt("redirect count disagrees with table slack"));
    }
    if free.universe() > n || (free.is_empty() && free.universe() != 0) {
        return Err(DecodeError::Corrupt("redirect universe out of range"));
    }

    Ok(Mphf::from_decoded(seed, mapper, n_prime, pilots, free))
}

fn write_dictionary(out: &mut Vec<u8>, d: &FrontBackDictionary) {
    write_u64(out, d.len());
    write_u64(out, d.split());
    for region in [d.front(), d.back()] {
        write_bit_array(out, &region.dict);
        write_bit_array(out, &region.ranks);
    }
}

fn read_dictionary(reader: &mut ByteReader) -> Result<FrontBackDictionary, DecodeError> {
    let len = reader.u64()?;
    let split = reader.u64()?;
    if split != split_point(len) {
        return Err(DecodeError::Corrupt("dictionary split disagrees with its length"));
    }
    let front = read_region(reader, split)?;
    let back = read_region(reader, len - split)?;
    Ok(FrontBackDictionary::from_parts(len, split, front, back))
}

fn read_region(reader: &mut ByteReader, table_len: u64) -> Result<Region, DecodeError> {
    let dict = read_bit_array(reader)?;
    if dict.width() == 0 {
        return Err(DecodeError::Corrupt("dictionary value width must be nonzero"));
    }
    let ranks = read_bit_array(reader)?;
    if ranks.len() != table_len {
        return Err(DecodeError::Corrupt("rank table length disagrees with its region"));
    }
    if ranks.width() != rank_width(dict.len()) {
        return Err(DecodeError::Corrupt("rank width disagrees with dictionary size"));
    }
    // Every rank must index into the dictionary, or lookups walk off it.
    if ranks.iter().any(|rank| rank >= dict.len()) {
        return Err(DecodeError::Corrupt("rank exceeds dictionary size"));
    }
    Ok(Region { dict, ranks })
}

fn write_compact(out: &mut Vec<u8>, c: &PartitionedCompact) {
    write_u64(out, c.len());
    write_u64(out, c.block_size());
    for &w in c.widths_prefix() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    write_words(out, c.payload_words());
}

fn read_compact(reader: &mut ByteReader) -> Result<PartitionedCompact, DecodeError> {
    let len = reader.u64()?;
    let block_size = reader.u64()?;
    if block_size == 0 {
        return Err(DecodeError::Corrupt("compact block size must be nonzero"));
    }
    let num_blocks = len.div_ceil(block_size);
    let widths_prefix = reader.u32s(add(num_blocks, 1)?)?;
    if widths_prefix.first() != Some(&0) {
        return Err(DecodeError::Corrupt("width table must start at zero"));
    }
    // Each block's width is a prefix difference; pin them to [1, 64] so every
    // access reads a real, in-bounds bit span.
    let mut payload_bits = 0u64;
    for (b, pair) in widths_prefix.windows(2).enumerate() {
        let width = pair[1].wrapping_sub(pair[0]) as u64;
        if pair[1] < pair[0] || width == 0 || width > 64 {
            return Err(DecodeError::Corrupt("compact block width out of range"));
        }
        let b = b as u64;
        let in_block = (len - b * block_size).min(block_size);
        payload_bits = add(payload_bits, mul(width, in_block)?)?;
    }
    let payload = reader.words(words_for(payload_bits))?;
    check_no_junk_bits(&payload, payload_bits)?;
    Ok(PartitionedCompact::from_parts(len, block_size, widths_prefix, payload, payload_bits))
}

fn write_elias_fano(out: &mut Vec<u8>, e: &EliasFano) {
    write_u64(out, e.len());
    write_u64(out, e.universe());
    write_bit_array(out, e.low());
    write_u64(out, e.high().len());
    write_words(out, e.high().payload_words());
}

fn read_elias_fano(reader: &mut ByteReader) -> Result<EliasFano, DecodeError> {
    let len = reader.u64()?;
    let universe = reader.u64()?;
    let low = read_bit_array(reader)?;
    if low.len() != len || low.width() != low_width(len, universe) {
        return Err(DecodeError::Corrupt("low-bit plane disagrees with length and universe"));
    }
    let high_len = reader.u64()?;
    if high_len != add(add(len, high_part(universe, low.width()))?, 1)? {
        return Err(DecodeError::Corrupt("high bitmap length disagrees with the universe"));
    }
    let high_words = reader.words(words_for(high_len))?;
    check_no_junk_bits(&high_words, high_len)?;
    let high = BitVec::from_words(high_words, high_len);
    // Select support assumes exactly one set bit per element.
    if high.count_ones() != len {
        return Err(DecodeError::Corrupt("high bitmap population disagrees with length"));
    }
    Ok(EliasFano::from_parts(len, universe, low, high))
}

fn write_bit_array(out: &mut Vec<u8>, a: &CompactBitArray) {
    out.push(a.width() as u8);
    write_u64(out, a.len());
    write_words(out, a.payload_words());
}

fn read_bit_array(reader: &mut ByteReader) -> Result<CompactBitArray, DecodeError> {
    let width = reader.u8()? as u32;
    if width > 64 {
        return Err(DecodeError::Corrupt("bit width above 64"));
    }
    let len = reader.u64()?;
    let bits = if width == 0 { 0 } else { mul(width as u64, len)? };
    let words = reader.words(words_for(bits))?;
    check_no_junk_bits(&words, bits)?;
    Ok(CompactBitArray::from_words(words, width, len))
}

/// Writers zero the tail of the last payload word; readers insist on it so
/// every accepted file is the canonical encoding of its contents.
fn check_no_junk_bits(words: &[u64], bits: u64) -> Result<(), DecodeError> {
    let tail = bits % 64;
    if tail != 0 && words.last().is_some_and(|&w| w >> tail != 0) {
        return Err(DecodeError::Corrupt("set bits beyond the declared length"));
    }
    Ok(())
}

fn write_u64(out: &mut Vec<u8>, value: u64) {
    out.extend_from_slice(&value.to_le_bytes());
}

fn write_words(out: &mut Vec<u8>, words: &[u64]) {
    for &word in words {
        out.extend_from_slice(&word.to_le_bytes());
    }
}

fn add(a: u64, b: u64) -> Result<u64, DecodeError> {
    a.checked_add(b).ok_or(DecodeError::Corrupt("length arithmetic overflows"))
}

fn mul(a: u64, b: u64) -> Result<u64, DecodeError> {
    a.checked_mul(b).ok_or(DecodeError::Corrupt("length arithmetic overflows"))
}

/// Bounds-checked little-endian cursor. Multi-element reads verify the byte
/// count against what is left *before* allocating.
pub(crate) struct ByteReader<'a> {
    data: &'a [u8],
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(data: &'a [u8]) -> Self {
        Self { data }
    }

    fn take(&mut self, count: usize) -> Result<&'a [u8], DecodeError> {
        if self.data.len() < count {
            return Err(DecodeError::Truncated);
        }
        let (head, tail) = self.data.split_at(count);
        self.data = tail;
        Ok(head)
    }

    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        Ok(self.take(N)?.try_into().expect("take returned N bytes"))
    }

    pub(crate) fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.bytes::<1>()?[0])
    }

    pub(crate) fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    pub(crate) fn words(&mut self, count: usize) -> Result<Vec<u64>, DecodeError> {
        let raw = self.take(count.checked_mul(8).ok_or(DecodeError::Truncated)?)?;
        Ok(raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn u32s(&mut self, count: u64) -> Result<Vec<u32>, DecodeError> {
        let count = usize::try_from(count).map_err(|_| DecodeError::Truncated)?;
        let raw = self.take(count.checked_mul(4).ok_or(DecodeError::Truncated)?)?;
        Ok(raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    /// Rejects trailing bytes; a valid file is consumed exactly.
    pub(crate) fn finish(&self) -> Result<(), DecodeError> {
        if self.data.is_empty() {
            Ok(())
        } else {
            Err(DecodeError::Corrupt("trailing bytes"))
        }
    }
}
