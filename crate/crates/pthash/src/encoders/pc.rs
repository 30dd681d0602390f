//! Partitioned-compact pilot encoding.
//!
//! The table is cut into blocks of `BLOCK_SIZE` values; each block is packed
//! at the fixed width its largest value needs (minimum 1 bit, so access never
//! divides by zero and all-zero blocks stay addressable). A prefix-sum table
//! `W` over the block widths locates any block's first bit, making access two
//! memory reads — one into `W`, one into the payload — with no data-dependent
//! branches.

use crate::bits::{read_bits, words_for, write_bits};

/// Production block size; tests shrink it to make layouts hand-checkable.
pub const BLOCK_SIZE: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedCompact {
    len: u64,
    block_size: u64,
    /// Cumulative block widths: `widths_prefix[b]` is the total width of
    /// blocks before `b`, one final entry for the running total.
    widths_prefix: Vec<u32>,
    /// Packed values, one slack word appended for the two-word reader.
    payload: Vec<u64>,
    /// Exact occupied payload bits (the final partial block is not padded).
    payload_bits: u64,
}

impl PartitionedCompact {
    pub fn encode(values: &[u64]) -> Self {
        Self::encode_with_block_size(values, BLOCK_SIZE)
    }

    pub fn encode_with_block_size(values: &[u64], block_size: u64) -> Self {
        assert!(block_size >= 1);
        let mut widths_prefix = Vec::with_capacity(values.len() / block_size as usize + 2);
        widths_prefix.push(0u32);
        let mut payload_bits = 0u64;
        for block in values.chunks(block_size as usize) {
            let max = block.iter().copied().max().unwrap_or(0);
            let width = width_for(max);
            widths_prefix.push(widths_prefix.last().unwrap() + width);
            payload_bits += width as u64 * block.len() as u64;
        }
        let mut payload = vec![0u64; words_for(payload_bits) + 1];
        for (b, block) in values.chunks(block_size as usize).enumerate() {
            let width = widths_prefix[b + 1] - widths_prefix[b];
            let base = widths_prefix[b] as u64 * block_size;
            for (off, &v) in block.iter().enumerate() {
                write_bits(&mut payload, base + off as u64 * width as u64, width, v);
            }
        }
        Self { len: values.len() as u64, block_size, widths_prefix, payload, payload_bits }
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Two reads, branch-free on the stored data.
    #[inline]
    pub fn access(&self, i: u64) -> u64 {
        debug_assert!(i < self.len);
        let block = (i / self.block_size) as usize;
        let offset = i % self.block_size;
        let start = self.widths_prefix[block];
        let width = self.widths_prefix[block + 1] - start;
        let position = start as u64 * self.block_size + offset * width as u64;
        read_bits(&self.payload, position, width)
    }

    pub(crate) fn block_size(&self) -> u64 {
        self.block_size
    }

    pub(crate) fn widths_prefix(&self) -> &[u32] {
        &self.widths_prefix
    }

    #[cfg(test)]
    pub(crate) fn payload_bits(&self) -> u64 {
        self.payload_bits
    }

    /// Serialized payload size: the width table plus the packed blocks.
    pub fn size_bits(&self) -> u64 {
        self.widths_prefix.len() as u64 * 32 + self.payload_bits
    }

    pub(crate) fn payload_words(&self) -> &[u64] {
        &self.payload[..words_for(self.payload_bits)]
    }

    pub(crate) fn from_parts(
        len: u64,
        block_size: u64,
        widths_prefix: Vec<u32>,
        mut payload: Vec<u64>,
        payload_bits: u64,
    ) -> Self {
        payload.push(0);
        Self { len, block_size, widths_prefix, payload, payload_bits }
    }
}

/// Width of the widest value: `ceil(log2(max + 1))`, floored at 1 bit.
fn width_for(max: u64) -> u32 {
    if max == 0 {
        1
    } else {
        64 - max.leading_zeros()
    }
}
