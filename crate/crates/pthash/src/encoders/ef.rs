//! Elias-Fano encoding of a monotone sequence.
//!
//! Values below `universe` split into `low_width` explicit low bits and a
//! unary-coded high part: element `i` sets bit `(value >> low_width) + i` of
//! the high bitmap. `access(i)` therefore needs select-of-the-i-th-one over
//! the high bitmap, answered from positions sampled every `SELECT_SAMPLE`
//! ones plus a short scan — the high bitmap's density is at least ~1/3 by
//! construction, so the scan is bounded.

use crate::bits::{select_in_word, BitVec, CompactBitArray};
use super::EncodeError;

/// One sampled select position per this many set bits.
pub const SELECT_SAMPLE: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliasFano {
    len: u64,
    universe: u64,
    low: CompactBitArray,
    high: BitVec,
    /// Bit position of every `SELECT_SAMPLE`-th one in `high`.
    select_samples: Vec<u64>,
}

impl EliasFano {
    /// Encodes a non-decreasing sequence of values `< universe`.
    pub fn encode(values: &[u64], universe: u64) -> Result<Self, EncodeError> {
        let len = values.len() as u64;
        let low_width = low_width(len, universe);
        let mut low = CompactBitArray::new(low_width, len);
        let high_len = len + high_part(universe, low_width) + 1;
        let mut high = BitVec::new(high_len);
        let mut prev = 0u64;
        for (i, &v) in values.iter().enumerate() {
            if v < prev {
                return Err(EncodeError::NotMonotone(i));
            }
            if v >= universe {
                return Err(EncodeError::UniverseOverflow(i));
            }
            prev = v;
            if low_width > 0 {
                low.set(i as u64, v & ((1 << low_width) - 1));
            }
            high.set(high_part(v, low_width) + i as u64);
        }
        let select_samples = build_select_samples(&high);
        Ok(Self { len, universe, low, high, select_samples })
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    /// Serialized payload size: the explicit low bits plus the high bitmap.
    /// Select samples are rebuilt on load and don't count.
    pub fn size_bits(&self) -> u64 {
        self.len * self.low.width() as u64 + self.high.len()
    }

    /// The `i`-th value.
    #[inline]
    pub fn access(&self, i: u64) -> u64 {
        debug_assert!(i < self.len);
        let high = self.select1(i) - i;
        (high << self.low.width()) | self.low.get(i)
    }

    /// Position of the `i`-th set bit of the high bitmap.
    #[inline]
    fn select1(&self, i: u64) -> u64 {
        let sample = (i / SELECT_SAMPLE) as usize;
        let pos = self.select_samples[sample];
        let skip = (i % SELECT_SAMPLE) as u32;
        if skip == 0 {
            return pos;
        }
        // 0-based rank among the ones strictly after the sampled bit.
        let mut remaining = skip - 1;
        let words = self.high.words();
        let mut word_idx = (pos >> 6) as usize;
        // Mask away the sampled bit and everything below it, then walk words.
        let mut word = words[word_idx] & !(((1u64 << (pos & 63)) << 1).wrapping_sub(1));
        loop {
            let ones = word.count_ones();
            if ones > remaining {
                return (word_idx as u64) << 6 | select_in_word(word, remaining) as u64;
            }
            remaining -= ones;
            word_idx += 1;
            word = words[word_idx];
        }
    }

    pub(crate) fn low(&self) -> &CompactBitArray {
        &self.low
    }

    pub(crate) fn high(&self) -> &BitVec {
        &self.high
    }

    /// Reassembles a decoded structure; select samples are derived state and
    /// are rebuilt rather than stored.
    pub(crate) fn from_parts(len: u64, universe: u64, low: CompactBitArray, high: BitVec) -> Self {
        let select_samples = build_select_samples(&high);
        Self { len, universe, low, high, select_samples }
    }
}

/// Low-bit plane width: `floor(log2(universe / len))`, zero when the
/// sequence is dense enough that the high bitmap alone is cheaper.
pub(crate) fn low_width(len: u64, universe: u64) -> u32 {
    if len == 0 || universe <= len {
        0
    } else {
        (universe / len).ilog2()
    }
}

#[inline]
pub(crate) fn high_part(value: u64, low_width: u32) -> u64 {
    value >> low_width
}

fn build_select_samples(high: &BitVec) -> Vec<u64> {
    let mut samples = Vec::new();
    let mut seen = 0u64;
    for (w, &word) in high.payload_words().iter().enumerate() {
        let mut word = word;
        while word != 0 {
            if seen % SELECT_SAMPLE == 0 {
                samples.push((w as u64) << 6 | word.trailing_zeros() as u64);
            }
            word &= word - 1;
            seen += 1;
        }
    }
    samples
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;

    #[test]
    fn small_sequence_access() {
        // universe 13, len 4 -> low_width = floor(log2(13/4)) = 1.
        let ef = EliasFano::encode(&[0, 3, 7, 12], 13).unwrap();
        assert_eq!(ef.low().width(), 1);
        assert_eq!(ef.access(0), 0);
        assert_eq!(ef.access(1), 3);
        assert_eq!(ef.access(2), 7);
        assert_eq!(ef.access(3), 12);
    }

    #[test]
    fn empty_sequence_is_valid() {
        let ef = EliasFano::encode(&[], 0).unwrap();
        assert_eq!(ef.len(), 0);
    }

    #[test]
    fn rejects_non_monotone_and_overflow() {
        assert_eq!(
            EliasFano::encode(&[3, 2], 10).unwrap_err(),
            EncodeError::NotMonotone(1)
        );
        assert_eq!(
            EliasFano::encode(&[3, 10], 10).unwrap_err(),
            EncodeError::UniverseOverflow(1)
        );
    }

    #[test]
    fn duplicates_are_fine() {
        let ef = EliasFano::encode(&[5, 5, 5, 9, 9], 10).unwrap();
        for (i, v) in [5u64, 5, 5, 9, 9].into_iter().enumerate() {
            assert_eq!(ef.access(i as u64), v);
        }
    }

    #[test]
    fn large_random_roundtrip_crossing_sample_boundaries() {
        let mut rng = SplitMix64::new(23);
        let universe = 10_000_000u64;
        let mut values: Vec<u64> = (0..100_000).map(|_| rng.next_u64() % universe).collect();
        values.sort_unstable();
        let ef = EliasFano::encode(&values, universe).unwrap();
        for (i, &v) in values.iter().enumerate() {
            assert_eq!(ef.access(i as u64), v, "index {i}");
        }
    }

    #[test]
    fn dense_sequence_gets_zero_low_width() {
        let values: Vec<u64> = (0..1000).collect();
        let ef = EliasFano::encode(&values, 1000).unwrap();
        assert_eq!(ef.low().width(), 0);
        for (i, &v) in values.iter().enumerate() {
            assert_eq!(ef.access(i as u64), v);
        }
    }

    /// Measured size stays within 15% of `len * (ceil(log2(u/len)) + 2)` bits
    /// plus the o(1) sampling overhead, across sparsities.
    #[test]
    fn size_tracks_information_bound() {
        let mut rng = SplitMix64::new(29);
        for &(len, universe) in
            &[(63_830u64, 1_000_000u64), (10_102, 1_000_000), (136_364, 1_000_000)]
        {
            let mut values: Vec<u64> = (0..len).map(|_| rng.next_u64() % universe).collect();
            values.sort_unstable();
            let ef = EliasFano::encode(&values, universe).unwrap();
            let measured = (ef.low().payload_words().len()
                + ef.high().payload_words().len()
                + ef.select_samples.len()) as u64
                * 64;
            let ratio = universe as f64 / len as f64;
            let bound = len as f64 * (ratio.log2().ceil() + 2.0);
            assert!(
                (measured as f64) <= bound * 1.15,
                "len {len}: measured {measured} vs bound {bound}"
            );
        }
    }
}
