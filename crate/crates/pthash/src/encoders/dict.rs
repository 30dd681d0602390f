//! Front-back dictionary pilot encoding.
//!
//! Pilot values repeat heavily, so each table entry is a fixed-width rank
//! into a dictionary of the distinct values. Splitting the table at the
//! dense/sparse bucket boundary (~0.3 m) lets the two regions use separate,
//! smaller dictionaries — the regions' pilot distributions differ enough that
//! one shared dictionary would waste rank bits on both.

use crate::bits::CompactBitArray;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontBackDictionary {
    len: u64,
    /// Table index where the back region begins: `ceil(0.3 * len)`.
    split: u64,
    front: Region,
    back: Region,
}

/// One region: sorted distinct values plus a rank per table slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Region {
    pub(crate) dict: CompactBitArray,
    pub(crate) ranks: CompactBitArray,
}

impl Region {
    fn encode(values: &[u64]) -> Self {
        let mut distinct: Vec<u64> = values.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let value_width = distinct.last().map_or(1, |&max| bits_to_hold(max));
        let dict = CompactBitArray::from_values(value_width, distinct.iter().copied());
        let rank_width = rank_width(distinct.len() as u64);
        let ranks = CompactBitArray::from_values(
            rank_width,
            values
                .iter()
                .map(|v| distinct.binary_search(v).expect("value is in its dictionary") as u64),
        );
        Self { dict, ranks }
    }

    #[inline]
    fn access(&self, i: u64) -> u64 {
        self.dict.get(self.ranks.get(i))
    }

    fn size_bits(&self) -> u64 {
        self.dict.len() * self.dict.width() as u64 + self.ranks.len() * self.ranks.width() as u64
    }
}

impl FrontBackDictionary {
    pub fn encode(values: &[u64]) -> Self {
        let split = split_point(values.len() as u64);
        let (front, back) = values.split_at(split as usize);
        Self {
            len: values.len() as u64,
            split,
            front: Region::encode(front),
            back: Region::encode(back),
        }
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn access(&self, i: u64) -> u64 {
        debug_assert!(i < self.len);
        if i < self.split {
            self.front.access(i)
        } else {
            self.back.access(i - self.split)
        }
    }

    /// Serialized payload size: both dictionaries and both rank tables.
    pub fn size_bits(&self) -> u64 {
        self.front.size_bits() + self.back.size_bits()
    }

    pub(crate) fn split(&self) -> u64 {
        self.split
    }

    pub(crate) fn front(&self) -> &Region {
        &self.front
    }

    pub(crate) fn back(&self) -> &Region {
        &self.back
    }

    pub(crate) fn from_parts(len: u64, split: u64, front: Region, back: Region) -> Self {
        Self { len, split, front, back }
    }
}

pub(crate) fn split_point(len: u64) -> u64 {
    (3 * len).div_ceil(10)
}

/// Bits to index a dictionary of `len` entries (at least 1 so empty and
/// single-entry regions still have addressable rank slots).
pub(crate) fn rank_width(len: u64) -> u32 {
    if len <= 1 {
        1
    } else {
        bits_to_hold(len - 1)
    }
}

fn bits_to_hold(max: u64) -> u32 {
    if max == 0 {
        1
    } else {
        64 - max.leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;

    #[test]
    fn three_distinct_front_values_need_two_rank_bits() {
        // len 10 -> split at ceil(0.3 * 10) = 3: front region is [7, 9, 11].
        let values = [7u64, 9, 11, 500, 500, 500, 500, 500, 500, 500];
        assert_eq!(split_point(values.len() as u64), 3);
        let d = FrontBackDictionary::encode(&values);
        assert_eq!(d.front().dict.len(), 3);
        assert_eq!(d.front().ranks.width(), 2); // ceil(log2 3)
        assert_eq!(d.back().dict.len(), 1);
        assert_eq!(d.back().ranks.width(), 1);
        for (i, &v) in values.iter().enumerate() {
            assert_eq!(d.access(i as u64), v);
        }
    }

    #[test]
    fn constant_sequence_uses_single_entry_dictionaries() {
        let values = [4u64; 20];
        let d = FrontBackDictionary::encode(&values);
        assert_eq!(d.front().dict.len(), 1);
        assert_eq!(d.back().dict.len(), 1);
        assert_eq!(d.front().ranks.width(), 1);
        for i in 0..20 {
            assert_eq!(d.access(i), 4);
        }
    }

    #[test]
    fn empty_and_tiny_tables() {
        let d = FrontBackDictionary::encode(&[]);
        assert_eq!(d.len(), 0);
        let d = FrontBackDictionary::encode(&[42]);
        assert_eq!(d.access(0), 42);
    }

    #[test]
    fn random_roundtrip_with_clustered_values() {
        let mut rng = SplitMix64::new(37);
        let values: Vec<u64> = (0..5000)
            .map(|i| {
                if i < 1500 {
                    rng.next_u64() % 4000 // dense region: larger pilots
                } else {
                    rng.next_u64() % 150
                }
            })
            .collect();
        let d = FrontBackDictionary::encode(&values);
        for (i, &v) in values.iter().enumerate() {
            assert_eq!(d.access(i as u64), v);
        }
    }
}
