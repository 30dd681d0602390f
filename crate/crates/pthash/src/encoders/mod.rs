//! Pilot-table encodings. All three answer `access(i)` = the i-th pilot; they
//! differ in how aggressively they trade lookup work for space.
//!
//! - [`FrontBackDictionary`] — two dictionaries of distinct pilot values with
//!   fixed-width rank indexes, split at the dense/sparse bucket boundary.
//! - [`PartitionedCompact`] — fixed-width blocks, each block as wide as its
//!   largest pilot. Two memory reads per access, no data-dependent branches.
//! - [`EfPilots`] — Elias-Fano over pilot prefix sums; smallest, slowest.

mod dict;
mod ef;
mod pc;

pub use dict::FrontBackDictionary;
pub use ef::EliasFano;
pub use pc::PartitionedCompact;

pub(crate) use dict::{rank_width, split_point, Region};
pub(crate) use ef::{high_part, low_width};

/// Encoding error: the input violates the encoder's preconditions.
#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("sequence is not monotone non-decreasing at index {0}")]
    NotMonotone(usize),
    #[error("value at index {0} is not below the declared universe")]
    UniverseOverflow(usize),
}

/// Which pilot encoder a build should use / a file did use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncoderKind {
    /// Front-back dictionary.
    #[default]
    Dictionary,
    /// Partitioned compact.
    Compact,
    /// Elias-Fano.
    EliasFano,
}

impl EncoderKind {
    pub(crate) const TAG_DICTIONARY: u8 = 1;
    pub(crate) const TAG_COMPACT: u8 = 2;
    pub(crate) const TAG_ELIAS_FANO: u8 = 3;

    pub(crate) fn tag(self) -> u8 {
        match self {
            EncoderKind::Dictionary => Self::TAG_DICTIONARY,
            EncoderKind::Compact => Self::TAG_COMPACT,
            EncoderKind::EliasFano => Self::TAG_ELIAS_FANO,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            Self::TAG_DICTIONARY => Some(EncoderKind::Dictionary),
            Self::TAG_COMPACT => Some(EncoderKind::Compact),
            Self::TAG_ELIAS_FANO => Some(EncoderKind::EliasFano),
            _ => None,
        }
    }

    /// Name used in CLI flags and CSV reports.
    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::Dictionary => "dd",
            EncoderKind::Compact => "pc",
            EncoderKind::EliasFano => "ef",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dd" => Some(EncoderKind::Dictionary),
            "pc" => Some(EncoderKind::Compact),
            "ef" => Some(EncoderKind::EliasFano),
            _ => None,
        }
    }
}

/// Elias-Fano over pilot prefix sums: element `i` is recovered as the
/// difference of consecutive sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfPilots {
    /// `len + 1` prefix sums, leading zero included.
    sums: EliasFano,
}

impl EfPilots {
    pub fn encode(pilots: &[u64]) -> Self {
        let mut sums = Vec::with_capacity(pilots.len() + 1);
        let mut total = 0u64;
        sums.push(0);
        for &p in pilots {
            total += p;
            sums.push(total);
        }
        let sums = EliasFano::encode(&sums, total + 1).expect("prefix sums are monotone");
        Self { sums }
    }

    pub(crate) fn from_parts(sums: EliasFano) -> Self {
        Self { sums }
    }

    pub(crate) fn sums(&self) -> &EliasFano {
        &self.sums
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.sums.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn access(&self, i: u64) -> u64 {
        // Wrapping: a corrupt (non-monotone) file must return garbage, not
        // abort; well-formed encodings never wrap.
        self.sums.access(i + 1).wrapping_sub(self.sums.access(i))
    }

    pub fn size_bits(&self) -> u64 {
        self.sums.size_bits()
    }
}

/// A pilot table in whichever encoding the build chose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PilotEncoding {
    Dictionary(FrontBackDictionary),
    Compact(PartitionedCompact),
    EliasFano(EfPilots),
}

impl PilotEncoding {
    pub fn encode(kind: EncoderKind, pilots: &[u64]) -> Self {
        match kind {
            EncoderKind::Dictionary => {
                PilotEncoding::Dictionary(FrontBackDictionary::encode(pilots))
            }
            EncoderKind::Compact => PilotEncoding::Compact(PartitionedCompact::encode(pilots)),
            EncoderKind::EliasFano => PilotEncoding::EliasFano(EfPilots::encode(pilots)),
        }
    }

    pub fn kind(&self) -> EncoderKind {
        match self {
            PilotEncoding::Dictionary(_) => EncoderKind::Dictionary,
            PilotEncoding::Compact(_) => EncoderKind::Compact,
            PilotEncoding::EliasFano(_) => EncoderKind::EliasFano,
        }
    }

    pub fn len(&self) -> u64 {
        match self {
            PilotEncoding::Dictionary(d) => d.len(),
            PilotEncoding::Compact(c) => c.len(),
            PilotEncoding::EliasFano(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn access(&self, i: u64) -> u64 {
        match self {
            PilotEncoding::Dictionary(d) => d.access(i),
            PilotEncoding::Compact(c) => c.access(i),
            PilotEncoding::EliasFano(e) => e.access(i),
        }
    }

    pub fn size_bits(&self) -> u64 {
        match self {
            PilotEncoding::Dictionary(d) => d.size_bits(),
            PilotEncoding::Compact(c) => c.size_bits(),
            PilotEncoding::EliasFano(e) => e.size_bits(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;
    use proptest::prelude::*;

    #[test]
    fn encoder_kind_tags_roundtrip() {
        for kind in [EncoderKind::Dictionary, EncoderKind::Compact, EncoderKind::EliasFano] {
            assert_eq!(EncoderKind::from_tag(kind.tag()), Some(kind));
            assert_eq!(EncoderKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(EncoderKind::from_tag(0), None);
        assert_eq!(EncoderKind::parse("zstd"), None);
    }

    /// Oracle equivalence: every encoder must agree with the raw vector.
    #[test]
    fn all_encoders_match_plain_vector_oracle() {
        let mut rng = SplitMix64::new(404);
        for round in 0..100 {
            let len = (rng.next_u64() % 300) as usize + 1;
            let magnitude = 1 + rng.next_u64() % 17;
            let values: Vec<u64> =
                (0..len).map(|_| rng.next_u64() >> (64 - magnitude)).collect();
            for kind in [EncoderKind::Dictionary, EncoderKind::Compact, EncoderKind::EliasFano] {
                let enc = PilotEncoding::encode(kind, &values);
                assert_eq!(enc.len(), values.len() as u64);
                for (i, &v) in values.iter().enumerate() {
                    assert_eq!(
                        enc.access(i as u64),
                        v,
                        "round {round} kind {:?} index {i}",
                        kind
                    );
                }
            }
        }
    }

    #[test]
    fn empty_sequences_are_valid() {
        for kind in [EncoderKind::Dictionary, EncoderKind::Compact, EncoderKind::EliasFano] {
            let enc = PilotEncoding::encode(kind, &[]);
            assert_eq!(enc.len(), 0);
        }
    }

    proptest! {
        #[test]
        fn encoders_are_access_equivalent(values in prop::collection::vec(0u64..100_000, 0..400)) {
            for kind in [EncoderKind::Dictionary, EncoderKind::Compact, EncoderKind::EliasFano] {
                let enc = PilotEncoding::encode(kind, &values);
                for (i, &v) in values.iter().enumerate() {
                    prop_assert_eq!(enc.access(i as u64), v);
                }
            }
        }
    }
}
