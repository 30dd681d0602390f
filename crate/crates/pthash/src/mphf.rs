//! The queryable function: a seed, the bucket geometry, an encoded pilot per
//! bucket, and the fold-back redirects.

use crate::build::{FreeArray, PilotsTable};
use crate::encoders::{EliasFano, EncoderKind, PilotEncoding};
use crate::hashing::{BucketMapper, KeyHasher, Mix64, Murmur3, PilotHasher};

/// A minimal perfect hash function: maps each of the `n` keys it was built
/// from to a distinct value in `[0, n)`.
///
/// Keys outside the build set still produce *some* value in `[0, n)`; the
/// function cannot tell members from strangers. Build one with
/// [`build`](crate::build()), [`build_external`](crate::build_external) or
/// the [`Mphf::from_bytes`] deserializer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mphf {
    pub(crate) seed: u64,
    pub(crate) mapper: BucketMapper,
    pub(crate) n_prime: u64,
    pub(crate) pilots: PilotEncoding,
    pub(crate) free: EliasFano,
}

impl Mphf {
    pub(crate) fn from_parts(
        seed: u64,
        mapper: BucketMapper,
        n_prime: u64,
        encoder: EncoderKind,
        pilots: &PilotsTable,
        free: &FreeArray,
    ) -> Self {
        let pilots = PilotEncoding::encode(encoder, pilots.as_slice());
        // The redirects are nondecreasing, so the last one bounds them all.
        let universe = free.values.last().map_or(0, |&v| v + 1);
        let free = EliasFano::encode(&free.values, universe)
            .expect("fold-back redirects are nondecreasing by construction");
        Self { seed, mapper, n_prime, pilots, free }
    }

    pub(crate) fn from_decoded(
        seed: u64,
        mapper: BucketMapper,
        n_prime: u64,
        pilots: PilotEncoding,
        free: EliasFano,
    ) -> Self {
        Self { seed, mapper, n_prime, pilots, free }
    }

    /// The value of `key` in `[0, n)`. Total over all byte strings; only keys
    /// of the build set get the perfect-bijection guarantee.
    #[inline]
    pub fn lookup(&self, key: &[u8]) -> u64 {
        let n = self.mapper.n();
        if n == 0 {
            return 0;
        }
        let hash = Murmur3.hash_key(key, self.seed);
        let bucket = self.mapper.bucket_of(hash.bucket_hash);
        let pilot = self.pilots.access(bucket);
        let position = (hash.position_hash ^ Mix64.hash_pilot(pilot)) % self.n_prime;
        if position < n {
            position
        } else {
            self.free.access(position - n)
        }
    }

    /// Number of keys the function was built from.
    pub fn num_keys(&self) -> u64 {
        self.mapper.n()
    }

    pub fn is_empty(&self) -> bool {
        self.num_keys() == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn encoder(&self) -> EncoderKind {
        self.pilots.kind()
    }

    /// Payload size of the compressed representation: the pilot encoding plus
    /// the fold-back redirects. Fixed-size header fields are excluded.
    pub fn space_bits(&self) -> u64 {
        self.pilots.size_bits() + self.free.size_bits()
    }

    pub fn bits_per_key(&self) -> f64 {
        if self.num_keys() == 0 {
            0.0
        } else {
            self.space_bits() as f64 / self.num_keys() as f64
        }
    }

    /// The pilot-table share of [`space_bits`](Self::space_bits).
    pub fn pilot_table_bits(&self) -> u64 {
        self.pilots.size_bits()
    }

    /// The redirect-array share of [`space_bits`](Self::space_bits). Grows
    /// as the load factor drops: a roomier table leaves more positions to
    /// fold back under `n`.
    pub fn free_array_bits(&self) -> u64 {
        self.free.size_bits()
    }

    pub(crate) fn free(&self) -> &EliasFano {
        &self.free
    }
}

#[cfg(test)]
mod tests {
    use crate::build::{build, BuildConfig};

    #[test]
    fn foreign_keys_still_land_in_range() {
        let keys = crate::util::generate_keys(200, 5);
        let f = build(&keys, &BuildConfig::default()).unwrap();
        for i in 0..1000u64 {
            let foreign = format!("not-a-member-{i}");
            assert!(f.lookup(foreign.as_bytes()) < 200);
        }
    }

    #[test]
    fn space_accounts_pilots_and_redirects() {
        let keys = crate::util::generate_keys(2000, 6);
        let f = build(&keys, &BuildConfig::default()).unwrap();
        assert_eq!(f.space_bits(), f.pilots.size_bits() + f.free.size_bits());
        assert!(f.bits_per_key() > 0.0);
        assert!(f.bits_per_key() < 16.0, "2000 keys should take well under 16 bits each");
    }

    #[test]
    fn empty_function_is_essentially_free() {
        let keys: Vec<&[u8]> = Vec::new();
        let f = build(&keys, &BuildConfig::default()).unwrap();
        // The empty redirect bitmap still stores its terminator bit.
        assert!(f.space_bits() <= 8, "got {} bits", f.space_bits());
        assert_eq!(f.bits_per_key(), 0.0);
        assert_eq!(f.lookup(b"x"), 0);
    }
}
