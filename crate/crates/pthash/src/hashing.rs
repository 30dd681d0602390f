//! Key digests, the pilot mixer, and the skewed bucket mapper.
//!
//! Every key is digested exactly once per build or lookup into 128 bits; the
//! two 64-bit halves serve as the bucket hash (which bucket the key joins)
//! and the position hash (where its pilot displaces it). Pilots pass through
//! a separate 64-bit mixer so that consecutive candidate pilots produce
//! unrelated position sets.
//!
//! Serialized functions record `HASH_VERSION`; changing any function in this
//! module in an observable way requires bumping it, because evaluation is
//! only correct with bit-identical hashing.

use crate::util::mix64;

/// Bumped whenever the digest, pilot mixer, or partition mix changes.
pub const HASH_VERSION: u8 = 1;

/// Both halves of a key's 128-bit digest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyHash {
    /// First digest half; selects the bucket.
    pub bucket_hash: u64,
    /// Second digest half; xor-combined with the mixed pilot to pick a slot.
    pub position_hash: u64,
}

/// Seeded 128-bit key digest. Implementations must be pure functions of
/// `(key, seed)`.
pub trait KeyHasher: Sync {
    fn hash_key(&self, key: &[u8], seed: u64) -> KeyHash;
}

/// Production digest: MurmurHash3 x64-128 with the seed widened to 64 bits.
#[derive(Debug, Clone, Copy, Default)]
pub struct Murmur3;

impl KeyHasher for Murmur3 {
    #[inline]
    fn hash_key(&self, key: &[u8], seed: u64) -> KeyHash {
        let (h1, h2) = murmur3_x64_128(key, seed);
        KeyHash { bucket_hash: h1, position_hash: h2 }
    }
}

#[inline]
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

/// MurmurHash3 x64-128 (Austin Appleby's public-domain algorithm). The
/// canonical function takes a 32-bit seed; this port initializes both state
/// words from a 64-bit seed instead, which is the digest this library's
/// `HASH_VERSION` pins down.
pub fn murmur3_x64_128(data: &[u8], seed: u64) -> (u64, u64) {
    const C1: u64 = 0x87c3_7b91_1142_53d5;
    const C2: u64 = 0x4cf5_ad43_2745_937f;

    let mut h1 = seed;
    let mut h2 = seed;

    let mut blocks = data.chunks_exact(16);
    for block in &mut blocks {
        let mut k1 = u64::from_le_bytes(block[..8].try_into().unwrap());
        let mut k2 = u64::from_le_bytes(block[8..].try_into().unwrap());

        k1 = k1.wrapping_mul(C1).rotate_left(31).wrapping_mul(C2);
        h1 ^= k1;
        h1 = h1.rotate_left(27).wrapping_add(h2).wrapping_mul(5).wrapping_add(0x52dc_e729);

        k2 = k2.wrapping_mul(C2).rotate_left(33).wrapping_mul(C1);
        h2 ^= k2;
        h2 = h2.rotate_left(31).wrapping_add(h1).wrapping_mul(5).wrapping_add(0x3849_5ab5);
    }

    let tail = blocks.remainder();
    if tail.len() > 8 {
        let mut buf = [0u8; 8];
        buf[..tail.len() - 8].copy_from_slice(&tail[8..]);
        let k2 = u64::from_le_bytes(buf).wrapping_mul(C2).rotate_left(33).wrapping_mul(C1);
        h2 ^= k2;
    }
    if !tail.is_empty() {
        let mut buf = [0u8; 8];
        let head = tail.len().min(8);
        buf[..head].copy_from_slice(&tail[..head]);
        let k1 = u64::from_le_bytes(buf).wrapping_mul(C1).rotate_left(31).wrapping_mul(C2);
        h1 ^= k1;
    }

    h1 ^= data.len() as u64;
    h2 ^= data.len() as u64;
    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);
    h1 = fmix64(h1);
    h2 = fmix64(h2);
    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);
    (h1, h2)
}

/// Folds a key digest into the value that selects its partition. Combines
/// both halves (with one rotated so equal halves don't cancel) and remixes,
/// keeping partition choice decorrelated from the bucket and position
/// choices made inside the partition.
#[inline]
pub fn partition_hash(hash: KeyHash) -> u64 {
    mix64(hash.bucket_hash ^ hash.position_hash.rotate_left(32))
}

/// 64-bit mixer applied to pilot candidates before they touch position
/// hashes. Must be injective so candidate pilots never alias.
pub trait PilotHasher: Sync {
    fn hash_pilot(&self, pilot: u64) -> u64;
}

/// Production mixer: the splitmix64 finalizer. Bijective, and maps 0 to a
/// nonzero value so that pilot 0 still perturbs positions.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mix64;

impl PilotHasher for Mix64 {
    #[inline]
    fn hash_pilot(&self, pilot: u64) -> u64 {
        mix64(pilot)
    }
}

/// Test-mode mixer: the identity, so search fixtures can be verified by hand.
/// Never used by production builds or stored functions.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPilot;

impl PilotHasher for IdentityPilot {
    #[inline]
    fn hash_pilot(&self, pilot: u64) -> u64 {
        pilot
    }
}

/// Maps bucket hashes to bucket ids with a deliberate 60/30 skew: about 60%
/// of keys land in the first ~30% of buckets, so the early (large) buckets
/// are searched while the table is still mostly empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketMapper {
    n: u64,
    m: u64,
    /// Keys whose `bucket_hash % n` falls below `p1` (= ceil(0.6 n)) are dense.
    p1: u64,
    /// Dense keys spread over buckets `[0, p2)` with `p2` ~ 0.3 m.
    p2: u64,
}

impl BucketMapper {
    /// Mapper over `m` buckets for `n` keys. `m == 0` and `m == 1` are the
    /// degenerate empty/single-bucket layouts.
    pub fn new(n: u64, m: u64) -> Self {
        let p1 = (3 * n).div_ceil(5);
        let p2 = if m <= 1 { 0 } else { (3 * m / 10).clamp(1, m - 1) };
        Self { n, m, p1, p2 }
    }

    /// Mapper with the bucket count `m = ceil(c * n / log2(n))` that the
    /// tuning parameter `c` prescribes.
    pub fn with_param_c(n: u64, c: f64) -> Self {
        Self::new(n, bucket_count(n, c))
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn p1(&self) -> u64 {
        self.p1
    }

    pub fn p2(&self) -> u64 {
        self.p2
    }

    /// Bucket id in `[0, m)` for a bucket hash.
    #[inline]
    pub fn bucket_of(&self, bucket_hash: u64) -> u64 {
        if self.m <= 1 {
            return 0;
        }
        if bucket_hash % self.n < self.p1 {
            bucket_hash % self.p2
        } else {
            self.p2 + bucket_hash % (self.m - self.p2)
        }
    }
}

/// `ceil(c * n / log2(n))` buckets; 1 for a single key, 0 for none.
pub fn bucket_count(n: u64, c: f64) -> u64 {
    match n {
        0 => 0,
        1 => 1,
        _ => (c * n as f64 / (n as f64).log2()).ceil() as u64,
    }
}
