//! Deterministic helpers shared by the builders, the CLI and the test suites.

use crate::hashing::{KeyHash, KeyHasher};

pub(crate) const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer: add the golden gamma, then two multiply-xor-shift
/// rounds. Bijective on `u64`, and `mix64(0) != 0`.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The classic splitmix64 stream. Outputs are pairwise distinct for up to
/// 2^64 draws because the internal counter never revisits a state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// `n` distinct synthetic keys, each the little-endian bytes of one
/// splitmix64 draw. Distinctness is structural (the generator is a bijection
/// of a strictly increasing counter), so no rejection step is needed.
pub fn generate_keys(n: usize, seed: u64) -> Vec<[u8; 8]> {
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| rng.next_u64().to_le_bytes()).collect()
}

/// Splits a newline-delimited key file into keys. Keys are the raw line bytes
/// without the terminator; a trailing newline is optional and does not
/// produce an empty final key. Interior empty lines are legitimate (empty)
/// keys — duplicates among them surface later as a duplicate-hash failure.
pub fn split_key_lines(data: &[u8]) -> Vec<&[u8]> {
    if data.is_empty() {
        return Vec::new();
    }
    let mut keys: Vec<&[u8]> = data.split(|&b| b == b'\n').collect();
    if data.ends_with(b"\n") {
        keys.pop();
    }
    keys
}

/// Fixture hasher for hand-checkable pipeline tests: `bucket_hash` is read
/// from the key's first eight bytes (little-endian, zero-padded) and
/// `position_hash` from the next eight. The seed is ignored, which is exactly
/// what makes fixtures reproducible by hand.
#[derive(Debug, Clone, Copy, Default)]
pub struct SplitPairHasher;

impl KeyHasher for SplitPairHasher {
    fn hash_key(&self, key: &[u8], _seed: u64) -> KeyHash {
        let mut lo = [0u8; 8];
        let mut hi = [0u8; 8];
        let head = key.len().min(8);
        lo[..head].copy_from_slice(&key[..head]);
        if key.len() > 8 {
            let tail = (key.len() - 8).min(8);
            hi[..tail].copy_from_slice(&key[8..8 + tail]);
        }
        KeyHash {
            bucket_hash: u64::from_le_bytes(lo),
            position_hash: u64::from_le_bytes(hi),
        }
    }
}
