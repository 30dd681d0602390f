//! Deserializer target: arbitrary bytes through both wire decoders. Hostile
//! input must be rejected with an error — never a panic, hang, or oversized
//! allocation — and anything that does decode must behave like a function:
//! in-range lookups and a canonical re-encoding equal to the input.

#![no_main]

use libfuzzer_sys::fuzz_target;
use pthash::{Mphf, PartitionedMphf};

const PROBE_KEYS: [&[u8]; 4] = [b"", b"a", b"fuzz-key", b"\x00\x01\x02\x03\x04\x05\x06\x07"];

fn check_lookups(n: u64, lookup: impl Fn(&[u8]) -> u64) {
    for key in PROBE_KEYS {
        let value = lookup(key);
        if n == 0 {
            assert_eq!(value, 0);
        } else {
            assert!(value < n, "lookup escaped [0, {n})");
        }
    }
}

fuzz_target!(|data: &[u8]| {
    // At most one of the two can accept (the layout tags differ).
    if let Ok(f) = Mphf::from_bytes(data) {
        check_lookups(f.num_keys(), |k| f.lookup(k));
        let _ = f.space_bits();
        assert_eq!(f.to_bytes(), data, "valid flat files are canonical");
    }
    if let Ok(f) = PartitionedMphf::from_bytes(data) {
        check_lookups(f.num_keys(), |k| f.lookup(k));
        let _ = f.space_bits();
        assert_eq!(f.to_bytes(), data, "valid partitioned files are canonical");
    }
});
