//! Key-file parser target: splitting arbitrary bytes must never panic, and
//! the result must tile the input exactly — every byte is either inside some
//! key or one of the newline separators, and no key contains a separator.

#![no_main]

use libfuzzer_sys::fuzz_target;
use pthash::util::split_key_lines;

fuzz_target!(|data: &[u8]| {
    let keys = split_key_lines(data);

    let newlines = data.iter().filter(|&&b| b == b'\n').count();
    let expected = if data.is_empty() {
        0
    } else if data.ends_with(b"\n") {
        newlines
    } else {
        newlines + 1
    };
    assert_eq!(keys.len(), expected);

    assert!(keys.iter().all(|key| !key.contains(&b'\n')));
    let key_bytes: usize = keys.iter().map(|key| key.len()).sum();
    assert_eq!(key_bytes + newlines, data.len(), "keys plus separators must tile the input");
});
