//! Key sources for the commands: a newline-delimited file or a synthetic set.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use pthash::util::{generate_keys, split_key_lines};

use crate::CliError;

/// Keys for one run, owning whatever backing storage they need.
pub(crate) enum KeyBag {
    /// Raw bytes of a key file; keys are borrowed line slices.
    File { path: PathBuf, data: Vec<u8> },
    /// Synthetic 8-byte keys, distinct by construction.
    Synthetic(Vec<[u8; 8]>),
}

impl KeyBag {
    /// Reads `--input` or generates `--gen` keys. The argument parser
    /// guarantees exactly one of the two is present.
    pub(crate) fn load(
        input: Option<&Path>,
        gen: Option<usize>,
        seed: u64,
    ) -> Result<Self, CliError> {
        match (input, gen) {
            (Some(path), _) => {
                let data = fs::read(path)
                    .map_err(|e| CliError::io(format!("reading key file {}", path.display()), e))?;
                Ok(KeyBag::File { path: path.to_owned(), data })
            }
            (None, Some(n)) => Ok(KeyBag::Synthetic(generate_keys(n, seed))),
            (None, None) => unreachable!("the argument parser requires a key source"),
        }
    }

    pub(crate) fn keys(&self) -> Vec<&[u8]> {
        match self {
            KeyBag::File { data, .. } => split_key_lines(data),
            KeyBag::Synthetic(keys) => keys.iter().map(|k| k.as_slice()).collect(),
        }
    }

    /// Rejects repeated lines before construction starts, naming both line
    /// numbers. Without this pass a duplicate would still fail the build, but
    /// only as a retry-exhausted hash collision with no pointer back to the
    /// offending input.
    pub(crate) fn scan_duplicates(&self) -> Result<(), CliError> {
        let KeyBag::File { path, data } = self else {
            return Ok(());
        };
        let mut seen: HashMap<&[u8], usize> = HashMap::new();
        for (index, key) in split_key_lines(data).into_iter().enumerate() {
            let line = index + 1;
            if let Some(first) = seen.insert(key, line) {
                return Err(CliError::DuplicateKey { path: path.clone(), line, first });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_bag(data: &[u8]) -> KeyBag {
        KeyBag::File { path: PathBuf::from("keys.txt"), data: data.to_vec() }
    }

    #[test]
    fn file_bag_splits_lines() {
        let bag = file_bag(b"alpha\nbeta\n\ngamma");
        assert_eq!(bag.keys(), vec![b"alpha" as &[u8], b"beta", b"", b"gamma"]);
    }

    #[test]
    fn synthetic_bag_yields_n_distinct_keys() {
        let bag = KeyBag::load(None, Some(500), 9).unwrap();
        let keys = bag.keys();
        assert_eq!(keys.len(), 500);
        let set: std::collections::HashSet<&[u8]> = keys.iter().copied().collect();
        assert_eq!(set.len(), 500);
    }

    #[test]
    fn duplicate_scan_names_both_lines() {
        let bag = file_bag(b"a\nb\nc\nb\n");
        let err = bag.scan_duplicates().unwrap_err();
        match err {
            CliError::DuplicateKey { line, first, .. } => {
                assert_eq!((first, line), (2, 4));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn distinct_lines_pass_the_scan() {
        assert!(file_bag(b"a\nb\nc\n").scan_duplicates().is_ok());
        assert!(KeyBag::load(None, Some(100), 0).unwrap().scan_duplicates().is_ok());
    }
}
