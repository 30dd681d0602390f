//! Word-packed bit storage: a plain bitmap and a fixed-width integer array.
//!
//! Readers use an unconditional two-word fetch, so every backing vector keeps
//! one zeroed slack word past the last addressable bit. The slack word is an
//! in-memory artifact only; serialization writes the exact word count.

/// Words needed to hold `bits` bits (without slack).
#[inline]
pub(crate) fn words_for(bits: u64) -> usize {
    bits.div_ceil(64) as usize
}

/// Low `width` bits of a `u64`; `width` must be in `1..=64`.
#[inline]
pub(crate) fn low_mask(width: u32) -> u64 {
    debug_assert!((1..=64).contains(&width));
    u64::MAX >> (64 - width)
}

/// Reads `width` bits (`1..=64`) starting at bit `pos`. Branchless: both the
/// containing word and its successor are fetched, so `words` must extend at
/// least one word past the bit range (the slack word).
#[inline]
pub(crate) fn read_bits(words: &[u64], pos: u64, width: u32) -> u64 {
    let word = (pos >> 6) as usize;
    let shift = (pos & 63) as u32;
    let lo = words[word] >> shift;
    // `(x << 1) << (63 - shift)` is `x << (64 - shift)` that degrades to 0 at
    // shift == 0 instead of hitting the shift-width limit.
    let hi = (words[word + 1] << 1) << (63 - shift);
    (lo | hi) & low_mask(width)
}

/// Writes the low `width` bits of `value` at bit `pos`. The destination bits
/// must still be zero (freshly allocated storage).
#[inline]
pub(crate) fn write_bits(words: &mut [u64], pos: u64, width: u32, value: u64) {
    debug_assert!((1..=64).contains(&width));
    debug_assert_eq!(value & !low_mask(width), 0, "value wider than field");
    let word = (pos >> 6) as usize;
    let shift = (pos & 63) as u32;
    words[word] |= value << shift;
    if shift + width > 64 {
        words[word + 1] |= value >> (64 - shift);
    }
}

/// Position of the `k`-th (0-based) set bit of `word`. Caller guarantees the
/// word has more than `k` ones.
#[inline]
pub(crate) fn select_in_word(mut word: u64, mut k: u32) -> u32 {
    loop {
        debug_assert!(word != 0);
        let tz = word.trailing_zeros();
        if k == 0 {
            return tz;
        }
        word &= word - 1;
        k -= 1;
    }
}

/// Plain bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVec {
    words: Vec<u64>,
    len: u64,
}

impl BitVec {
    pub fn new(len: u64) -> Self {
        Self { words: vec![0; words_for(len) + 1], len }
    }

    /// Rebuilds from serialized words (`words.len() == words_for(len)`);
    /// the slack word is re-appended here.
    pub(crate) fn from_words(mut words: Vec<u64>, len: u64) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        words.push(0);
        Self { words, len }
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        debug_assert!(i < self.len);
        self.words[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: u64) {
        debug_assert!(i < self.len);
        self.words[(i >> 6) as usize] |= 1 << (i & 63);
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Serialized payload: exactly `words_for(len)` words, no slack.
    pub(crate) fn payload_words(&self) -> &[u64] {
        &self.words[..words_for(self.len)]
    }

    /// All words including slack, for readers that over-fetch.
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Fixed-width packed integer array. `width == 0` is allowed (every element
/// reads back as zero and nothing is stored), which keeps dense Elias-Fano
/// low-bit planes free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactBitArray {
    words: Vec<u64>,
    width: u32,
    len: u64,
}

impl CompactBitArray {
    pub fn new(width: u32, len: u64) -> Self {
        assert!(width <= 64);
        let bits = if width == 0 { 0 } else { width as u64 * len };
        Self { words: vec![0; words_for(bits) + 1], width, len }
    }

    pub fn from_values(width: u32, values: impl ExactSizeIterator<Item = u64>) -> Self {
        let mut a = Self::new(width, values.len() as u64);
        for (i, v) in values.enumerate() {
            a.set(i as u64, v);
        }
        a
    }

    pub(crate) fn from_words(mut words: Vec<u64>, width: u32, len: u64) -> Self {
        let bits = if width == 0 { 0 } else { width as u64 * len };
        debug_assert_eq!(words.len(), words_for(bits));
        words.push(0);
        Self { words, width, len }
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn get(&self, i: u64) -> u64 {
        debug_assert!(i < self.len);
        if self.width == 0 {
            return 0;
        }
        read_bits(&self.words, i * self.width as u64, self.width)
    }

    pub fn set(&mut self, i: u64, value: u64) {
        debug_assert!(i < self.len);
        if self.width == 0 {
            debug_assert_eq!(value, 0);
            return;
        }
        write_bits(&mut self.words, i * self.width as u64, self.width, value);
    }

    pub(crate) fn payload_words(&self) -> &[u64] {
        let bits = if self.width == 0 { 0 } else { self.width as u64 * self.len };
        &self.words[..words_for(bits)]
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}
