//! Alphabets, words, and the vocabulary shared by every acceptor kind.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("empty word")]
    Empty,
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("symbol index {0} is outside the alphabet")]
    SymbolOutOfRange(usize),
    #[error("duplicate alphabet symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("empty alphabet")]
    EmptyAlphabet,
}

/// A word is a sequence of symbol indices into some [`Alphabet`].
pub type Word = Vec<usize>;

/// Ordered, duplicate-free list of symbols. Declaration order is the order
/// used for lexicographic word enumeration.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self, WordError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(WordError::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (k, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), k).is_some() {
                return Err(WordError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, k: usize) -> &str {
        &self.symbols[k]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn lookup(&self, symbol: &str) -> Result<usize, WordError> {
        self.index_of(symbol)
            .ok_or_else(|| WordError::UnknownSymbol(symbol.to_string()))
    }

    /// Converts symbol names to a word.
    pub fn word<S: AsRef<str>>(&self, symbols: &[S]) -> Result<Word, WordError> {
        symbols.iter().map(|s| self.lookup(s.as_ref())).collect()
    }

    /// Parses a word from text. Whitespace-separated text is split on
    /// whitespace; otherwise the text is tokenized by longest match
    /// against the alphabet.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        let text = text.trim();
        if text.split_whitespace().nth(1).is_some() {
            return text.split_whitespace().map(|s| self.lookup(s)).collect();
        }
        let mut word = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let best = self
                .symbols
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.is_empty() && rest.starts_with(s.as_str()))
                .max_by_key(|(_, s)| s.len());
            match best {
                Some((k, s)) => {
                    word.push(k);
                    rest = &rest[s.len()..];
                }
                None => {
                    let bad: String = rest.chars().take(1).collect();
                    return Err(WordError::UnknownSymbol(bad));
                }
            }
        }
        Ok(word)
    }

    /// Renders a word: concatenated when that reads back unambiguously
    /// through [`Alphabet::parse_word`], space-separated otherwise.
    pub fn render(&self, word: &[usize]) -> String {
        let compact: String = word.iter().map(|&k| self.symbols[k].as_str()).collect();
        if self.parse_word(&compact).is_ok_and(|w| w == word) {
            compact
        } else {
            let parts: Vec<&str> = word.iter().map(|&k| self.symbols[k].as_str()).collect();
            parts.join(" ")
        }
    }

    /// Checks that `word` is nonempty and every index is in range.
    pub fn check(&self, word: &[usize]) -> Result<(), WordError> {
        if word.is_empty() {
            return Err(WordError::Empty);
        }
        match word.iter().find(|&&k| k >= self.len()) {
            Some(&k) => Err(WordError::SymbolOutOfRange(k)),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.symbols).finish()
    }
}

impl Serialize for Alphabet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.symbols.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let symbols = Vec::<String>::deserialize(deserializer)?;
        Alphabet::new(symbols).map_err(serde::de::Error::custom)
    }
}

/// Which word position decides acceptance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputPosition {
    First,
    Last,
}

impl OutputPosition {
    /// 0-based index of the output position in a word of length `n >= 1`.
    pub fn index(self, n: usize) -> usize {
        match self {
            OutputPosition::First => 0,
            OutputPosition::Last => n - 1,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "first" => Some(OutputPosition::First),
            "last" => Some(OutputPosition::Last),
            _ => None,
        }
    }
}

impl fmt::Display for OutputPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputPosition::First => "first",
            OutputPosition::Last => "last",
        })
    }
}

/// Attention mask. Positions are compared as `(query i, key j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mask {
    /// every position is visible
    #[serde(rename = "none")]
    None,
    /// `j < i`
    #[serde(rename = "future")]
    Future,
    /// `j > i`
    #[serde(rename = "past")]
    Past,
}

impl Mask {
    pub const ALL: [Mask; 3] = [Mask::None, Mask::Future, Mask::Past];

    pub fn allows(self, i: usize, j: usize) -> bool {
        match self {
            Mask::None => true,
            Mask::Future => j < i,
            Mask::Past => j > i,
        }
    }
}

/// Enumerates all words over an alphabet of `k` symbols with length in
/// `1..=max_len`, shortest first and lexicographically (by symbol index)
/// within one length.
#[derive(Clone, Debug)]
pub struct Words {
    k: usize,
    max_len: usize,
    current: Option<Word>,
}

impl Words {
    pub fn new(k: usize, max_len: usize) -> Self {
        let current = (k > 0 && max_len > 0).then(|| vec![0]);
        Words { k, max_len, current }
    }

    /// Words of exactly length `len` that start with `prefix`, in
    /// lexicographic order.
    pub fn with_prefix(k: usize, prefix: &[usize], len: usize) -> impl Iterator<Item = Word> {
        let free = len.saturating_sub(prefix.len());
        let prefix = prefix.to_vec();
        let total = if len < prefix.len() { 0 } else { k.pow(free as u32) };
        (0..total).map(move |mut code| {
            let mut word = prefix.clone();
            let mut tail = vec![0; free];
            for slot in tail.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            word.extend(tail);
            word
        })
    }
}

impl Iterator for Words {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut pos = next.len();
        loop {
            if pos == 0 {
                // all symbols wrapped: move to the next length
                if next.len() >= self.max_len {
                    self.current = None;
                } else {
                    self.current = Some(vec![0; next.len() + 1]);
                }
                break;
            }
            pos -= 1;
            next[pos] += 1;
            if next[pos] < self.k {
                self.current = Some(next);
                break;
            }
            next[pos] = 0;
        }
        Some(out)
    }
}

/// The `index`-th word (0-based) of the enumeration order used by [`Words`].
pub fn nth_word(k: usize, mut index: u128) -> Word {
    let k128 = k as u128;
    let mut len = 1u32;
    loop {
        let count = k128.pow(len);
        if index < count {
            break;
        }
        index -= count;
        len += 1;
    }
    let mut word = vec![0; len as usize];
    for slot in word.iter_mut().rev() {
        *slot = (index % k128) as usize;
        index /= k128;
    }
    word
}

/// Number of words of length `1..=max_len` over `k` symbols.
pub fn count_words(k: usize, max_len: usize) -> u128 {
    (1..=max_len as u32).map(|l| (k as u128).pow(l)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_order() {
        let words: Vec<Word> = Words::new(2, 2).collect();
        assert_eq!(
            words,
            vec![vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(Words::new(2, 5).count(), 62);
        assert_eq!(count_words(2, 5), 62);
        assert_eq!(count_words(6, 6), 55986);
    }

    #[test]
    fn nth_word_matches_iterator() {
        for (k, w) in Words::new(3, 4).enumerate() {
            assert_eq!(nth_word(3, k as u128), w);
        }
    }

    #[test]
    fn prefix_enumeration() {
        let ws: Vec<Word> = Words::with_prefix(2, &[1], 3).collect();
        assert_eq!(ws, vec![vec![1, 0, 0], vec![1, 0, 1], vec![1, 1, 0], vec![1, 1, 1]]);
        assert_eq!(Words::with_prefix(2, &[1, 1], 1).count(), 0);
    }

    #[test]
    fn parse_and_render_words() {
        let sigma = Alphabet::new(["0", "1", "#", "t1", "t2"]).unwrap();
        let w = sigma.parse_word("0t1#1t2#").unwrap();
        assert_eq!(w, vec![0, 3, 2, 1, 4, 2]);
        assert_eq!(sigma.render(&w), "0t1#1t2#");
        let tricky = Alphabet::new(["a", "aa"]).unwrap();
        assert_eq!(tricky.render(&[0, 0]), "a a");
        assert_eq!(sigma.parse_word("0 t1 # 1 t2 #").unwrap(), w);
        assert!(sigma.parse_word("0x").is_err());

        let ab = Alphabet::new(["a", "b"]).unwrap();
        assert_eq!(ab.render(&ab.parse_word("abba").unwrap()), "abba");
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert_eq!(
            Alphabet::new(["a", "a"]),
            Err(WordError::DuplicateSymbol("a".into()))
        );
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn masks() {
        assert!(Mask::Future.allows(3, 1));
        assert!(!Mask::Future.allows(1, 1));
        assert!(Mask::Past.allows(0, 2));
        assert!(Mask::None.allows(2, 2));
    }
}
