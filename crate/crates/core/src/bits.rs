use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Fixed-length bit string packed into 64-bit words.
///
/// Ordering is lexicographic over bit positions, position 0 first, which is
/// the order used to sort medium-degree labels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitStringError {
    #[error("bit strings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid character {ch:?} at position {pos}; expected '0' or '1'")]
    InvalidChar { ch: char, pos: usize },
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Hamming distance; lengths must agree.
    pub fn hamming(&self, other: &BitString) -> Result<usize, BitStringError> {
        if self.len != other.len {
            return Err(BitStringError::LengthMismatch(self.len, other.len));
        }
        Ok(self.hamming_unchecked(other))
    }

    pub(crate) fn hamming_unchecked(&self, other: &BitString) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            if a != b {
                // lowest differing position decides; a 1 there sorts after a 0
                let low = (a ^ b).trailing_zeros();
                return if a >> low & 1 == 1 { Ordering::Greater } else { Ordering::Less };
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::zeros(s.chars().count());
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => out.set(pos, true),
                _ => return Err(BitStringError::InvalidChar { ch, pos }),
            }
        }
        Ok(out)
    }
}
