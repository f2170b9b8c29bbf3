//! Bit-packed binary codes and Hamming arithmetic.
//!
//! Bit `i` of a code lives in word `i / 64` at position `i % 64` (LSB-first).
//! Bits past `k` in the last word are always zero, so whole-word XOR and
//! popcount give exact distances.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PackedCode {
    k: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn bytes_for(bits: usize) -> usize {
    bits.div_ceil(8)
}

impl PackedCode {
    pub fn zeros(k: usize) -> Self {
        PackedCode {
            k,
            words: vec![0; words_for(k)],
        }
    }

    /// Packs a 0/1 vector. Any nonzero entry counts as a set bit.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut code = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                code.words[i / 64] |= 1 << (i % 64);
            }
        }
        code
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut code = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                code.words[i / 64] |= 1 << (i % 64);
            }
        }
        code
    }

    /// Builds a code from raw words, clearing any padding bits past `k`.
    pub fn from_words(k: usize, mut words: Vec<u64>) -> Result<Self> {
        if words.len() != words_for(k) {
            return Err(Error::DimensionMismatch {
                expected: words_for(k),
                got: words.len(),
            });
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(k);
        }
        Ok(PackedCode { k, words })
    }

    /// Unpacks `⌈k/8⌉` LSB-first bytes. Padding bits in the last byte must be zero.
    pub fn from_bytes(k: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != bytes_for(k) {
            return Err(Error::DimensionMismatch {
                expected: bytes_for(k),
                got: bytes.len(),
            });
        }
        let mut code = Self::zeros(k);
        for (i, &byte) in bytes.iter().enumerate() {
            code.words[i / 8] |= (byte as u64) << (8 * (i % 8));
        }
        if code.words.last().is_some_and(|&w| w & !tail_mask(k) != 0) {
            return Err(Error::InvalidDimension(format!(
                "nonzero padding bits past bit {k}"
            )));
        }
        Ok(code)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        (0..bytes_for(self.k))
            .map(|i| (self.words[i / 8] >> (8 * (i % 8))) as u8)
            .collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.k, "bit {i} out of range for k={}", self.k);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.k, "bit {i} out of range for k={}", self.k);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn unpack(&self) -> Vec<u8> {
        (0..self.k).map(|i| self.bit(i) as u8).collect()
    }

    /// Bitwise complement within the first `k` bits.
    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(self.k);
        }
        PackedCode { k: self.k, words }
    }

    /// Hamming distance; errors if the code lengths differ.
    pub fn distance(&self, other: &PackedCode) -> Result<u32> {
        if self.k != other.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: other.k,
            });
        }
        Ok(self.distance_unchecked(other))
    }

    /// Hamming distance for codes already known to share `k`.
    #[inline]
    pub fn distance_unchecked(&self, other: &PackedCode) -> u32 {
        debug_assert_eq!(self.k, other.k);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

fn tail_mask(k: usize) -> u64 {
    match k % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl fmt::Debug for PackedCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = (0..self.k)
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect();
        write!(f, "PackedCode({bits})")
    }
}

pub fn hamming_distance(a: &PackedCode, b: &PackedCode) -> Result<u32> {
    a.distance(b)
}

/// Thresholds a relaxed code at 0.5; ties go to 1.
pub fn binarize(h: &[f64]) -> Result<PackedCode> {
    let mut code = PackedCode::zeros(h.len());
    for (i, &v) in h.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("non-finite entry {v} at index {i}")));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Numeric(format!("entry {v} at index {i} outside [0, 1]")));
        }
        code.words[i / 64] |= ((v >= 0.5) as u64) << (i % 64);
    }
    Ok(code)
}
