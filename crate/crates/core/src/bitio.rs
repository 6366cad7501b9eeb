//! Exact-length bit vectors and cursors.
//!
//! Bits are packed MSB-first within each byte. The unused low bits of the
//! final byte are always zero, so two vectors with the same bits compare
//! equal byte-for-byte.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVector {
    bytes: Vec<u8>,
    len: usize,
}

impl BitVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitVector {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// `n` copies of `bit`.
    pub fn repeat(bit: bool, n: usize) -> Self {
        let mut v = Self::with_capacity(n);
        v.push_run(bit, n);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let offset = self.len % 8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.len += 1;
    }

    /// Appends `n` copies of `bit`, filling whole bytes at a time where possible.
    pub fn push_run(&mut self, bit: bool, mut n: usize) {
        while n > 0 && !self.len.is_multiple_of(8) {
            self.push(bit);
            n -= 1;
        }
        let whole = n / 8;
        self.bytes
            .extend(std::iter::repeat_n(if bit { 0xFF } else { 0x00 }, whole));
        self.len += whole * 8;
        for _ in 0..n % 8 {
            self.push(bit);
        }
    }

    /// Returns a copy of `self` with `bit` appended.
    pub fn with_bit(mut self, bit: bool) -> Self {
        self.push(bit);
        self
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.len).then(|| self.bytes[index / 8] & (0x80 >> (index % 8)) != 0)
    }

    /// Inverts bit `index`. Panics when out of range.
    pub fn flip(&mut self, index: usize) {
        assert!(index < self.len, "bit {index} out of range for length {}", self.len);
        self.bytes[index / 8] ^= 0x80 >> (index % 8);
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
        } else {
            for bit in other.iter() {
                self.push(bit);
            }
        }
    }

    pub fn concat(a: &BitVector, b: &BitVector) -> BitVector {
        let mut out = Self::with_capacity(a.len + b.len);
        out.extend_from(a);
        out.extend_from(b);
        out
    }

    pub fn reversed(&self) -> BitVector {
        let mut out = Self::with_capacity(self.len);
        for i in (0..self.len).rev() {
            out.push(self.get(i).unwrap());
        }
        out
    }

    pub fn is_palindrome(&self) -> bool {
        (0..self.len / 2).all(|i| self.get(i) == self.get(self.len - 1 - i))
    }

    /// True when `self` is a prefix of `other`.
    pub fn is_prefix_of(&self, other: &BitVector) -> bool {
        self.len <= other.len && (0..self.len).all(|i| self.get(i) == other.get(i))
    }

    /// True when `self` is a suffix of `other`.
    pub fn is_suffix_of(&self, other: &BitVector) -> bool {
        let shift = match other.len.checked_sub(self.len) {
            Some(s) => s,
            None => return false,
        };
        (0..self.len).all(|i| self.get(i) == other.get(i + shift))
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = bool> + ExactSizeIterator + '_ {
        (0..self.len).map(move |i| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Packed bytes, MSB-first, with a zero-padded final byte.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_bytes(&self) -> (Vec<u8>, usize) {
        (self.bytes.clone(), self.len)
    }

    /// Rebuilds a vector of `len` bits from packed bytes. Pad bits in the
    /// final byte are discarded.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<BitVector> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::MalformedInput(format!(
                "{len} bits need {} bytes, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut bytes = bytes.to_vec();
        if !len.is_multiple_of(8) {
            *bytes.last_mut().unwrap() &= 0xFFu8 << (8 - len % 8);
        }
        Ok(BitVector { bytes, len })
    }

    /// Every bit of every byte, for byte-granular inputs.
    pub fn from_byte_slice(bytes: &[u8]) -> BitVector {
        BitVector {
            bytes: bytes.to_vec(),
            len: bytes.len() * 8,
        }
    }

    pub fn cursor(&self) -> BitCursor<'_> {
        BitCursor {
            target: self,
            position: 0,
        }
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut v = BitVector::new();
        for bit in iter {
            v.push(bit);
        }
        v
    }
}

impl FromStr for BitVector {
    type Err = Error;

    /// Parses a string of `0` and `1` characters.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::MalformedInput(format!("not a bit: {other:?}"))),
            })
            .collect()
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({}; \"{self}\")", self.len)
    }
}

/// Forward reader over a [`BitVector`]. Reading past the end is an error.
#[derive(Debug, Clone)]
pub struct BitCursor<'a> {
    target: &'a BitVector,
    position: usize,
}

impl BitCursor<'_> {
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn remaining(&self) -> usize {
        self.target.len - self.position
    }

    pub fn is_at_end(&self) -> bool {
        self.position == self.target.len
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let bit = self.target.get(self.position).ok_or_else(|| {
            Error::MalformedInput(format!("read past end of {} bits", self.target.len))
        })?;
        self.position += 1;
        Ok(bit)
    }

    pub fn seek(&mut self, position: usize) -> Result<()> {
        if position > self.target.len {
            return Err(Error::MalformedInput(format!(
                "seek to {position} past end of {} bits",
                self.target.len
            )));
        }
        self.position = position;
        Ok(())
    }
}
