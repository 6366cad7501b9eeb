//! Parsing a bit stream into run tokens `1^(k-1) 0`.
//!
//! Any bit stream is a concatenation of tokens from the prefix-free family
//! `{0, 10, 110, 1110, ...}` followed by a (possibly empty) run of trailing
//! ones that no zero terminates. The parse is greedy and total, and
//! [`detokenize`] inverts it exactly.

use std::fmt;

use crate::bitio::BitVector;
use crate::error::{Error, Result};

/// A token of the run family, identified by its length `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenClass(u64);

impl TokenClass {
    pub fn new(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("token class must be at least 1".into()));
        }
        Ok(TokenClass(k))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Canonical bit pattern: `k-1` ones then a zero.
    pub fn bits(self) -> BitVector {
        let mut v = BitVector::with_capacity(self.0 as usize);
        v.push_run(true, self.0 as usize - 1);
        v.push(false);
        v
    }
}

impl fmt::Display for TokenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}", self.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<TokenClass>,
    /// Trailing ones with no terminating zero.
    pub residue: u64,
}

impl TokenStream {
    pub fn new(tokens: Vec<TokenClass>, residue: u64) -> Self {
        TokenStream { tokens, residue }
    }

    /// Number of source bits this stream stands for.
    pub fn bit_len(&self) -> u64 {
        self.tokens.iter().map(|t| t.get()).sum::<u64>() + self.residue
    }
}

pub fn tokenize(v: &BitVector) -> TokenStream {
    let mut tokens = Vec::new();
    let mut ones = 0u64;
    for bit in v.iter() {
        if bit {
            ones += 1;
        } else {
            tokens.push(TokenClass(ones + 1));
            ones = 0;
        }
    }
    TokenStream {
        tokens,
        residue: ones,
    }
}

pub fn detokenize(s: &TokenStream) -> BitVector {
    let mut v = BitVector::with_capacity(s.bit_len() as usize);
    for t in &s.tokens {
        v.push_run(true, t.get() as usize - 1);
        v.push(false);
    }
    v.push_run(true, s.residue as usize);
    v
}
