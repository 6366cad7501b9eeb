//! Token frequency statistics.
//!
//! Integer counts are the source of truth; probabilities `P_k = n_k / n`
//! are derived on demand.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tokenizer::{TokenClass, TokenStream};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: BTreeMap<TokenClass, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from `(class, count)` pairs. Zero counts are dropped;
    /// repeated classes accumulate.
    pub fn from_counts<I: IntoIterator<Item = (TokenClass, u64)>>(pairs: I) -> Self {
        let mut table = Self::new();
        for (class, n) in pairs {
            table.add(class, n);
        }
        table
    }

    pub fn add(&mut self, class: TokenClass, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(class).or_insert(0) += n;
        self.total += n;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of distinct classes present.
    pub fn alphabet_len(&self) -> usize {
        self.counts.len()
    }

    pub fn count_of(&self, class: TokenClass) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    /// `(class, count)` in ascending class order.
    pub fn iter(&self) -> impl Iterator<Item = (TokenClass, u64)> + '_ {
        self.counts.iter().map(|(&k, &n)| (k, n))
    }

    pub fn probability(&self, class: TokenClass) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count_of(class) as f64 / self.total as f64
    }

    /// Classes by descending count, ties broken by smaller class first.
    pub fn ranked(&self) -> Vec<(TokenClass, u64)> {
        let mut ranked: Vec<_> = self.iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }

    /// Base-2 Shannon entropy in bits per token.
    pub fn entropy_bits_per_token(&self) -> Result<f64> {
        if self.total == 0 {
            return Err(Error::UndefinedStatistic);
        }
        let n = self.total as f64;
        Ok(self
            .counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum::<f64>()
            .max(0.0))
    }

    /// Bits needed to write every token as its own pattern: `sum n_k * k`.
    pub fn identity_payload_bits(&self) -> u128 {
        self.iter().map(|(k, n)| k.get() as u128 * n as u128).sum()
    }
}

pub fn count(s: &TokenStream) -> FrequencyTable {
    let mut table = FrequencyTable::new();
    for &t in &s.tokens {
        table.add(t, 1);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: u64) -> TokenClass {
        TokenClass::new(n).unwrap()
    }

    fn table(pairs: &[(u64, u64)]) -> FrequencyTable {
        FrequencyTable::from_counts(pairs.iter().map(|&(c, n)| (k(c), n)))
    }

    #[test]
    fn count_examples() {
        let s = TokenStream::new(vec![k(2), k(4), k(1)], 0);
        assert_eq!(count(&s), table(&[(1, 1), (2, 1), (4, 1)]));
        assert_eq!(count(&s).total(), 3);
        assert_eq!(count(&TokenStream::default()), FrequencyTable::new());

        let mut tokens = Vec::new();
        tokens.extend(std::iter::repeat_n(k(2), 25));
        tokens.extend(std::iter::repeat_n(k(1), 20));
        tokens.extend(std::iter::repeat_n(k(3), 3));
        tokens.push(k(4));
        let t = count(&TokenStream::new(tokens, 7));
        assert_eq!(t, table(&[(2, 25), (1, 20), (3, 3), (4, 1)]));
        assert_eq!(t.total(), 49);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(table(&[(1, 1)]).entropy_bits_per_token().unwrap(), 0.0);
        assert!((table(&[(1, 1), (2, 1)]).entropy_bits_per_token().unwrap() - 1.0).abs() < 1e-12);
        // Direct evaluation of -sum p log2 p over 25/49, 20/49, 3/49, 1/49.
        let h = table(&[(2, 25), (1, 20), (3, 3), (4, 1)]).entropy_bits_per_token().unwrap();
        assert!((h - 1.384_304_657_5).abs() < 1e-3, "{h}");
        assert!(matches!(
            FrequencyTable::new().entropy_bits_per_token(),
            Err(Error::UndefinedStatistic)
        ));
    }

    #[test]
    fn identity_bits_examples() {
        assert_eq!(table(&[(2, 25), (1, 20), (3, 3), (4, 1)]).identity_payload_bits(), 83);
        assert_eq!(FrequencyTable::new().identity_payload_bits(), 0);
        assert_eq!(table(&[(1, 7)]).identity_payload_bits(), 7);
    }

    #[test]
    fn zero_counts_are_not_stored() {
        let t = table(&[(1, 0), (2, 3)]);
        assert_eq!(t.alphabet_len(), 1);
        assert_eq!(t.total(), 3);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let t = table(&[(1, 13), (2, 7), (5, 1), (9, 40)]);
        let sum: f64 = t.iter().map(|(c, _)| t.probability(c)).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ranked_breaks_ties_by_smaller_class() {
        let t = table(&[(3, 5), (1, 5), (2, 5), (4, 9)]);
        let order: Vec<u64> = t.ranked().iter().map(|(c, _)| c.get()).collect();
        assert_eq!(order, vec![4, 1, 2, 3]);
    }
}
