//! Codebooks over token classes and the encoders/decoders that use them.
//!
//! Four book kinds are supported:
//!
//! * **Huffman**: optimal prefix code, emitted in canonical form from the
//!   length profile of the merge tree.
//! * **Shannon**: codeword `i` is the first `ceil(-log2 p_i)` bits of the
//!   cumulative probability of the classes ranked before it, computed with
//!   exact integer fractions.
//! * **Symmetric**: the class of rank `r` receives the `r`-th palindrome of
//!   `{0, 11, 101, 1001, ...}`. These books are prefix- and suffix-free, so
//!   payloads decode from either end.
//! * **Identity**: every class keeps its own `1^(k-1) 0` pattern.
//!
//! Decoding walks a binary trie built from the codewords, so its cost is
//! linear in the payload length.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::fmt;

use crate::bitio::BitVector;
use crate::error::{Error, Result};
use crate::model::FrequencyTable;
use crate::tokenizer::{TokenClass, TokenStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeKind {
    Huffman,
    Shannon,
    Symmetric,
    Identity,
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeKind::Huffman => "huffman",
            CodeKind::Shannon => "shannon",
            CodeKind::Symmetric => "symmetric",
            CodeKind::Identity => "identity",
        })
    }
}

const ROOT: u32 = 0;
const NONE: u32 = u32::MAX;

/// Binary trie over codewords. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Trie {
    children: Vec<[u32; 2]>,
    symbols: Vec<Option<TokenClass>>,
}

impl Trie {
    fn new() -> Self {
        Trie {
            children: vec![[NONE; 2]],
            symbols: vec![None],
        }
    }

    /// Inserts a codeword; returns false when it collides with an existing
    /// codeword as a prefix or an extension.
    fn insert(&mut self, bits: impl Iterator<Item = bool>, class: TokenClass) -> bool {
        let mut node = ROOT;
        let mut clean = true;
        for bit in bits {
            if self.symbols[node as usize].is_some() {
                clean = false;
            }
            let slot = &mut self.children[node as usize][bit as usize];
            if *slot == NONE {
                *slot = self.symbols.len() as u32;
                self.children.push([NONE; 2]);
                self.symbols.push(None);
            }
            node = self.children[node as usize][bit as usize];
        }
        if self.symbols[node as usize].is_some() || self.children[node as usize] != [NONE; 2] {
            clean = false;
        }
        self.symbols[node as usize] = Some(class);
        clean
    }

    pub(crate) fn root(&self) -> u32 {
        ROOT
    }

    pub(crate) fn step(&self, node: u32, bit: bool) -> Option<u32> {
        match self.children[node as usize][bit as usize] {
            NONE => None,
            next => Some(next),
        }
    }

    pub(crate) fn symbol(&self, node: u32) -> Option<TokenClass> {
        self.symbols[node as usize]
    }
}

#[derive(Debug, Clone)]
pub struct CodeBook {
    kind: CodeKind,
    entries: BTreeMap<TokenClass, BitVector>,
    prefix_free: bool,
    suffix_free: bool,
    forward: Trie,
    backward: Trie,
}

impl PartialEq for CodeBook {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.entries == other.entries
    }
}

impl Eq for CodeBook {}

impl CodeBook {
    /// Wraps an explicit class-to-codeword map, checking injectivity and
    /// computing the prefix-free and suffix-free flags.
    pub fn new(kind: CodeKind, entries: BTreeMap<TokenClass, BitVector>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for (class, code) in &entries {
            if code.is_empty() {
                return Err(Error::Domain(format!("empty codeword for {class}")));
            }
            if !seen.insert(code) {
                return Err(Error::Domain(format!("codeword {code} assigned twice")));
            }
        }
        let mut forward = Trie::new();
        let mut backward = Trie::new();
        let mut prefix_free = true;
        let mut suffix_free = true;
        for (&class, code) in &entries {
            prefix_free &= forward.insert(code.iter(), class);
            suffix_free &= backward.insert(code.iter().rev(), class);
        }
        Ok(CodeBook {
            kind,
            entries,
            prefix_free,
            suffix_free,
            forward,
            backward,
        })
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn is_prefix_free(&self) -> bool {
        self.prefix_free
    }

    pub fn is_suffix_free(&self) -> bool {
        self.suffix_free
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, class: TokenClass) -> Option<&BitVector> {
        self.entries.get(&class)
    }

    /// Entries in ascending class order.
    pub fn iter(&self) -> impl Iterator<Item = (TokenClass, &BitVector)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    /// `(class, codeword length)` in ascending class order.
    pub fn lengths(&self) -> Vec<(TokenClass, u64)> {
        self.iter().map(|(k, c)| (k, c.len() as u64)).collect()
    }

    pub fn kraft_sum(&self) -> f64 {
        self.entries
            .values()
            .map(|c| 2f64.powi(-(c.len().min(i32::MAX as usize) as i32)))
            .sum()
    }

    /// Payload size in bits for a stream with frequencies `t`.
    pub fn payload_bits(&self, t: &FrequencyTable) -> Result<u128> {
        t.iter()
            .map(|(k, n)| {
                self.get(k)
                    .map(|c| c.len() as u128 * n as u128)
                    .ok_or(Error::IncompleteCodebook(k))
            })
            .sum()
    }

    /// Concatenates the codewords of `tokens` in order.
    pub fn encode(&self, tokens: &[TokenClass]) -> Result<BitVector> {
        let mut out = BitVector::new();
        for &t in tokens {
            let code = self.get(t).ok_or(Error::IncompleteCodebook(t))?;
            out.extend_from(code);
        }
        Ok(out)
    }

    /// Greedy left-to-right decode. The payload must be consumed exactly.
    pub fn decode(&self, payload: &BitVector) -> Result<Vec<TokenClass>> {
        if !self.prefix_free {
            return Err(Error::NotDecodable("prefix"));
        }
        walk(&self.forward, payload.iter(), |i| i)
    }

    /// Greedy right-to-left decode by suffix matching. Tokens are returned in
    /// the order they are recovered, last token first.
    pub fn decode_reverse(&self, payload: &BitVector) -> Result<Vec<TokenClass>> {
        if !self.suffix_free {
            return Err(Error::NotDecodable("suffix"));
        }
        let n = payload.len();
        walk(&self.backward, payload.iter().rev(), |i| n - i)
    }

    pub(crate) fn forward_trie(&self) -> &Trie {
        &self.forward
    }

    pub(crate) fn backward_trie(&self) -> &Trie {
        &self.backward
    }
}

/// Trie walk shared by both decode directions. `position` maps the count of
/// consumed bits to a payload offset for error reporting.
fn walk(
    trie: &Trie,
    bits: impl Iterator<Item = bool>,
    position: impl Fn(usize) -> usize,
) -> Result<Vec<TokenClass>> {
    let mut out = Vec::new();
    let mut node = trie.root();
    let mut start = 0;
    for (i, bit) in bits.enumerate() {
        node = trie
            .step(node, bit)
            .ok_or_else(|| Error::InvalidPayload(position(start)))?;
        if let Some(class) = trie.symbol(node) {
            out.push(class);
            node = trie.root();
            start = i + 1;
        }
    }
    if node != trie.root() {
        return Err(Error::TruncatedPayload(position(start)));
    }
    Ok(out)
}

/// Encodes a whole token stream; the residue is not part of the payload.
pub fn encode(s: &TokenStream, book: &CodeBook) -> Result<BitVector> {
    book.encode(&s.tokens)
}

pub fn decode(payload: &BitVector, book: &CodeBook) -> Result<Vec<TokenClass>> {
    book.decode(payload)
}

pub fn decode_reverse(payload: &BitVector, book: &CodeBook) -> Result<Vec<TokenClass>> {
    book.decode_reverse(payload)
}

pub fn kraft_sum(book: &CodeBook) -> f64 {
    book.kraft_sum()
}

// Merge-queue ordering: lowest weight first. On equal weight, merged nodes go
// before leaves (newest merge first) and leaves go largest class first. This
// keeps merged subtrees at the bottom of the sorted list, which reproduces
// the classic tabular construction.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct MergeKey {
    weight: u128,
    leaf: bool,
    order: Reverse<u64>,
    node: usize,
}

/// Huffman code lengths for each class of `t`, in ascending class order.
pub fn huffman_lengths(t: &FrequencyTable) -> Result<Vec<(TokenClass, u64)>> {
    if t.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let leaves: Vec<(TokenClass, u64)> = t.iter().collect();
    if leaves.len() == 1 {
        return Ok(vec![(leaves[0].0, 1)]);
    }

    let mut children: Vec<Option<(usize, usize)>> = vec![None; leaves.len()];
    let mut heap = BinaryHeap::new();
    for (i, &(class, n)) in leaves.iter().enumerate() {
        heap.push(Reverse(MergeKey {
            weight: n as u128,
            leaf: true,
            order: Reverse(class.get()),
            node: i,
        }));
    }
    let mut merges = 0u64;
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().unwrap();
        let Reverse(b) = heap.pop().unwrap();
        let node = children.len();
        children.push(Some((a.node, b.node)));
        merges += 1;
        heap.push(Reverse(MergeKey {
            weight: a.weight + b.weight,
            leaf: false,
            order: Reverse(merges),
            node,
        }));
    }

    let mut depth = vec![0u64; children.len()];
    let mut lengths = vec![0u64; leaves.len()];
    // Parents are created after their children, so a reverse scan visits
    // every parent before its children.
    for node in (0..children.len()).rev() {
        match children[node] {
            Some((a, b)) => {
                depth[a] = depth[node] + 1;
                depth[b] = depth[node] + 1;
            }
            None => lengths[node] = depth[node],
        }
    }
    Ok(leaves
        .iter()
        .zip(lengths)
        .map(|(&(class, _), len)| (class, len))
        .collect())
}

/// Assigns canonical codewords to a length profile: entries sorted by
/// (length, class) receive numerically increasing codes.
pub fn canonical(kind: CodeKind, lengths: &[(TokenClass, u64)]) -> Result<CodeBook> {
    let mut sorted = lengths.to_vec();
    sorted.sort_by_key(|&(class, len)| (len, class));
    let mut entries = BTreeMap::new();
    let mut code: Vec<bool> = Vec::new();
    for (i, &(class, len)) in sorted.iter().enumerate() {
        if len == 0 {
            return Err(Error::Domain(format!("zero code length for {class}")));
        }
        if i > 0 {
            // Binary increment; running out of room means the lengths
            // violate the Kraft inequality.
            match code.iter().rposition(|&b| !b) {
                Some(pos) => {
                    code[pos] = true;
                    code[pos + 1..].iter_mut().for_each(|b| *b = false);
                }
                None => {
                    return Err(Error::Domain(
                        "code lengths exceed the Kraft inequality".into(),
                    ))
                }
            }
        }
        code.resize(len as usize, false);
        entries.insert(class, code.iter().copied().collect());
    }
    CodeBook::new(kind, entries)
}

pub fn build_huffman(t: &FrequencyTable) -> Result<CodeBook> {
    canonical(CodeKind::Huffman, &huffman_lengths(t)?)
}

/// Smallest `l >= 1` with `count * 2^l >= total`, i.e. `max(1, ceil(-log2 p))`.
fn shannon_length(count: u64, total: u64) -> u64 {
    let mut l = 0;
    let mut scaled = count as u128;
    while scaled < total as u128 {
        scaled <<= 1;
        l += 1;
    }
    l.max(1)
}

pub fn build_shannon(t: &FrequencyTable) -> Result<CodeBook> {
    if t.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let total = t.total() as u128;
    let mut cumulative = 0u128;
    let mut entries = BTreeMap::new();
    for (class, n) in t.ranked() {
        let len = shannon_length(n, t.total());
        let mut numerator = cumulative;
        let mut code = BitVector::with_capacity(len as usize);
        for _ in 0..len {
            numerator <<= 1;
            let bit = numerator >= total;
            if bit {
                numerator -= total;
            }
            code.push(bit);
        }
        entries.insert(class, code);
        cumulative += n as u128;
    }
    CodeBook::new(CodeKind::Shannon, entries)
}

/// The `rank`-th member of `{0, 11, 101, 1001, 10001, ...}`; it has length
/// `rank`.
pub fn palindrome(rank: u64) -> Result<BitVector> {
    match rank {
        0 => Err(Error::Domain("palindrome rank must be at least 1".into())),
        1 => Ok(BitVector::repeat(false, 1)),
        _ => {
            let mut v = BitVector::with_capacity(rank as usize);
            v.push(true);
            v.push_run(false, rank as usize - 2);
            v.push(true);
            Ok(v)
        }
    }
}

/// Symmetric book from an explicit ranking, most frequent class first.
pub fn symmetric_from_ranking(ranking: &[TokenClass]) -> Result<CodeBook> {
    if ranking.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let mut entries = BTreeMap::new();
    for (i, &class) in ranking.iter().enumerate() {
        if entries.insert(class, palindrome(i as u64 + 1)?).is_some() {
            return Err(Error::Domain(format!("{class} ranked twice")));
        }
    }
    CodeBook::new(CodeKind::Symmetric, entries)
}

pub fn build_symmetric(t: &FrequencyTable) -> Result<CodeBook> {
    let ranking: Vec<TokenClass> = t.ranked().into_iter().map(|(k, _)| k).collect();
    symmetric_from_ranking(&ranking)
}

/// Book that leaves every class of `t` as its own bit pattern.
pub fn identity(t: &FrequencyTable) -> Result<CodeBook> {
    let entries = t.iter().map(|(k, _)| (k, k.bits())).collect();
    CodeBook::new(CodeKind::Identity, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: u64) -> TokenClass {
        TokenClass::new(n).unwrap()
    }

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn table(pairs: &[(u64, u64)]) -> FrequencyTable {
        FrequencyTable::from_counts(pairs.iter().map(|&(c, n)| (k(c), n)))
    }

    fn skewed_four() -> FrequencyTable {
        table(&[(2, 25), (1, 20), (3, 3), (4, 1)])
    }

    fn sorted_lengths(book: &CodeBook) -> Vec<u64> {
        let mut l: Vec<u64> = book.lengths().into_iter().map(|(_, l)| l).collect();
        l.sort_unstable();
        l
    }

    fn codes(book: &CodeBook) -> Vec<(u64, String)> {
        book.iter().map(|(c, w)| (c.get(), w.to_string())).collect()
    }

    #[test]
    fn huffman_five_symbol_example() {
        let t = table(&[(1, 4), (2, 2), (3, 2), (4, 1), (5, 1)]);
        let book = build_huffman(&t).unwrap();
        assert_eq!(sorted_lengths(&book), vec![1, 2, 3, 4, 4]);
        assert_eq!(
            codes(&book),
            vec![
                (1, "0".into()),
                (2, "10".into()),
                (3, "110".into()),
                (4, "1110".into()),
                (5, "1111".into())
            ]
        );
        assert_eq!(book.payload_bits(&t).unwrap(), 22);
        assert_eq!(book.kraft_sum(), 1.0);
    }

    #[test]
    fn huffman_skewed_four_profile() {
        let book = build_huffman(&skewed_four()).unwrap();
        assert_eq!(sorted_lengths(&book), vec![1, 2, 3, 3]);
        assert_eq!(book.get(k(2)).unwrap().len(), 1);
        assert_eq!(book.payload_bits(&skewed_four()).unwrap(), 77);
    }

    #[test]
    fn huffman_single_class() {
        let book = build_huffman(&table(&[(1, 10)])).unwrap();
        assert_eq!(codes(&book), vec![(1, "0".into())]);
    }

    #[test]
    fn empty_alphabet_errors() {
        let empty = FrequencyTable::new();
        assert!(matches!(build_huffman(&empty), Err(Error::EmptyAlphabet)));
        assert!(matches!(build_shannon(&empty), Err(Error::EmptyAlphabet)));
        assert!(matches!(build_symmetric(&empty), Err(Error::EmptyAlphabet)));
    }

    #[test]
    fn shannon_examples() {
        let book = build_shannon(&table(&[(1, 4), (2, 2), (3, 2), (4, 1), (5, 1)])).unwrap();
        assert_eq!(
            codes(&book),
            vec![
                (1, "00".into()),
                (2, "011".into()),
                (3, "100".into()),
                (4, "1100".into()),
                (5, "1110".into())
            ]
        );
        assert!(book.is_prefix_free());

        let single = build_shannon(&table(&[(3, 9)])).unwrap();
        assert_eq!(codes(&single), vec![(3, "0".into())]);

        let pair = build_shannon(&table(&[(1, 5), (2, 5)])).unwrap();
        assert_eq!(codes(&pair), vec![(1, "0".into()), (2, "1".into())]);
    }

    #[test]
    fn palindrome_family() {
        assert_eq!(palindrome(1).unwrap(), bv("0"));
        assert_eq!(palindrome(2).unwrap(), bv("11"));
        assert_eq!(palindrome(5).unwrap(), bv("10001"));
        assert!(matches!(palindrome(0), Err(Error::Domain(_))));
        for r in 1..=64 {
            let p = palindrome(r).unwrap();
            assert_eq!(p.len() as u64, r);
            assert!(p.is_palindrome());
        }
    }

    #[test]
    fn symmetric_skewed_four_mapping() {
        let book = build_symmetric(&skewed_four()).unwrap();
        assert_eq!(
            codes(&book),
            vec![
                (1, "11".into()),
                (2, "0".into()),
                (3, "101".into()),
                (4, "1001".into())
            ]
        );
        assert!(book.is_prefix_free() && book.is_suffix_free());
        assert_eq!(book.payload_bits(&skewed_four()).unwrap(), 78);
    }

    #[test]
    fn symmetric_small_and_tied() {
        assert_eq!(codes(&build_symmetric(&table(&[(1, 1)])).unwrap()), vec![(1, "0".into())]);
        let tied = build_symmetric(&table(&[(1, 5), (2, 5), (3, 5)])).unwrap();
        assert_eq!(
            codes(&tied),
            vec![(1, "0".into()), (2, "11".into()), (3, "101".into())]
        );
    }

    #[test]
    fn encode_examples() {
        let mut tokens = Vec::new();
        tokens.extend(std::iter::repeat_n(k(2), 25));
        tokens.extend(std::iter::repeat_n(k(1), 20));
        tokens.extend(std::iter::repeat_n(k(3), 3));
        tokens.push(k(4));
        let s = TokenStream::new(tokens, 0);
        let sym = build_symmetric(&skewed_four()).unwrap();
        assert_eq!(encode(&s, &sym).unwrap().len(), 78);
        assert_eq!(encode(&TokenStream::default(), &sym).unwrap().len(), 0);
        assert_eq!(encode(&s, &identity(&skewed_four()).unwrap()).unwrap().len(), 83);

        let missing = TokenStream::new(vec![k(9)], 0);
        assert!(matches!(encode(&missing, &sym), Err(Error::IncompleteCodebook(c)) if c == k(9)));
    }

    #[test]
    fn decode_examples() {
        let sym = build_symmetric(&skewed_four()).unwrap();
        assert_eq!(decode(&bv("011101"), &sym).unwrap(), vec![k(2), k(1), k(3)]);
        assert_eq!(decode(&bv(""), &sym).unwrap(), vec![]);
        assert!(matches!(decode(&bv("1"), &sym), Err(Error::TruncatedPayload(0))));
        assert!(matches!(decode(&bv("01000"), &sym), Err(Error::InvalidPayload(1))));
    }

    #[test]
    fn decode_reverse_examples() {
        let sym = build_symmetric(&skewed_four()).unwrap();
        assert_eq!(decode_reverse(&bv("011101"), &sym).unwrap(), vec![k(3), k(1), k(2)]);
        assert_eq!(decode_reverse(&bv(""), &sym).unwrap(), vec![]);
        let fwd = decode(&bv("101101"), &sym).unwrap();
        let mut back = decode_reverse(&bv("101101"), &sym).unwrap();
        assert_eq!(fwd, vec![k(3), k(3)]);
        back.reverse();
        assert_eq!(back, fwd);
    }

    #[test]
    fn reverse_decode_requires_suffix_free() {
        let id = identity(&table(&[(1, 1), (2, 1)])).unwrap();
        assert!(id.is_prefix_free());
        assert!(!id.is_suffix_free());
        assert!(matches!(decode_reverse(&bv("0"), &id), Err(Error::NotDecodable("suffix"))));
    }

    #[test]
    fn kraft_examples() {
        let huff = build_huffman(&table(&[(1, 4), (2, 2), (3, 2), (4, 1), (5, 1)])).unwrap();
        assert_eq!(kraft_sum(&huff), 1.0);
        let sym = build_symmetric(&table(&[(1, 3), (2, 2), (3, 1)])).unwrap();
        assert_eq!(kraft_sum(&sym), 0.875);
        let empty = CodeBook::new(CodeKind::Identity, BTreeMap::new()).unwrap();
        assert_eq!(kraft_sum(&empty), 0.0);
    }

    #[test]
    fn canonical_rejects_overfull_profile() {
        let lengths = [(k(1), 1), (k(2), 1), (k(3), 1)];
        assert!(canonical(CodeKind::Huffman, &lengths).is_err());
        assert!(canonical(CodeKind::Huffman, &[(k(1), 0)]).is_err());
    }

    #[test]
    fn new_rejects_duplicate_codewords() {
        let entries = BTreeMap::from([(k(1), bv("01")), (k(2), bv("01"))]);
        assert!(CodeBook::new(CodeKind::Huffman, entries).is_err());
    }

    #[test]
    fn prefix_flag_detects_violations() {
        let entries = BTreeMap::from([(k(1), bv("0")), (k(2), bv("01"))]);
        let book = CodeBook::new(CodeKind::Huffman, entries).unwrap();
        assert!(!book.is_prefix_free());
        assert!(book.is_suffix_free());
        assert!(matches!(book.decode(&bv("0")), Err(Error::NotDecodable("prefix"))));
    }

    #[test]
    fn identity_book_is_token_pattern() {
        let t = table(&[(1, 2), (4, 1), (7, 3)]);
        let id = identity(&t).unwrap();
        for (class, code) in id.iter() {
            assert_eq!(code, &class.bits());
        }
        assert_eq!(id.payload_bits(&t).unwrap(), t.identity_payload_bits());
    }
}
