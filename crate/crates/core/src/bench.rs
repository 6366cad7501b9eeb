//! Synthetic sources, the analytic ratio oracle, and bit-flip resilience
//! measurements.
//!
//! Random sources use Xoshiro256** seeded through SplitMix64
//! (`rand_xoshiro`), whose output is fixed for a given seed on every
//! platform.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::bitio::BitVector;
use crate::coders::{self, Trie};
use crate::container::{self, Mode};
use crate::error::{Error, Result, Section};
use crate::model::{self, FrequencyTable};
use crate::tokenizer::{self, TokenClass};

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    Uniform,
    /// Each bit is 1 with probability `p`.
    Bernoulli(f64),
    Zeros,
    Ones,
    File(PathBuf),
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::Uniform => f.write_str("uniform"),
            GeneratorKind::Bernoulli(p) => write!(f, "bernoulli:{p}"),
            GeneratorKind::Zeros => f.write_str("zeros"),
            GeneratorKind::Ones => f.write_str("ones"),
            GeneratorKind::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    /// Accepts `uniform`, `bernoulli:P`, `zeros`, `ones` and `file:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::Domain(format!("invalid generator spec {s:?}"));
        Ok(match s.split_once(':') {
            None => match s {
                "uniform" => GeneratorKind::Uniform,
                "zeros" => GeneratorKind::Zeros,
                "ones" => GeneratorKind::Ones,
                _ => return Err(invalid()),
            },
            Some(("bernoulli", p)) => {
                let p: f64 = p.parse().map_err(|_| invalid())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid());
                }
                GeneratorKind::Bernoulli(p)
            }
            Some(("file", path)) if !path.is_empty() => GeneratorKind::File(path.into()),
            Some(_) => return Err(invalid()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Bit count. File sources are cut to this length when it is shorter
    /// than the file.
    pub length: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, length: usize, seed: u64) -> Self {
        GeneratorSpec { kind, length, seed }
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<BitVector> {
    let n = spec.length;
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
    Ok(match &spec.kind {
        GeneratorKind::Zeros => BitVector::repeat(false, n),
        GeneratorKind::Ones => BitVector::repeat(true, n),
        GeneratorKind::Uniform => {
            let mut bytes = vec![0u8; n.div_ceil(8)];
            rng.fill_bytes(&mut bytes);
            BitVector::from_bytes(&bytes, n)?
        }
        GeneratorKind::Bernoulli(p) => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Domain(format!("bernoulli probability {p} outside [0, 1]")));
            }
            (0..n).map(|_| rng.random_bool(*p)).collect()
        }
        GeneratorKind::File(path) => {
            let bytes = std::fs::read(path)?;
            let all = BitVector::from_byte_slice(&bytes);
            if n < all.len() {
                all.iter().take(n).collect()
            } else {
                all
            }
        }
    })
}

/// Binary entropy `H(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p]
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.log2())
        .sum()
}

const ORACLE_TAIL: f64 = 1.0 / (1u64 << 40) as f64;

/// Expected payload bits per source bit for an i.i.d. source emitting 1 with
/// probability `p`, when the mode's book is built on the true token
/// distribution `P(k) = p^(k-1) (1-p)`. Classes with probability below
/// `2^-40` are dropped and the rest renormalized.
pub fn expected_ratio_oracle(p: f64, mode: Mode) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability {p} outside (0, 1)")));
    }
    let mut probs = Vec::new();
    let mut pk = 1.0 - p;
    while pk >= ORACLE_TAIL || probs.is_empty() {
        probs.push(pk);
        pk *= p;
    }
    let norm: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.iter().map(|q| q / norm).collect();

    // Books are built from integer weights; 2^52 keeps every retained class
    // at a weight of at least 2^12 while the sum stays well inside u64.
    let scale = (1u64 << 52) as f64;
    let table = FrequencyTable::from_counts(probs.iter().enumerate().map(|(i, q)| {
        (
            TokenClass::new(i as u64 + 1).unwrap(),
            ((q * scale).round() as u64).max(1),
        )
    }));
    let book = match mode.build_book(&table)? {
        Some(book) => book,
        None => return Ok(1.0),
    };
    let mut coded = 0.0;
    let mut source = 0.0;
    for (i, q) in probs.iter().enumerate() {
        let class = TokenClass::new(i as u64 + 1).unwrap();
        coded += q * book.get(class).expect("every class has a codeword").len() as f64;
        source += q * class.get() as f64;
    }
    Ok(coded / source)
}

/// One measured (input, mode) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub mode: Mode,
    pub input_bits: u64,
    pub payload_bits: u64,
    pub residue_bits: u64,
    pub table_bytes: usize,
    pub container_bytes: usize,
    pub elapsed: Duration,
}

impl Measurement {
    /// `(payload + residue) / input`, excluding table and header.
    pub fn payload_ratio(&self) -> f64 {
        if self.input_bits == 0 {
            return 1.0;
        }
        (self.payload_bits + self.residue_bits) as f64 / self.input_bits as f64
    }

    /// Packed archive size over input size, everything included.
    pub fn container_ratio(&self) -> f64 {
        if self.input_bits == 0 {
            return f64::INFINITY;
        }
        (self.container_bytes * 8) as f64 / self.input_bits as f64
    }
}

/// Compresses, packs and round-trips `v`, timing the whole pipeline.
pub fn measure(v: &BitVector, mode: Mode) -> Result<Measurement> {
    let start = Instant::now();
    let archive = container::compress(v, mode);
    let packed = archive.pack();
    let restored = container::decompress(&container::Archive::unpack(&packed)?)?;
    let elapsed = start.elapsed();
    if &restored != v {
        return Err(Error::corrupt(
            Section::Payload,
            format!("{mode} round trip did not restore the input"),
        ));
    }
    Ok(Measurement {
        mode,
        input_bits: v.len() as u64,
        payload_bits: archive.payload_bits(),
        residue_bits: archive.residue_len,
        table_bytes: archive.table_bytes(),
        container_bytes: packed.len(),
        elapsed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlipReport {
    pub total_tokens: usize,
    pub forward_recovered: usize,
    pub backward_recovered: usize,
    pub bidirectional_recovered: usize,
    /// Payload bits between the last token the forward parse got right and
    /// the first token of the trusted backward suffix.
    pub damage_window: usize,
}

/// A decoded token and its `[start, end)` span in the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Span {
    class: TokenClass,
    start: usize,
    end: usize,
}

/// Lenient trie decode used only for damage measurement: an unmatched bit
/// pattern skips one bit from the current token start and retries; a
/// codeword cut off by the end of the payload is dropped.
fn lenient_decode(trie: &Trie, bits: &[bool]) -> Vec<(TokenClass, usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    'outer: while start < bits.len() {
        let mut node = trie.root();
        for (i, &bit) in bits.iter().enumerate().skip(start) {
            match trie.step(node, bit) {
                None => {
                    start += 1;
                    continue 'outer;
                }
                Some(next) => node = next,
            }
            if let Some(class) = trie.symbol(node) {
                out.push((class, start, i + 1));
                start = i + 1;
                continue 'outer;
            }
        }
        break;
    }
    out
}

/// Encodes `v` with a symmetric book, flips the given payload bits, decodes
/// from both ends and scores each direction against the true tokens.
///
/// Forward recovery counts the correct leading tokens of the forward parse;
/// backward recovery counts the correct trailing tokens of the backward
/// parse. The bidirectional splice keeps both.
pub fn flip_experiment(v: &BitVector, positions: &[usize]) -> Result<FlipReport> {
    let stream = tokenizer::tokenize(v);
    let freq = model::count(&stream);
    if stream.tokens.is_empty() {
        if let Some(&p) = positions.first() {
            return Err(Error::Domain(format!("flip position {p} in an empty payload")));
        }
        return Ok(FlipReport {
            total_tokens: 0,
            forward_recovered: 0,
            backward_recovered: 0,
            bidirectional_recovered: 0,
            damage_window: 0,
        });
    }
    let book = coders::build_symmetric(&freq)?;
    let payload = book.encode(&stream.tokens)?;

    let mut truth = Vec::with_capacity(stream.tokens.len());
    let mut offset = 0;
    for &class in &stream.tokens {
        let end = offset + book.get(class).unwrap().len();
        truth.push(Span { class, start: offset, end });
        offset = end;
    }

    let mut bits: Vec<bool> = payload.iter().collect();
    for &p in positions {
        if p >= bits.len() {
            return Err(Error::Domain(format!(
                "flip position {p} outside payload of {} bits",
                bits.len()
            )));
        }
        bits[p] = !bits[p];
    }

    let forward: Vec<Span> = lenient_decode(book.forward_trie(), &bits)
        .into_iter()
        .map(|(class, start, end)| Span { class, start, end })
        .collect();
    let reversed: Vec<bool> = bits.iter().rev().copied().collect();
    let n = bits.len();
    let backward: Vec<Span> = lenient_decode(book.backward_trie(), &reversed)
        .into_iter()
        .map(|(class, start, end)| Span {
            class,
            start: n - end,
            end: n - start,
        })
        .collect();

    let total = truth.len();
    let fwd = truth.iter().zip(&forward).take_while(|(a, b)| a == b).count();
    let bwd = truth
        .iter()
        .rev()
        .zip(&backward)
        .take_while(|(a, b)| a == b)
        .count();
    let bidi = (fwd + bwd).min(total);

    let prefix_end = if fwd == 0 { 0 } else { truth[fwd - 1].end };
    let suffix_start = if bwd == 0 { n } else { truth[total - bwd].start };
    Ok(FlipReport {
        total_tokens: total,
        forward_recovered: fwd,
        backward_recovered: bwd,
        bidirectional_recovered: bidi,
        damage_window: suffix_start.saturating_sub(prefix_end),
    })
}

/// `count` distinct payload positions below `payload_bits`, drawn from a
/// seeded generator and returned sorted.
pub fn random_positions(payload_bits: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count > payload_bits {
        return Err(Error::Domain(format!(
            "cannot flip {count} distinct bits of a {payload_bits}-bit payload"
        )));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, payload_bits, count).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Payload length of `v` under a symmetric book.
pub fn symmetric_payload_bits(v: &BitVector) -> usize {
    container::compress(v, Mode::Symmetric).payload_bits() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn generator_examples() {
        let zeros = generate(&GeneratorSpec::new(GeneratorKind::Zeros, 8, 0)).unwrap();
        assert_eq!(zeros, bv("00000000"));
        let ones = generate(&GeneratorSpec::new(GeneratorKind::Bernoulli(1.0), 4, 9)).unwrap();
        assert_eq!(ones, bv("1111"));
        let uniform = generate(&GeneratorSpec::new(GeneratorKind::Uniform, 1_000_000, 42)).unwrap();
        let frac = uniform.count_ones() as f64 / 1e6;
        assert!((0.497..=0.503).contains(&frac), "{frac}");
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in [GeneratorKind::Uniform, GeneratorKind::Bernoulli(0.3)] {
            let a = generate(&GeneratorSpec::new(kind.clone(), 1000, 7)).unwrap();
            let b = generate(&GeneratorSpec::new(kind.clone(), 1000, 7)).unwrap();
            let c = generate(&GeneratorSpec::new(kind, 1000, 8)).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn generator_spec_parsing() {
        assert_eq!("uniform".parse::<GeneratorKind>().unwrap(), GeneratorKind::Uniform);
        assert_eq!(
            "bernoulli:0.8".parse::<GeneratorKind>().unwrap(),
            GeneratorKind::Bernoulli(0.8)
        );
        assert_eq!(
            "file:a.bin".parse::<GeneratorKind>().unwrap(),
            GeneratorKind::File("a.bin".into())
        );
        for bad in ["bernoulli:1.5", "bernoulli:x", "gauss", "file:", "zeros:3"] {
            assert!(bad.parse::<GeneratorKind>().is_err(), "{bad}");
        }
    }

    #[test]
    fn missing_file_is_an_error() {
        let spec = GeneratorSpec::new(GeneratorKind::File("/nonexistent/x".into()), 8, 0);
        assert!(matches!(generate(&spec), Err(Error::Io(_))));
    }

    #[test]
    fn oracle_examples() {
        let half = expected_ratio_oracle(0.5, Mode::Huffman).unwrap();
        assert!((half - 1.0).abs() < 1e-9, "{half}");
        let biased = expected_ratio_oracle(0.8, Mode::Huffman).unwrap();
        assert!(biased > 0.72 && biased < 1.0, "{biased}");
        assert!(biased >= binary_entropy(0.8));
        let sym = expected_ratio_oracle(0.5, Mode::Symmetric).unwrap();
        assert!((sym - 1.0).abs() < 1e-12, "{sym}");
        assert!(expected_ratio_oracle(0.0, Mode::Huffman).is_err());
        assert!(expected_ratio_oracle(1.0, Mode::Huffman).is_err());
    }

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.8) - 0.721_928).abs() < 1e-6);
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
    }

    #[test]
    fn zero_flips_recover_everything() {
        let v = generate(&GeneratorSpec::new(GeneratorKind::Uniform, 4096, 1)).unwrap();
        let r = flip_experiment(&v, &[]).unwrap();
        assert_eq!(r.forward_recovered, r.total_tokens);
        assert_eq!(r.backward_recovered, r.total_tokens);
        assert_eq!(r.bidirectional_recovered, r.total_tokens);
        assert_eq!(r.damage_window, 0);
    }

    #[test]
    fn flip_in_zero_run_is_local() {
        // 32 zero bits -> 32 tokens k=1 -> payload of 32 "0" codewords.
        let v = BitVector::repeat(false, 32);
        let r = flip_experiment(&v, &[10]).unwrap();
        assert_eq!(r.total_tokens, 32);
        assert_eq!(r.forward_recovered, 10);
        assert_eq!(r.backward_recovered, 21);
        assert_eq!(r.bidirectional_recovered, 31);
        assert!(r.damage_window <= 2, "{r:?}");
    }

    #[test]
    fn flip_turning_11_into_10() {
        // Tokens: k=2 x3, k=1 x2 -> book k2="0", k1="11". Token order
        // k2 k1 k2 k1 k2 gives payload 0 11 0 11 0; flipping bit 2 turns the
        // first "11" into "10".
        let v = bv("10010010");
        assert_eq!(symmetric_payload_bits(&v), 7);
        let r = flip_experiment(&v, &[2]).unwrap();
        assert_eq!(r.total_tokens, 5);
        assert_eq!(r.forward_recovered, 1);
        assert_eq!(r.backward_recovered, 3);
        assert_eq!(r.bidirectional_recovered, 4);
        assert_eq!(r.damage_window, 2);
    }

    #[test]
    fn flip_out_of_range_is_domain_error() {
        let v = bv("0101");
        let n = symmetric_payload_bits(&v);
        assert!(matches!(flip_experiment(&v, &[n]), Err(Error::Domain(_))));
        assert!(matches!(flip_experiment(&bv("111"), &[0]), Err(Error::Domain(_))));
    }

    #[test]
    fn random_positions_are_distinct_and_seeded() {
        let a = random_positions(100, 10, 3).unwrap();
        assert_eq!(a, random_positions(100, 10, 3).unwrap());
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&p| p < 100));
        assert!(random_positions(3, 4, 0).is_err());
    }

    #[test]
    fn measurement_ratios() {
        let m = measure(&BitVector::repeat(false, 1000), Mode::Huffman).unwrap();
        assert_eq!(m.payload_ratio(), 1.0);
        assert!(m.container_ratio() > 1.0);
    }
}
