//! Self-describing archive format.
//!
//! ```text
//! "BCOD" | version (0x01) | mode | entry count | entries | residue | payload bits | payload
//! ```
//!
//! Integers are unsigned LEB128 varints. Entries are `k, code length` for
//! Huffman, `k, count` for Shannon, and `k` in rank order for symmetric;
//! raw archives carry no entries. The payload is packed MSB-first and
//! zero-padded to a byte boundary.

use std::fmt;
use std::io::{Cursor, Read};
use std::str::FromStr;

use crate::bitio::BitVector;
use crate::coders::{self, CodeBook, CodeKind};
use crate::error::{Error, Result, Section};
use crate::model::{self, FrequencyTable};
use crate::tokenizer::{self, TokenClass, TokenStream};

pub const MAGIC: [u8; 4] = *b"BCOD";
pub const VERSION: u8 = 0x01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Huffman = 0,
    Symmetric = 1,
    Shannon = 2,
    Raw = 3,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Huffman, Mode::Symmetric, Mode::Shannon, Mode::Raw];

    pub fn from_byte(b: u8) -> Result<Mode> {
        match b {
            0 => Ok(Mode::Huffman),
            1 => Ok(Mode::Symmetric),
            2 => Ok(Mode::Shannon),
            3 => Ok(Mode::Raw),
            other => Err(Error::UnknownMode(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Huffman => "huffman",
            Mode::Symmetric => "symmetric",
            Mode::Shannon => "shannon",
            Mode::Raw => "raw",
        }
    }

    /// Builds this mode's codebook for `t`. `None` for raw mode.
    pub fn build_book(self, t: &FrequencyTable) -> Result<Option<CodeBook>> {
        Ok(match self {
            Mode::Huffman => Some(coders::build_huffman(t)?),
            Mode::Symmetric => Some(coders::build_symmetric(t)?),
            Mode::Shannon => Some(coders::build_shannon(t)?),
            Mode::Raw => None,
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown mode {s:?}")))
    }
}

/// Serialized code table; enough to rebuild the mode's book exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeTable {
    /// `(k, code length)` in ascending class order.
    Huffman(Vec<(TokenClass, u64)>),
    /// Classes in rank order.
    Symmetric(Vec<TokenClass>),
    /// `(k, count)` in ascending class order.
    Shannon(Vec<(TokenClass, u64)>),
    Raw,
}

impl CodeTable {
    pub fn mode(&self) -> Mode {
        match self {
            CodeTable::Huffman(_) => Mode::Huffman,
            CodeTable::Symmetric(_) => Mode::Symmetric,
            CodeTable::Shannon(_) => Mode::Shannon,
            CodeTable::Raw => Mode::Raw,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CodeTable::Huffman(e) | CodeTable::Shannon(e) => e.len(),
            CodeTable::Symmetric(e) => e.len(),
            CodeTable::Raw => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn empty(mode: Mode) -> CodeTable {
        match mode {
            Mode::Huffman => CodeTable::Huffman(Vec::new()),
            Mode::Symmetric => CodeTable::Symmetric(Vec::new()),
            Mode::Shannon => CodeTable::Shannon(Vec::new()),
            Mode::Raw => CodeTable::Raw,
        }
    }

    /// Rebuilds the codebook, or `None` for an empty table.
    fn book(&self) -> Result<Option<CodeBook>> {
        if self.is_empty() {
            return Ok(None);
        }
        let classes: Vec<TokenClass> = match self {
            CodeTable::Huffman(e) | CodeTable::Shannon(e) => e.iter().map(|p| p.0).collect(),
            CodeTable::Symmetric(e) => e.clone(),
            CodeTable::Raw => Vec::new(),
        };
        let mut sorted = classes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::corrupt(Section::Table, "repeated token class"));
        }
        let bad = |e: Error| Error::corrupt(Section::Table, e.to_string());
        let book = match self {
            CodeTable::Huffman(e) => {
                // A Huffman code over n symbols is never deeper than n - 1.
                let max = e.len().saturating_sub(1).max(1) as u64;
                if let Some(&(k, l)) = e.iter().find(|&&(_, l)| l == 0 || l > max) {
                    return Err(Error::corrupt(
                        Section::Table,
                        format!("code length {l} for {k} outside 1..={max}"),
                    ));
                }
                coders::canonical(CodeKind::Huffman, e).map_err(bad)?
            }
            CodeTable::Shannon(e) => {
                if e.iter().any(|&(_, n)| n == 0) {
                    return Err(Error::corrupt(Section::Table, "zero count"));
                }
                let mut total = 0u64;
                for &(_, n) in e {
                    total = total
                        .checked_add(n)
                        .ok_or_else(|| Error::corrupt(Section::Table, "count overflow"))?;
                }
                coders::build_shannon(&FrequencyTable::from_counts(e.iter().copied()))
                    .map_err(bad)?
            }
            CodeTable::Symmetric(e) => coders::symmetric_from_ranking(e).map_err(bad)?,
            CodeTable::Raw => unreachable!(),
        };
        Ok(Some(book))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Archive {
    pub table: CodeTable,
    /// Trailing ones of the source that no zero terminates.
    pub residue_len: u64,
    pub payload: BitVector,
}

impl Archive {
    pub fn mode(&self) -> Mode {
        self.table.mode()
    }

    pub fn payload_bits(&self) -> u64 {
        self.payload.len() as u64
    }

    /// Bits the archive stands for: payload plus residue.
    pub fn payload_and_residue_bits(&self) -> u64 {
        self.payload_bits() + self.residue_len
    }

    /// Size of the serialized table section (entry count and entries).
    pub fn table_bytes(&self) -> usize {
        let mut buf = Vec::new();
        write_table(&mut buf, &self.table);
        buf.len()
    }

    pub fn pack(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.payload.as_bytes().len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.mode() as u8);
        write_table(&mut out, &self.table);
        write_varint(&mut out, self.residue_len);
        write_varint(&mut out, self.payload_bits());
        out.extend_from_slice(self.payload.as_bytes());
        out
    }

    pub fn unpack(bytes: &[u8]) -> Result<Archive> {
        if bytes.len() < MAGIC.len() || bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        let mut r = Cursor::new(&bytes[4..]);
        let version = read_byte(&mut r)?;
        if version != VERSION {
            return Err(Error::UnknownVersion(version));
        }
        let mode = Mode::from_byte(read_byte(&mut r)?)?;

        let count = read_varint(&mut r, Section::Table)?;
        if count > bytes.len() as u64 {
            return Err(Error::corrupt(Section::Table, format!("{count} entries")));
        }
        let mut pairs = Vec::with_capacity(count as usize);
        let mut ranks = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let k = read_varint(&mut r, Section::Table)?;
            let class = TokenClass::new(k)
                .map_err(|_| Error::corrupt(Section::Table, "token class 0"))?;
            match mode {
                Mode::Huffman | Mode::Shannon => {
                    pairs.push((class, read_varint(&mut r, Section::Table)?))
                }
                Mode::Symmetric => ranks.push(class),
                Mode::Raw => {
                    return Err(Error::corrupt(Section::Table, "raw archive with entries"))
                }
            }
        }
        let table = match mode {
            Mode::Huffman => CodeTable::Huffman(pairs),
            Mode::Shannon => CodeTable::Shannon(pairs),
            Mode::Symmetric => CodeTable::Symmetric(ranks),
            Mode::Raw => CodeTable::Raw,
        };

        let residue_len = read_varint(&mut r, Section::Residue)?;
        let payload_bits = read_varint(&mut r, Section::Payload)?;
        let rest = &r.get_ref()[r.position() as usize..];
        let expected = payload_bits.div_ceil(8);
        if expected != rest.len() as u64 {
            return Err(Error::corrupt(
                Section::Payload,
                format!(
                    "{payload_bits} payload bits need {expected} bytes, found {}",
                    rest.len()
                ),
            ));
        }
        let payload = BitVector::from_bytes(rest, payload_bits as usize)
            .map_err(|e| Error::corrupt(Section::Payload, e.to_string()))?;
        Ok(Archive {
            table,
            residue_len,
            payload,
        })
    }
}

fn write_varint(out: &mut Vec<u8>, v: u64) {
    leb128::write::unsigned(out, v).expect("writing to a Vec cannot fail");
}

fn read_varint(r: &mut Cursor<&[u8]>, section: Section) -> Result<u64> {
    leb128::read::unsigned(r).map_err(|e| match e {
        leb128::read::Error::Overflow => Error::VarintOverflow(section),
        leb128::read::Error::IoError(_) => Error::corrupt(section, "unexpected end of archive"),
    })
}

fn read_byte(r: &mut Cursor<&[u8]>) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)
        .map_err(|_| Error::corrupt(Section::Header, "unexpected end of archive"))?;
    Ok(b[0])
}

fn write_table(out: &mut Vec<u8>, table: &CodeTable) {
    write_varint(out, table.len() as u64);
    match table {
        CodeTable::Huffman(e) | CodeTable::Shannon(e) => {
            for &(k, v) in e {
                write_varint(out, k.get());
                write_varint(out, v);
            }
        }
        CodeTable::Symmetric(e) => {
            for k in e {
                write_varint(out, k.get());
            }
        }
        CodeTable::Raw => {}
    }
}

/// Tokenizes `v`, builds the mode's book from the token counts and encodes.
pub fn compress(v: &BitVector, mode: Mode) -> Archive {
    if mode == Mode::Raw {
        return Archive {
            table: CodeTable::Raw,
            residue_len: 0,
            payload: v.clone(),
        };
    }
    let stream = tokenizer::tokenize(v);
    let freq = model::count(&stream);
    if freq.is_empty() {
        return Archive {
            table: CodeTable::empty(mode),
            residue_len: stream.residue,
            payload: BitVector::new(),
        };
    }
    let book = mode
        .build_book(&freq)
        .expect("non-empty alphabet")
        .expect("not raw");
    let payload = book
        .encode(&stream.tokens)
        .expect("book covers every counted class");
    let table = match mode {
        Mode::Huffman => CodeTable::Huffman(book.lengths()),
        Mode::Shannon => CodeTable::Shannon(freq.iter().collect()),
        Mode::Symmetric => CodeTable::Symmetric(freq.ranked().into_iter().map(|(k, _)| k).collect()),
        Mode::Raw => unreachable!(),
    };
    Archive {
        table,
        residue_len: stream.residue,
        payload,
    }
}

pub fn decompress(a: &Archive) -> Result<BitVector> {
    if a.mode() == Mode::Raw {
        if a.residue_len != 0 {
            return Err(Error::corrupt(Section::Residue, "raw archive with residue"));
        }
        return Ok(a.payload.clone());
    }
    let tokens = match a.table.book()? {
        Some(book) => book.decode(&a.payload).map_err(|e| match e {
            Error::TruncatedPayload(_) | Error::InvalidPayload(_) => {
                Error::corrupt(Section::Payload, e.to_string())
            }
            other => other,
        })?,
        None if a.payload.is_empty() => Vec::new(),
        None => return Err(Error::corrupt(Section::Payload, "payload without a code table")),
    };
    Ok(tokenizer::detokenize(&TokenStream::new(tokens, a.residue_len)))
}
