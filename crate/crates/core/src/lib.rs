//! Lossless recoding of bit streams through run tokens.
//!
//! Any bit stream splits uniquely into tokens `1^(k-1) 0` plus a trailing
//! run of ones. Counting token classes and mapping each class to a new
//! codeword gives a bijective recoding: Huffman codes never make the payload
//! longer than the input, Shannon codes serve as a baseline, and palindromic
//! codes make the payload decodable from either end.
//!
//! ```
//! use bcod_core::{compress, decompress, BitVector, Mode};
//!
//! let input: BitVector = "1011100".parse().unwrap();
//! let archive = compress(&input, Mode::Huffman);
//! assert!(archive.payload_and_residue_bits() <= input.len() as u64);
//! assert_eq!(decompress(&archive).unwrap(), input);
//! ```

pub mod bench;
pub mod bitio;
pub mod coders;
pub mod container;
pub mod error;
pub mod model;
pub mod tokenizer;

pub use bitio::{BitCursor, BitVector};
pub use coders::{CodeBook, CodeKind};
pub use container::{compress, decompress, Archive, CodeTable, Mode};
pub use error::{Error, Result, Section};
pub use model::FrequencyTable;
pub use tokenizer::{detokenize, tokenize, TokenClass, TokenStream};
