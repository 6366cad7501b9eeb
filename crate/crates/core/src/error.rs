use std::fmt;

use crate::tokenizer::TokenClass;

/// Section of a packed archive, used to point at where corruption was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Header,
    Table,
    Residue,
    Payload,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Header => "header",
            Section::Table => "code table",
            Section::Residue => "residue",
            Section::Payload => "payload",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("statistic is undefined for an empty frequency table")]
    UndefinedStatistic,

    #[error("cannot build a codebook over an empty alphabet")]
    EmptyAlphabet,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("codebook has no entry for token class {0}")]
    IncompleteCodebook(TokenClass),

    #[error("codebook is not {0}-free")]
    NotDecodable(&'static str),

    #[error("payload ends in the middle of a codeword at bit {0}")]
    TruncatedPayload(usize),

    #[error("no codeword matches the payload at bit {0}")]
    InvalidPayload(usize),

    #[error("bad magic bytes")]
    BadMagic,

    #[error("unknown format version {0}")]
    UnknownVersion(u8),

    #[error("unknown mode byte {0}")]
    UnknownMode(u8),

    #[error("varint overflows 64 bits in {0}")]
    VarintOverflow(Section),

    #[error("corrupt {section}: {reason}")]
    Corrupt { section: Section, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn corrupt(section: Section, reason: impl Into<String>) -> Self {
        Error::Corrupt {
            section,
            reason: reason.into(),
        }
    }

    /// True for errors caused by damaged or foreign archive bytes.
    pub fn is_format_error(&self) -> bool {
        matches!(
            self,
            Error::BadMagic
                | Error::UnknownVersion(_)
                | Error::UnknownMode(_)
                | Error::VarintOverflow(_)
                | Error::Corrupt { .. }
                | Error::TruncatedPayload(_)
                | Error::InvalidPayload(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
