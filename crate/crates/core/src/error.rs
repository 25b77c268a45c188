use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A required collection was empty; the payload names it.
    Empty(&'static str),
    /// A sentence had no visible characters.
    BlankSentence { index: usize },
    /// A parameter violated its owning type's invariant.
    InvalidParameter(String),
    DimensionMismatch { expected: usize, found: usize },
    CountMismatch { expected: usize, found: usize },
    ZeroNorm,
    NonFinite,
    IndexOutOfRange { index: usize, len: usize },
    InvalidBead(String),
    PairMismatch { expected: String, found: String },
    InvalidParse(String),
    MissingParse { side: &'static str, index: usize },
    SegmentTooLarge { rows: usize, cols: usize, limit: usize },
    Unsupported(&'static str),
    /// The embedding provider failed (network, service or file problem).
    Provider(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty(what) => write!(f, "empty input: {what}"),
            Error::BlankSentence { index } => write!(f, "sentence {index} is blank"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::CountMismatch { expected, found } => {
                write!(f, "count mismatch: expected {expected} vectors, found {found}")
            }
            Error::ZeroNorm => f.write_str("zero-norm vector"),
            Error::NonFinite => f.write_str("vector has a non-finite component"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::InvalidBead(msg) => write!(f, "invalid bead: {msg}"),
            Error::PairMismatch { expected, found } => {
                write!(f, "pair id mismatch: expected {expected:?}, found {found:?}")
            }
            Error::InvalidParse(msg) => write!(f, "invalid parse: {msg}"),
            Error::MissingParse { side, index } => {
                write!(f, "no parse for {side} sentence {index}")
            }
            Error::SegmentTooLarge { rows, cols, limit } => write!(
                f,
                "segment of {rows}x{cols} sentences exceeds the limit of {limit} cells"
            ),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
            Error::Provider(msg) => write!(f, "embedding provider: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
