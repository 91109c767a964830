//! Crate-wide error type.

use std::fmt;
use std::io;

/// Errors produced by tensor ops, layers, the simulator and file I/O.
#[derive(Debug)]
pub enum Error {
    /// Shape or size constraint violated (non-power-of-two FFT input,
    /// kernel larger than input, pool factor not dividing the input, ...).
    Dimension(String),
    /// A physical or configuration parameter is out of its valid range.
    Parameter(String),
    /// A scatterer or target maps outside the raw data matrix.
    Placement(String),
    /// An operation was called in the wrong order (e.g. backward before
    /// forward).
    State(String),
    /// Layer composition failed while running the network; carries the
    /// index of the offending layer.
    Composition { layer: usize, msg: String },
    /// A binary file is malformed; `offset` is the byte position at which
    /// parsing failed.
    Format { offset: u64, msg: String },
    /// Training produced a non-finite loss.
    Numeric(String),
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Placement(msg) => write!(f, "placement error: {msg}"),
            Error::State(msg) => write!(f, "state error: {msg}"),
            Error::Composition { layer, msg } => {
                write!(f, "composition error at layer {layer}: {msg}")
            }
            Error::Format { offset, msg } => {
                write!(f, "format error at byte {offset}: {msg}")
            }
            Error::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
