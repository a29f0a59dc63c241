//! Quantized token codec for programs, plus the absolute-coordinate baseline.

pub mod legacy;
pub mod quant;
mod stream;
pub mod token;

use thiserror::Error;

pub use legacy::{decode_legacy, encode_legacy, LegacyProgram, LegacySketch, LegacyStep, LegacyStream};
pub use quant::{dequantize_value, quantize_value, NvRange, Normalization, QuantConfig, RangeError, ValueKind};
pub use stream::TokenStream;

use crate::grammar::{self, Diagnostics, ParseError, Program, SerializeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("malformed program: no steps")]
    MalformedProgram,
    #[error("program failed validation ({} diagnostics)", .0.len())]
    Invalid(Diagnostics),
    #[error("{path}: {source}")]
    Range { path: String, source: RangeError },
    #[error("step {step}: {op} is not expressible in the legacy codec")]
    UnsupportedOperation { step: usize, op: &'static str },
}

impl From<SerializeError> for CodecError {
    fn from(e: SerializeError) -> Self {
        match e {
            SerializeError::EmptyProgram => CodecError::MalformedProgram,
            SerializeError::ValidationFailed(d) => CodecError::Invalid(d),
            SerializeError::Range { path, source } => CodecError::Range { path, source },
        }
    }
}

pub fn encode(program: &Program, cfg: &QuantConfig) -> Result<TokenStream, CodecError> {
    Ok(grammar::serialize(program, cfg)?)
}

/// Encodes without structural validation; used to produce deliberately
/// broken streams.
pub fn encode_unchecked(program: &Program, cfg: &QuantConfig) -> Result<TokenStream, CodecError> {
    Ok(grammar::emit(program, cfg)?)
}

pub fn decode(stream: &TokenStream) -> Result<Program, ParseError> {
    grammar::parse(stream)
}
