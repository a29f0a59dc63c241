//! Program AST, token-level parser, serializer and structural validator.

mod ast;
pub mod build;
mod parse;
mod serialize;
mod validate;

pub use ast::*;
pub use parse::{parse, ParseError, MAX_BLEND_EDGES};
pub(crate) use parse::Cursor;
pub use serialize::{nv_range_for, serialize, SerializeError};
pub(crate) use serialize::{emit, Emitter};
pub use validate::{validate, Diagnostic, DiagnosticKind, Diagnostics, EPS_CLOSE};
