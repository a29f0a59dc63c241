//! Decode, validate and execute a token stream, classifying failures.

use std::fmt;
use std::fs;
use std::path::Path;

use cadseq_core::codec::{decode, TokenStream};
use cadseq_core::grammar::{validate, Diagnostics, ParseError, Program};
use cadseq_core::kernel::{execute_program, ExecConfig, ExecError, Execution};

#[derive(Debug)]
pub enum Failure {
    /// The file is not a readable token stream or the token layer is broken.
    Decode(String),
    Grammar(String),
    Kernel(ExecError),
    Pointer(ExecError),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Decode(_) => 2,
            Failure::Grammar(_) => 3,
            Failure::Kernel(_) => 4,
            Failure::Pointer(_) => 5,
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            Failure::Decode(_) => "DecodeError",
            Failure::Grammar(_) => "GrammarError",
            Failure::Kernel(_) => "KernelError",
            Failure::Pointer(_) => "PointerResolutionError",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Decode(m) | Failure::Grammar(m) => write!(f, "{}: {m}", self.class_name()),
            Failure::Kernel(e) | Failure::Pointer(e) => write!(f, "{}: {e}", self.class_name()),
        }
    }
}

impl std::error::Error for Failure {}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        if e.is_decode_error() {
            Failure::Decode(e.to_string())
        } else {
            Failure::Grammar(e.to_string())
        }
    }
}

impl From<ExecError> for Failure {
    fn from(e: ExecError) -> Self {
        if e.error.is_pointer_error() {
            Failure::Pointer(e)
        } else {
            Failure::Kernel(e)
        }
    }
}

fn diagnostics_message(d: &Diagnostics) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub fn read_stream(path: &Path) -> Result<TokenStream, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Decode(format!("{}: {e}", path.display())))?;
    TokenStream::from_json(&text).map_err(|e| Failure::Decode(format!("{}: {e}", path.display())))
}

pub fn read_program(path: &Path) -> anyhow::Result<Program> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn check(program: &Program) -> Result<(), Failure> {
    let d = validate(program);
    if d.is_empty() {
        Ok(())
    } else {
        Err(Failure::Grammar(diagnostics_message(&d)))
    }
}

/// Token stream to a validated program.
pub fn decode_checked(stream: &TokenStream) -> Result<Program, Failure> {
    let program = decode(stream)?;
    check(&program)?;
    Ok(program)
}

pub fn build_program(program: &Program, cfg: &ExecConfig) -> Result<Execution, Failure> {
    check(program)?;
    Ok(execute_program(program, cfg)?)
}

pub fn build_stream(stream: &TokenStream, cfg: &ExecConfig) -> Result<(Program, Execution), Failure> {
    let program = decode_checked(stream)?;
    let exec = execute_program(&program, cfg)?;
    Ok((program, exec))
}
