use thiserror::Error;

use crate::codec::quant::{quantize_value, wrap_degrees, NvRange, Normalization, QuantConfig, RangeError, ValueKind};
use crate::codec::token::{self, Token};
use crate::codec::TokenStream;

use super::ast::*;
use super::validate::{validate, Diagnostics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SerializeError {
    #[error("program has no steps")]
    EmptyProgram,
    #[error("program failed validation ({} diagnostics)", .0.len())]
    ValidationFailed(Diagnostics),
    #[error("{path}: {source}")]
    Range { path: String, source: RangeError },
}

pub(crate) struct Emitter {
    pub(crate) stream: TokenStream,
    cfg: QuantConfig,
}

impl Emitter {
    pub(crate) fn new(cfg: QuantConfig, range: NvRange) -> Self {
        Self { stream: TokenStream::new(cfg.q, range), cfg }
    }

    pub(crate) fn label(&mut self, id: u32) {
        self.stream.tokens.push(id);
    }

    fn bin(&mut self, v: f64, kind: ValueKind, path: &str) -> Result<(), SerializeError> {
        let b = quantize_value(v, &self.cfg, kind).map_err(|source| SerializeError::Range { path: path.into(), source })?;
        self.stream.tokens.push(Token::Value(b).id());
        Ok(())
    }

    pub(crate) fn nv(&mut self, v: f64, path: &str) -> Result<(), SerializeError> {
        let r = self.stream.nv_range;
        let t = r.normalize(v);
        if !(0.0..=1.0).contains(&t) {
            return Err(SerializeError::Range {
                path: path.into(),
                source: RangeError::Value { value: v, lo: r.lo, hi: r.hi },
            });
        }
        self.bin(t, ValueKind::Nv, path)
    }

    /// Non-negative length, quantized from zero.
    pub(crate) fn len(&mut self, v: f64, path: &str) -> Result<(), SerializeError> {
        let r = self.stream.nv_range;
        let t = r.normalize_len(v);
        if !(0.0..=1.0).contains(&t) {
            return Err(SerializeError::Range {
                path: path.into(),
                source: RangeError::Value { value: v, lo: 0.0, hi: r.hi - r.lo },
            });
        }
        self.bin(t, ValueKind::Nv, path)
    }

    pub(crate) fn ag(&mut self, degrees: f64, path: &str) -> Result<(), SerializeError> {
        if !degrees.is_finite() {
            return Err(SerializeError::Range {
                path: path.into(),
                source: RangeError::Value { value: degrees, lo: 0.0, hi: 360.0 },
            });
        }
        self.bin(wrap_degrees(degrees), ValueKind::Ag, path)
    }

    pub(crate) fn unit(&mut self, v: f64, path: &str) -> Result<(), SerializeError> {
        self.bin(v, ValueKind::Nv, path)
    }

    pub(crate) fn pointer(&mut self, r: &EntityRef) {
        self.stream.pointers.insert(self.stream.tokens.len(), *r);
        self.label(token::PE);
    }

    pub(crate) fn point(&mut self, p: &Point2, path: &str, with_pointers: bool) -> Result<(), SerializeError> {
        self.nv(p.x, &format!("{path}.x"))?;
        self.nv(p.y, &format!("{path}.y"))?;
        if with_pointers {
            match &p.snap {
                Some(r) => self.pointer(r),
                None => self.label(token::PD),
            }
        }
        Ok(())
    }

    pub(crate) fn profiles(&mut self, profiles: &[Profile], path: &str, with_pointers: bool) -> Result<(), SerializeError> {
        for (p, prof) in profiles.iter().enumerate() {
            self.label(token::SP);
            for (l, lp) in prof.loops.iter().enumerate() {
                self.label(token::SL);
                for (c, curve) in lp.curves.iter().enumerate() {
                    let cp = format!("{path}.profiles[{p}].loops[{l}].curves[{c}]");
                    self.label(token::SX);
                    match curve {
                        Curve::Line { start } => self.point(start, &format!("{cp}.start"), with_pointers)?,
                        Curve::Arc { start, sweep, orientation } => {
                            self.point(start, &format!("{cp}.start"), with_pointers)?;
                            self.ag(*sweep, &format!("{cp}.sweep"))?;
                            self.label(token::orientation_id(*orientation));
                        }
                        Curve::Circle { center, radius } => {
                            self.point(center, &format!("{cp}.center"), with_pointers)?;
                            self.len(*radius, &format!("{cp}.radius"))?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn extrude(&mut self, e: &Extrude, path: &str) -> Result<(), SerializeError> {
        self.label(token::SE);
        self.len(e.e_p, &format!("{path}.e_p"))?;
        self.len(e.e_n, &format!("{path}.e_n"))?;
        self.label(token::boolean_id(e.op));
        Ok(())
    }

    pub(crate) fn terminator(&mut self, t: Terminator) {
        self.label(match t {
            Terminator::EndOfStep => token::ES,
            Terminator::EndOfModel => token::EM,
        });
    }
}

/// Range used for linear values of `program` under `cfg`. The per-program
/// range always contains zero so every length fits inside its span.
pub fn nv_range_for(program: &Program, cfg: &QuantConfig) -> NvRange {
    match cfg.normalization {
        Normalization::PerProgram => NvRange::spanning(program.linear_values().into_iter().chain([0.0])),
        Normalization::Fixed(r) => r,
    }
}

/// Emits tokens without validating the program first.
pub(crate) fn emit(program: &Program, cfg: &QuantConfig) -> Result<TokenStream, SerializeError> {
    let mut e = Emitter::new(*cfg, nv_range_for(program, cfg));
    for (i, step) in program.steps.iter().enumerate() {
        let path = format!("steps[{i}]");
        match &step.op {
            Operation::Epart { sketches, extrude } => {
                for (s, sk) in sketches.iter().enumerate() {
                    let sp = format!("{path}.sketches[{s}]");
                    e.label(token::SS);
                    e.pointer(&sk.plane);
                    e.label(token::direction_id(sk.frame.dr));
                    e.point(&sk.frame.origin_hint, &format!("{sp}.frame.origin_hint"), true)?;
                    e.ag(sk.frame.rotation, &format!("{sp}.frame.rotation"))?;
                    e.unit(sk.frame.scale, &format!("{sp}.frame.scale"))?;
                    e.profiles(&sk.profiles, &sp, true)?;
                }
                e.extrude(extrude, &format!("{path}.extrude"))?;
            }
            Operation::Chamfer { distance: v, edges } | Operation::Fillet { radius: v, edges } => {
                let start = if matches!(step.op, Operation::Chamfer { .. }) { token::SC } else { token::SF };
                e.label(start);
                e.len(*v, &format!("{path}.value"))?;
                for r in edges {
                    e.pointer(r);
                }
            }
        }
        e.terminator(step.terminator);
    }
    Ok(e.stream)
}

/// Validates and serializes a program.
pub fn serialize(program: &Program, cfg: &QuantConfig) -> Result<TokenStream, SerializeError> {
    if program.steps.is_empty() {
        return Err(SerializeError::EmptyProgram);
    }
    let diags = validate(program);
    if !diags.is_empty() {
        return Err(SerializeError::ValidationFailed(diags));
    }
    emit(program, cfg)
}
