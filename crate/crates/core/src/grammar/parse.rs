use thiserror::Error;

use crate::codec::quant::{dequantize_value, NvRange, QuantConfig, RangeError, ValueKind, MAX_Q, MIN_Q};
use crate::codec::token::Token;
use crate::codec::TokenStream;

use super::ast::*;

/// Upper bound on pointers in one chamfer or fillet step.
pub const MAX_BLEND_EDGES: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unknown token id {id} at position {position}")]
    UnknownToken { position: usize, id: u32 },
    #[error("stream truncated at position {position}: expected {expected}")]
    Truncated { position: usize, expected: String },
    #[error("grammar error at position {position}: expected {expected}, found {found}")]
    Grammar { position: usize, expected: String, found: String },
    #[error("trailing tokens after end of model at position {position}")]
    TrailingTokens { position: usize },
    #[error("stream ends after an end-of-step token at position {position}; last step must end the model")]
    MissingTerminator { position: usize },
    #[error("pointer token at position {position} has no payload")]
    MissingPayload { position: usize },
    #[error("payload at position {position} is not attached to a pointer token")]
    StrayPayload { position: usize },
    #[error("bad stream header: {0}")]
    Header(RangeError),
}

impl ParseError {
    /// True for failures of the wire encoding rather than of the grammar.
    pub fn is_decode_error(&self) -> bool {
        matches!(
            self,
            ParseError::UnknownToken { .. }
                | ParseError::Truncated { .. }
                | ParseError::MissingPayload { .. }
                | ParseError::StrayPayload { .. }
                | ParseError::Header(_)
        )
    }

    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::UnknownToken { position, .. }
            | ParseError::Truncated { position, .. }
            | ParseError::Grammar { position, .. }
            | ParseError::TrailingTokens { position }
            | ParseError::MissingTerminator { position }
            | ParseError::MissingPayload { position }
            | ParseError::StrayPayload { position } => Some(*position),
            ParseError::Header(_) => None,
        }
    }
}

type Result<T> = std::result::Result<T, ParseError>;

pub(crate) struct Cursor<'a> {
    stream: &'a TokenStream,
    cfg: QuantConfig,
    range: NvRange,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(stream: &'a TokenStream) -> Result<Self> {
        if !(MIN_Q..=MAX_Q).contains(&stream.q) {
            return Err(ParseError::Header(RangeError::BitWidth(stream.q)));
        }
        let r = stream.nv_range;
        if !(r.lo.is_finite() && r.hi.is_finite() && r.hi > r.lo) {
            return Err(ParseError::Header(RangeError::Value { value: r.hi, lo: r.lo, hi: f64::INFINITY }));
        }
        for &p in stream.pointers.keys() {
            if stream.tokens.get(p) != Some(&crate::codec::token::PE) {
                return Err(ParseError::StrayPayload { position: p });
            }
        }
        Ok(Self { stream, cfg: QuantConfig::with_q(stream.q), range: r, pos: 0 })
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.stream.tokens.len()
    }

    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    pub(crate) fn peek(&self) -> Result<Option<Token>> {
        self.peek_at(self.pos)
    }

    fn peek_at(&self, pos: usize) -> Result<Option<Token>> {
        match self.stream.tokens.get(pos) {
            None => Ok(None),
            Some(&id) => Token::from_id(id, self.cfg.q)
                .map(Some)
                .ok_or(ParseError::UnknownToken { position: pos, id }),
        }
    }

    pub(crate) fn next(&mut self, expected: &str) -> Result<Token> {
        match self.peek()? {
            None => Err(ParseError::Truncated { position: self.pos, expected: expected.into() }),
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
        }
    }

    pub(crate) fn unexpected(&self, expected: &str, found: Token) -> ParseError {
        ParseError::Grammar { position: self.pos - 1, expected: expected.into(), found: found.notation() }
    }

    pub(crate) fn expect(&mut self, want: Token, expected: &str) -> Result<()> {
        let t = self.next(expected)?;
        if t == want {
            Ok(())
        } else {
            Err(self.unexpected(expected, t))
        }
    }

    pub(crate) fn bin(&mut self, expected: &str) -> Result<u32> {
        match self.next(expected)? {
            Token::Value(b) => Ok(b),
            t => Err(self.unexpected(expected, t)),
        }
    }

    pub(crate) fn nv_of(&self, bin: u32) -> f64 {
        let t = dequantize_value(bin, &self.cfg, ValueKind::Nv).expect("bin validated by tokenizer");
        self.range.denormalize(t)
    }

    pub(crate) fn len_of(&self, bin: u32) -> f64 {
        let t = dequantize_value(bin, &self.cfg, ValueKind::Nv).expect("bin validated by tokenizer");
        self.range.denormalize_len(t)
    }

    pub(crate) fn len(&mut self) -> Result<f64> {
        let b = self.bin("nv")?;
        Ok(self.len_of(b))
    }

    pub(crate) fn ag_of(&self, bin: u32) -> f64 {
        dequantize_value(bin, &self.cfg, ValueKind::Ag).expect("bin validated by tokenizer")
    }

    pub(crate) fn nv(&mut self) -> Result<f64> {
        let b = self.bin("nv")?;
        Ok(self.nv_of(b))
    }

    pub(crate) fn ag(&mut self) -> Result<f64> {
        let b = self.bin("ag")?;
        Ok(self.ag_of(b))
    }

    /// Unnormalized value in [0, 1].
    pub(crate) fn unit(&mut self) -> Result<f64> {
        let b = self.bin("nv")?;
        Ok(dequantize_value(b, &self.cfg, ValueKind::Nv).expect("bin validated by tokenizer"))
    }

    pub(crate) fn pointer(&mut self) -> Result<EntityRef> {
        let at = self.pos;
        self.expect(Token::PointerEnabled, "pe")?;
        self.stream.pointers.get(&at).copied().ok_or(ParseError::MissingPayload { position: at })
    }

    fn pointer_state(&mut self) -> Result<Option<EntityRef>> {
        let at = self.pos;
        match self.next("pe|pd")? {
            Token::PointerEnabled => {
                self.stream.pointers.get(&at).copied().map(Some).ok_or(ParseError::MissingPayload { position: at })
            }
            Token::PointerDisabled => Ok(None),
            t => Err(self.unexpected("pe|pd", t)),
        }
    }

    pub(crate) fn point(&mut self, with_pointers: bool) -> Result<Point2> {
        let x = self.nv()?;
        let y = self.nv()?;
        let snap = if with_pointers { self.pointer_state()? } else { None };
        Ok(Point2 { x, y, snap })
    }

    fn curve(&mut self, with_pointers: bool) -> Result<Curve> {
        let p = self.point(with_pointers)?;
        if let Some(Token::Value(bin)) = self.peek()? {
            // LL(2): an orientation after the value marks an arc.
            match self.peek_at(self.pos + 1)? {
                Some(Token::Orientation(o)) => {
                    self.pos += 2;
                    return Ok(Curve::Arc { start: p, sweep: self.ag_of(bin), orientation: o });
                }
                None => {
                    return Err(ParseError::Truncated { position: self.pos + 1, expected: "or|sx|sl|sp|ss|se".into() })
                }
                Some(_) => {
                    self.pos += 1;
                    return Ok(Curve::Circle { center: p, radius: self.len_of(bin) });
                }
            }
        }
        Ok(Curve::Line { start: p })
    }

    fn lp(&mut self, with_pointers: bool) -> Result<Loop> {
        self.expect(Token::CurveStart, "sx")?;
        let mut curves = vec![self.curve(with_pointers)?];
        while self.peek()? == Some(Token::CurveStart) {
            self.pos += 1;
            curves.push(self.curve(with_pointers)?);
        }
        Ok(Loop { curves })
    }

    fn profile(&mut self, with_pointers: bool) -> Result<Profile> {
        self.expect(Token::LoopStart, "sl")?;
        let mut loops = vec![self.lp(with_pointers)?];
        while self.peek()? == Some(Token::LoopStart) {
            self.pos += 1;
            loops.push(self.lp(with_pointers)?);
        }
        Ok(Profile { loops })
    }

    /// `Profile+` after the frame; each profile starts with `sp`.
    pub(crate) fn profiles(&mut self, with_pointers: bool) -> Result<Vec<Profile>> {
        self.expect(Token::ProfileStart, "sp")?;
        let mut profiles = vec![self.profile(with_pointers)?];
        while self.peek()? == Some(Token::ProfileStart) {
            self.pos += 1;
            profiles.push(self.profile(with_pointers)?);
        }
        Ok(profiles)
    }

    /// `se nv nv bo` with `se` already consumed.
    pub(crate) fn extrude_body(&mut self) -> Result<Extrude> {
        let e_p = self.len()?;
        let e_n = self.len()?;
        match self.next("bo")? {
            Token::Boolean(op) => Ok(Extrude { e_p, e_n, op }),
            t => Err(self.unexpected("bo", t)),
        }
    }

    pub(crate) fn terminator(&mut self) -> Result<Terminator> {
        match self.next("es|em")? {
            Token::EndOfStep => Ok(Terminator::EndOfStep),
            Token::EndOfModel => Ok(Terminator::EndOfModel),
            t => Err(self.unexpected("es|em", t)),
        }
    }

    fn sketch_body(&mut self) -> Result<Sketch> {
        let plane = self.pointer()?;
        let dr = match self.next("dr")? {
            Token::Direction(d) => d,
            t => return Err(self.unexpected("dr", t)),
        };
        let origin_hint = self.point(true)?;
        let rotation = self.ag()?;
        let scale = self.unit()?;
        let profiles = self.profiles(true)?;
        Ok(Sketch { plane, frame: FrameSpec { dr, origin_hint, rotation, scale }, profiles })
    }

    fn edges(&mut self) -> Result<Vec<EntityRef>> {
        let mut edges = vec![self.pointer()?];
        while self.peek()? == Some(Token::PointerEnabled) {
            if edges.len() == MAX_BLEND_EDGES {
                let found = self.next("es|em")?;
                return Err(self.unexpected("es|em", found));
            }
            edges.push(self.pointer()?);
        }
        Ok(edges)
    }

    fn step(&mut self) -> Result<Step> {
        let op = match self.next("ss|sc|sf")? {
            Token::SketchStart => {
                let mut sketches = vec![self.sketch_body()?];
                loop {
                    match self.next("ss|se")? {
                        Token::SketchStart => sketches.push(self.sketch_body()?),
                        Token::ExtrudeStart => break,
                        t => return Err(self.unexpected("ss|se", t)),
                    }
                }
                Operation::Epart { sketches, extrude: self.extrude_body()? }
            }
            Token::ChamferStart => {
                let distance = self.len()?;
                Operation::Chamfer { distance, edges: self.edges()? }
            }
            Token::FilletStart => {
                let radius = self.len()?;
                Operation::Fillet { radius, edges: self.edges()? }
            }
            t => return Err(self.unexpected("ss|sc|sf", t)),
        };
        Ok(Step { op, terminator: self.terminator()? })
    }
}

/// Recursive-descent parse of a whole token stream.
pub fn parse(stream: &TokenStream) -> Result<Program> {
    let mut c = Cursor::new(stream)?;
    let mut steps = Vec::new();
    loop {
        let step = c.step()?;
        let term = step.terminator;
        steps.push(step);
        match term {
            Terminator::EndOfModel => {
                if !c.at_end() {
                    return Err(ParseError::TrailingTokens { position: c.position() });
                }
                return Ok(Program { steps });
            }
            Terminator::EndOfStep => {
                if c.at_end() {
                    return Err(ParseError::MissingTerminator { position: c.position() });
                }
            }
        }
    }
}
