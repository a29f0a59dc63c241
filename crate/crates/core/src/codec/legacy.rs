//! Absolute-coordinate baseline: every sketch carries an explicit frame as
//! Z-Y-X Euler angles plus a translation, and points carry no pointers.

use serde::{Deserialize, Serialize};

use crate::codec::quant::{NvRange, Normalization, QuantConfig};
use crate::codec::token::{self, Token};
use crate::codec::TokenStream;
use crate::grammar::{Cursor, Emitter, Extrude, ParseError, Profile, SerializeError, Terminator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegacySketch {
    /// (θz, θy, θx) in degrees, applied intrinsically in that order.
    pub euler_zyx: [f64; 3],
    pub translation: [f64; 3],
    pub profiles: Vec<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegacyStep {
    pub sketches: Vec<LegacySketch>,
    pub extrude: Extrude,
    pub terminator: Terminator,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LegacyProgram {
    pub steps: Vec<LegacyStep>,
}

impl LegacyProgram {
    pub fn linear_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for step in &self.steps {
            for sk in &step.sketches {
                out.extend(sk.translation);
                for prof in &sk.profiles {
                    for lp in &prof.loops {
                        for c in &lp.curves {
                            let p = c.anchor();
                            out.extend([p.x, p.y]);
                            if let crate::grammar::Curve::Circle { radius, .. } = c {
                                out.push(*radius);
                            }
                        }
                    }
                }
            }
            out.extend([step.extrude.e_p, step.extrude.e_n]);
        }
        out
    }
}

/// Token stream of the baseline codec; never contains pointer states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegacyStream {
    pub q: u32,
    pub nv_range: NvRange,
    pub tokens: Vec<u32>,
}

pub fn encode_legacy(program: &LegacyProgram, cfg: &QuantConfig) -> Result<LegacyStream, SerializeError> {
    let range = match cfg.normalization {
        Normalization::PerProgram => NvRange::spanning(program.linear_values().into_iter().chain([0.0])),
        Normalization::Fixed(r) => r,
    };
    let mut e = Emitter::new(*cfg, range);
    for (i, step) in program.steps.iter().enumerate() {
        let path = format!("steps[{i}]");
        for (s, sk) in step.sketches.iter().enumerate() {
            let sp = format!("{path}.sketches[{s}]");
            e.label(token::SS);
            for (k, a) in sk.euler_zyx.iter().enumerate() {
                e.ag(*a, &format!("{sp}.euler_zyx[{k}]"))?;
            }
            for (k, t) in sk.translation.iter().enumerate() {
                e.nv(*t, &format!("{sp}.translation[{k}]"))?;
            }
            e.profiles(&sk.profiles, &sp, false)?;
        }
        e.extrude(&step.extrude, &format!("{path}.extrude"))?;
        e.terminator(step.terminator);
    }
    let s = e.stream;
    Ok(LegacyStream { q: s.q, nv_range: s.nv_range, tokens: s.tokens })
}

pub fn decode_legacy(stream: &LegacyStream) -> Result<LegacyProgram, ParseError> {
    let wire = TokenStream { q: stream.q, nv_range: stream.nv_range, tokens: stream.tokens.clone(), pointers: Default::default() };
    let mut c = Cursor::new(&wire)?;
    let mut steps = Vec::new();
    loop {
        c.expect(Token::SketchStart, "ss")?;
        let mut sketches = Vec::new();
        loop {
            let euler_zyx = [c.ag()?, c.ag()?, c.ag()?];
            let translation = [c.nv()?, c.nv()?, c.nv()?];
            let profiles = c.profiles(false)?;
            sketches.push(LegacySketch { euler_zyx, translation, profiles });
            match c.next("ss|se")? {
                Token::SketchStart => continue,
                Token::ExtrudeStart => break,
                t => return Err(c.unexpected("ss|se", t)),
            }
        }
        let extrude = c.extrude_body()?;
        let terminator = c.terminator()?;
        steps.push(LegacyStep { sketches, extrude, terminator });
        match terminator {
            Terminator::EndOfModel => {
                if !c.at_end() {
                    return Err(ParseError::TrailingTokens { position: c.position() });
                }
                return Ok(LegacyProgram { steps });
            }
            Terminator::EndOfStep => {
                if c.at_end() {
                    return Err(ParseError::MissingTerminator { position: c.position() });
                }
            }
        }
    }
}
