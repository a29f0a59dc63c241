//! Token vocabulary.
//!
//! Ids 1..=23 are labels and pointer states, everything from [`VALUE_BASE`]
//! upward is a quantized value bin.

use crate::grammar::{BooleanOp, Direction, Orientation};

pub const EM: u32 = 1;
pub const ES: u32 = 2;
pub const SS: u32 = 3;
pub const SE: u32 = 4;
pub const SC: u32 = 5;
pub const SF: u32 = 6;
pub const SP: u32 = 7;
pub const SL: u32 = 8;
pub const SX: u32 = 9;
pub const PE: u32 = 10;
pub const PD: u32 = 11;
pub const OR_CW: u32 = 12;
pub const OR_CCW: u32 = 13;
pub const DR_BASE: u32 = 14;
pub const BO_BASE: u32 = 20;
pub const VALUE_BASE: u32 = 24;

/// Decoded meaning of a token id for a given bit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    EndOfModel,
    EndOfStep,
    SketchStart,
    ExtrudeStart,
    ChamferStart,
    FilletStart,
    ProfileStart,
    LoopStart,
    CurveStart,
    PointerEnabled,
    PointerDisabled,
    Orientation(Orientation),
    Direction(Direction),
    Boolean(BooleanOp),
    Value(u32),
}

impl Token {
    pub fn from_id(id: u32, q: u32) -> Option<Token> {
        Some(match id {
            EM => Token::EndOfModel,
            ES => Token::EndOfStep,
            SS => Token::SketchStart,
            SE => Token::ExtrudeStart,
            SC => Token::ChamferStart,
            SF => Token::FilletStart,
            SP => Token::ProfileStart,
            SL => Token::LoopStart,
            SX => Token::CurveStart,
            PE => Token::PointerEnabled,
            PD => Token::PointerDisabled,
            OR_CW => Token::Orientation(Orientation::Clockwise),
            OR_CCW => Token::Orientation(Orientation::CounterClockwise),
            14..=19 => Token::Direction(Direction::ALL[(id - DR_BASE) as usize]),
            20..=23 => Token::Boolean(BooleanOp::ALL[(id - BO_BASE) as usize]),
            v if v >= VALUE_BASE && u64::from(v - VALUE_BASE) < (1u64 << q) => Token::Value(v - VALUE_BASE),
            _ => return None,
        })
    }

    pub fn id(self) -> u32 {
        match self {
            Token::EndOfModel => EM,
            Token::EndOfStep => ES,
            Token::SketchStart => SS,
            Token::ExtrudeStart => SE,
            Token::ChamferStart => SC,
            Token::FilletStart => SF,
            Token::ProfileStart => SP,
            Token::LoopStart => SL,
            Token::CurveStart => SX,
            Token::PointerEnabled => PE,
            Token::PointerDisabled => PD,
            Token::Orientation(o) => orientation_id(o),
            Token::Direction(d) => direction_id(d),
            Token::Boolean(b) => boolean_id(b),
            Token::Value(bin) => VALUE_BASE + bin,
        }
    }

    /// Short notation used in diagnostics.
    pub fn notation(self) -> String {
        match self {
            Token::EndOfModel => "em".into(),
            Token::EndOfStep => "es".into(),
            Token::SketchStart => "ss".into(),
            Token::ExtrudeStart => "se".into(),
            Token::ChamferStart => "sc".into(),
            Token::FilletStart => "sf".into(),
            Token::ProfileStart => "sp".into(),
            Token::LoopStart => "sl".into(),
            Token::CurveStart => "sx".into(),
            Token::PointerEnabled => "pe".into(),
            Token::PointerDisabled => "pd".into(),
            Token::Orientation(Orientation::Clockwise) => "or(cw)".into(),
            Token::Orientation(Orientation::CounterClockwise) => "or(ccw)".into(),
            Token::Direction(d) => format!("dr({})", d.symbol()),
            Token::Boolean(b) => format!("bo({b:?})"),
            Token::Value(bin) => format!("value({bin})"),
        }
    }
}

pub fn direction_id(d: Direction) -> u32 {
    DR_BASE + Direction::ALL.iter().position(|x| *x == d).unwrap_or(0) as u32
}

pub fn boolean_id(b: BooleanOp) -> u32 {
    BO_BASE + BooleanOp::ALL.iter().position(|x| *x == b).unwrap_or(0) as u32
}

pub fn orientation_id(o: Orientation) -> u32 {
    match o {
        Orientation::Clockwise => OR_CW,
        Orientation::CounterClockwise => OR_CCW,
    }
}

/// Vocabulary size for bit width `q`.
pub fn vocab_size(q: u32) -> u64 {
    u64::from(VALUE_BASE) + (1u64 << q)
}
