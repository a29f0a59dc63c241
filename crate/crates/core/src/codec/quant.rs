use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest and largest supported bit widths.
pub const MIN_Q: u32 = 1;
pub const MAX_Q: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    /// Linear value already normalized to [0, 1].
    Nv,
    /// Angle in degrees.
    Ag,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RangeError {
    #[error("value {value} outside [{lo}, {hi}]")]
    Value { value: f64, lo: f64, hi: f64 },
    #[error("bin {bin} outside [0, {levels})")]
    Bin { bin: u64, levels: u64 },
    #[error("bit width {0} unsupported")]
    BitWidth(u32),
}

/// Affine range used to map linear values to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NvRange {
    pub lo: f64,
    pub hi: f64,
}

impl NvRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Range spanning `values`, widened to unit span when degenerate.
    pub fn spanning(values: impl IntoIterator<Item = f64>) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
            hi = lo + 1.0;
        }
        Self { lo, hi }
    }

    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    pub fn denormalize(&self, t: f64) -> f64 {
        self.lo + t * (self.hi - self.lo)
    }

    /// Magnitudes are measured from zero in units of the span, so that a zero
    /// length stays exactly zero.
    pub fn normalize_len(&self, v: f64) -> f64 {
        v / (self.hi - self.lo)
    }

    pub fn denormalize_len(&self, t: f64) -> f64 {
        t * (self.hi - self.lo)
    }
}

/// How linear values are normalized before quantization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Span of the program's own linear values.
    PerProgram,
    Fixed(NvRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantConfig {
    pub q: u32,
    pub normalization: Normalization,
}

impl Default for QuantConfig {
    fn default() -> Self {
        Self { q: 8, normalization: Normalization::PerProgram }
    }
}

impl QuantConfig {
    pub fn with_q(q: u32) -> Self {
        Self { q, ..Self::default() }
    }

    pub fn levels(&self) -> u64 {
        1u64 << self.q
    }

    /// Largest bin index, `2^q - 1`.
    pub fn max_bin(&self) -> f64 {
        (self.levels() - 1) as f64
    }

    fn check(&self) -> Result<(), RangeError> {
        if (MIN_Q..=MAX_Q).contains(&self.q) {
            Ok(())
        } else {
            Err(RangeError::BitWidth(self.q))
        }
    }
}

/// Maps a value to its bin. Angles wrap at 360 degrees.
pub fn quantize_value(v: f64, cfg: &QuantConfig, kind: ValueKind) -> Result<u32, RangeError> {
    cfg.check()?;
    let norm = match kind {
        ValueKind::Nv => {
            if !(0.0..=1.0).contains(&v) {
                return Err(RangeError::Value { value: v, lo: 0.0, hi: 1.0 });
            }
            v
        }
        ValueKind::Ag => {
            if !(0.0..=360.0).contains(&v) {
                return Err(RangeError::Value { value: v, lo: 0.0, hi: 360.0 });
            }
            v.rem_euclid(360.0) / 360.0
        }
    };
    // f64::round rounds half away from zero.
    Ok((norm * cfg.max_bin()).round() as u32)
}

pub fn dequantize_value(bin: u32, cfg: &QuantConfig, kind: ValueKind) -> Result<f64, RangeError> {
    cfg.check()?;
    if u64::from(bin) >= cfg.levels() {
        return Err(RangeError::Bin { bin: u64::from(bin), levels: cfg.levels() });
    }
    let t = f64::from(bin) / cfg.max_bin();
    Ok(match kind {
        ValueKind::Nv => t,
        ValueKind::Ag => t * 360.0,
    })
}

/// Brings any finite angle into [0, 360).
pub fn wrap_degrees(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}
