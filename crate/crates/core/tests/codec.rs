use cadseq_core::codec::quant::{dequantize_value, quantize_value, ValueKind};
use cadseq_core::codec::token::{vocab_size, Token, VALUE_BASE};
use cadseq_core::codec::{decode, encode, QuantConfig};
use cadseq_core::grammar::build::{box_step, program};
use cadseq_core::grammar::BooleanOp;
use proptest::prelude::*;

#[test]
fn vocabulary_sizes() {
    assert_eq!(vocab_size(8), 280);
    assert_eq!(vocab_size(4), 40);
    assert_eq!(VALUE_BASE, 24);
    assert_eq!(Token::from_id(VALUE_BASE + 15, 4).unwrap().notation(), "value(15)");
    assert!(Token::from_id(VALUE_BASE + 16, 4).is_none());
}

/// Boxes whose z interval contains zero.
fn boxes() -> impl Strategy<Value = Vec<([f64; 3], [f64; 3], usize)>> {
    let corner = prop::array::uniform2(-2.0f64..2.0);
    let size = prop::array::uniform2(0.05f64..1.5);
    let z = (0.0f64..1.5, 0.05f64..1.5);
    prop::collection::vec((corner, size, z, 0usize..4), 1..4).prop_map(|v| {
        v.into_iter().map(|(c, s, (zl, zh), op)| ([c[0], c[1], -zl], [c[0] + s[0], c[1] + s[1], zh], op)).collect()
    })
}

proptest! {
    #[test]
    fn quantization_error_within_half_bin(v in 0.0f64..=1.0, q in 1u32..=16) {
        let cfg = QuantConfig::with_q(q);
        let back = dequantize_value(quantize_value(v, &cfg, ValueKind::Nv).unwrap(), &cfg, ValueKind::Nv).unwrap();
        prop_assert!((back - v).abs() <= 0.5 / cfg.max_bin() + 1e-15);
    }

    #[test]
    fn token_ids_round_trip(q in 1u32..=12, frac in 0.0f64..1.0) {
        let id = 1 + (frac * (vocab_size(q) - 1) as f64) as u32;
        let t = Token::from_id(id, q).unwrap();
        prop_assert_eq!(t.id(), id);
    }

    #[test]
    fn encoding_is_idempotent(spec in boxes(), q in 8u32..=12) {
        let steps = spec
            .iter()
            .enumerate()
            .map(|(i, (lo, hi, op))| box_step(i as u32, *lo, *hi, if i == 0 { BooleanOp::New } else { BooleanOp::ALL[*op] }))
            .collect();
        let cfg = QuantConfig::with_q(q);
        let first = encode(&program(steps), &cfg).unwrap();
        let decoded = decode(&first).unwrap();
        let second = encode(&decoded, &cfg).unwrap();
        prop_assert_eq!(&second.tokens, &first.tokens);
        let bin = (first.nv_range.hi - first.nv_range.lo) / cfg.max_bin();
        prop_assert!((second.nv_range.lo - first.nv_range.lo).abs() <= bin);
        prop_assert!((second.nv_range.hi - first.nv_range.hi).abs() <= bin);
    }
}
