//! Random valid programs whose values sit exactly on the quantization grid,
//! so that encoding at the matching bit width is lossless.

use cadseq_core::codec::NvRange;
use cadseq_core::grammar::{
    validate, BasePlane, BooleanOp, Curve, Direction, EntityKind, EntityRef, Extrude, FrameSpec, Loop, Operation, Orientation, Point2,
    Profile, Program, Sketch, Step, Terminator,
};
use rand::seq::IndexedRandom;
use rand::Rng;

struct Grid {
    range: NvRange,
    max_bin: u32,
}

impl Grid {
    fn t(&self, k: u32) -> f64 {
        f64::from(k) / f64::from(self.max_bin)
    }

    fn coord(&self, k: u32) -> f64 {
        self.range.denormalize(self.t(k))
    }

    fn random_coord(&self, rng: &mut impl Rng) -> f64 {
        self.coord(rng.random_range(0..=self.max_bin))
    }

    /// Positive length no larger than `hi`, so it never widens the range.
    fn random_len(&self, rng: &mut impl Rng) -> f64 {
        loop {
            let v = self.range.denormalize_len(self.t(rng.random_range(1..=self.max_bin)));
            if v <= self.range.hi {
                return v;
            }
        }
    }

    fn random_angle(&self, rng: &mut impl Rng, from: u32) -> f64 {
        self.t(rng.random_range(from..self.max_bin)) * 360.0
    }
}

fn pointer(rng: &mut impl Rng, step: usize, kinds: &[EntityKind]) -> EntityRef {
    let kind = *kinds.choose(rng).expect("kinds");
    let stable_id = match kind {
        EntityKind::BasePlane => BasePlane::ALL.choose(rng).expect("planes").stable_id(),
        _ => rng.random_range(0..1u64 << 40),
    };
    EntityRef { step_index: step as u32, kind, stable_id }
}

fn point(g: &Grid, rng: &mut impl Rng, step: usize) -> Point2 {
    let snap = rng.random_bool(0.3).then(|| pointer(rng, step, &[EntityKind::Edge, EntityKind::BasePlane]));
    Point2 { x: g.random_coord(rng), y: g.random_coord(rng), snap }
}

fn random_loop(g: &Grid, rng: &mut impl Rng, step: usize) -> Loop {
    if rng.random_bool(0.25) {
        return Loop { curves: vec![Curve::Circle { center: point(g, rng, step), radius: g.random_len(rng) }] };
    }
    let n = rng.random_range(3..7);
    let curves = (0..n)
        .map(|_| {
            let start = point(g, rng, step);
            if rng.random_bool(0.3) {
                let orientation = if rng.random_bool(0.5) { Orientation::Clockwise } else { Orientation::CounterClockwise };
                Curve::Arc { start, sweep: g.random_angle(rng, 1), orientation }
            } else {
                Curve::Line { start }
            }
        })
        .collect();
    Loop { curves }
}

fn random_step(g: &Grid, rng: &mut impl Rng, i: usize) -> Step {
    let blend = i > 0 && rng.random_bool(0.25);
    let op = if blend {
        let v = g.random_len(rng);
        let edges = (0..rng.random_range(1..4)).map(|_| pointer(rng, i, &[EntityKind::Edge])).collect();
        if rng.random_bool(0.5) {
            Operation::Chamfer { distance: v, edges }
        } else {
            Operation::Fillet { radius: v, edges }
        }
    } else {
        let sketches = (0..rng.random_range(1..3))
            .map(|_| Sketch {
                plane: pointer(rng, i, &[EntityKind::Face, EntityKind::BasePlane]),
                frame: FrameSpec {
                    dr: *Direction::ALL.choose(rng).expect("dirs"),
                    origin_hint: point(g, rng, i),
                    rotation: g.random_angle(rng, 0),
                    scale: g.t(rng.random_range(1..=g.max_bin)),
                },
                profiles: (0..rng.random_range(1..3))
                    .map(|_| Profile { loops: (0..rng.random_range(1..3)).map(|_| random_loop(g, rng, i)).collect() })
                    .collect(),
            })
            .collect();
        let op = if i == 0 { BooleanOp::New } else { *BooleanOp::ALL.choose(rng).expect("ops") };
        let e_n = if rng.random_bool(0.5) { 0.0 } else { g.random_len(rng) };
        Operation::Epart { sketches, extrude: Extrude { e_p: g.random_len(rng), e_n, op } }
    };
    Step { op, terminator: Terminator::EndOfStep }
}

/// A grammar-valid program whose linear values span `[lo, hi]` exactly and
/// lie on the `q`-bit grid of that range.
pub fn grid_program(rng: &mut impl Rng, q: u32) -> Program {
    let max_bin = ((1u64 << q) - 1) as u32;
    loop {
        let lo = -f64::from(rng.random_range(1..=128u32)) / 64.0;
        let hi = f64::from(rng.random_range(1..=128u32)) / 64.0;
        if hi - lo > hi * f64::from(max_bin) {
            continue;
        }
        let g = Grid { range: NvRange::new(lo, hi), max_bin };
        let n = rng.random_range(1..5);
        let mut steps: Vec<Step> = (0..n).map(|i| random_step(&g, rng, i)).collect();
        steps.last_mut().expect("steps").terminator = Terminator::EndOfModel;
        if let Operation::Epart { sketches, .. } = &mut steps[0].op {
            // pin both ends of the range
            let o = &mut sketches[0].frame.origin_hint;
            o.x = g.coord(0);
            o.y = g.coord(max_bin);
        }
        let p = Program { steps };
        if validate(&p).is_empty() {
            return p;
        }
    }
}
