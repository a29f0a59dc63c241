//! Shorthand constructors for hand-written programs.

use super::ast::*;

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Loop {
    polygon(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
}

pub fn polygon(pts: &[(f64, f64)]) -> Loop {
    Loop { curves: pts.iter().map(|&(x, y)| Curve::Line { start: Point2::new(x, y) }).collect() }
}

pub fn circle(cx: f64, cy: f64, r: f64) -> Loop {
    Loop { curves: vec![Curve::Circle { center: Point2::new(cx, cy), radius: r }] }
}

pub fn profile(loops: Vec<Loop>) -> Profile {
    Profile { loops }
}

pub fn frame(dr: Direction) -> FrameSpec {
    FrameSpec { dr, origin_hint: Point2::new(0.0, 0.0), rotation: 0.0, scale: 1.0 }
}

pub fn sketch(plane: EntityRef, frame: FrameSpec, profiles: Vec<Profile>) -> Sketch {
    Sketch { plane, frame, profiles }
}

pub fn extrude(sketches: Vec<Sketch>, e_p: f64, e_n: f64, op: BooleanOp) -> Step {
    Step { op: Operation::Epart { sketches, extrude: Extrude { e_p, e_n, op } }, terminator: Terminator::EndOfStep }
}

pub fn chamfer(distance: f64, edges: Vec<EntityRef>) -> Step {
    Step { op: Operation::Chamfer { distance, edges }, terminator: Terminator::EndOfStep }
}

pub fn fillet(radius: f64, edges: Vec<EntityRef>) -> Step {
    Step { op: Operation::Fillet { radius, edges }, terminator: Terminator::EndOfStep }
}

/// Program from steps; the last step ends the model.
pub fn program(mut steps: Vec<Step>) -> Program {
    if let Some(last) = steps.last_mut() {
        last.terminator = Terminator::EndOfModel;
    }
    Program { steps }
}

/// Axis-aligned box on the Top plane, `[x0, x1] × [y0, y1] × [z0, z1]`.
pub fn box_step(step: u32, min: [f64; 3], max: [f64; 3], op: BooleanOp) -> Step {
    let plane = EntityRef::base_plane(step, BasePlane::Top);
    let sk = sketch(plane, frame(Direction::ZPos), vec![profile(vec![rect(min[0], min[1], max[0], max[1])])]);
    extrude(vec![sk], max[2], -min[2], op)
}
