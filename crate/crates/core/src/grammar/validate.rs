use std::fmt;

use serde::Serialize;

use super::ast::*;
use super::parse::MAX_BLEND_EDGES;

/// Loop closure tolerance in sketch units.
pub const EPS_CLOSE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiagnosticKind {
    EmptyProgram,
    FirstStepNotNew,
    TerminatorMisplaced,
    EmptySketchList,
    EmptyProfileList,
    EmptyProfile,
    EmptyLoop,
    CircleInCompoundLoop,
    ClosureViolation,
    DegeneratePrimitive,
    SweepOutOfRange,
    ScaleOutOfRange,
    NegativeExtent,
    ExtrudeZero,
    NonPositiveParameter,
    EmptyEdgeList,
    TooManyEdges,
    PointerKindMismatch,
    PointerStepMismatch,
    UnknownBasePlane,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}", self.path, self.kind)
    }
}

pub type Diagnostics = Vec<Diagnostic>;

struct Checker {
    out: Diagnostics,
}

impl Checker {
    fn push(&mut self, path: &str, kind: DiagnosticKind) {
        self.out.push(Diagnostic { path: path.to_string(), kind });
    }

    fn finite(&mut self, path: &str, vals: &[f64]) -> bool {
        if vals.iter().all(|v| v.is_finite()) {
            true
        } else {
            self.push(path, DiagnosticKind::NonFinite);
            false
        }
    }

    fn pointer(&mut self, path: &str, r: &EntityRef, step: usize, allowed: &[EntityKind]) {
        if !allowed.contains(&r.kind) {
            self.push(path, DiagnosticKind::PointerKindMismatch);
        }
        if r.step_index as usize != step {
            self.push(path, DiagnosticKind::PointerStepMismatch);
        }
        if r.kind == EntityKind::BasePlane && BasePlane::from_stable_id(r.stable_id).is_none() {
            self.push(path, DiagnosticKind::UnknownBasePlane);
        }
    }

    fn point(&mut self, path: &str, p: &Point2, step: usize) {
        self.finite(path, &[p.x, p.y]);
        if let Some(r) = &p.snap {
            self.pointer(&format!("{path}.snap"), r, step, &[EntityKind::Edge, EntityKind::BasePlane]);
        }
    }

    fn lp(&mut self, path: &str, lp: &Loop, step: usize) {
        if lp.curves.is_empty() {
            self.push(path, DiagnosticKind::EmptyLoop);
            return;
        }
        let has_circle = lp.curves.iter().any(|c| matches!(c, Curve::Circle { .. }));
        if has_circle && lp.curves.len() > 1 {
            self.push(path, DiagnosticKind::CircleInCompoundLoop);
        }
        for (i, c) in lp.curves.iter().enumerate() {
            let cp = format!("{path}.curves[{i}]");
            self.point(&format!("{cp}.{}", if matches!(c, Curve::Circle { .. }) { "center" } else { "start" }), c.anchor(), step);
            match c {
                Curve::Circle { radius, .. } => {
                    if self.finite(&cp, &[*radius]) && *radius <= 0.0 {
                        self.push(&cp, DiagnosticKind::DegeneratePrimitive);
                    }
                }
                Curve::Arc { sweep, .. } => {
                    if self.finite(&cp, &[*sweep]) && !(*sweep > 0.0 && *sweep < 360.0) {
                        self.push(&cp, DiagnosticKind::SweepOutOfRange);
                    }
                }
                Curve::Line { .. } => {}
            }
        }
        if has_circle {
            return;
        }
        // Chained curves: each curve ends where the next begins, so closure
        // fails when a chord collapses or too few distinct points remain.
        let n = lp.curves.len();
        let pts: Vec<(f64, f64)> = lp.curves.iter().map(|c| (c.anchor().x, c.anchor().y)).collect();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            if n > 1 && ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() <= EPS_CLOSE {
                self.push(&format!("{path}.curves[{i}]"), DiagnosticKind::DegeneratePrimitive);
            }
        }
        let arcs = lp.curves.iter().filter(|c| matches!(c, Curve::Arc { .. })).count();
        let closable = match n {
            1 => false,
            2 => arcs >= 1,
            _ => true,
        };
        if !closable {
            self.push(path, DiagnosticKind::ClosureViolation);
        }
    }

    fn step(&mut self, i: usize, step: &Step, last: bool) {
        let path = format!("steps[{i}]");
        let want = if last { Terminator::EndOfModel } else { Terminator::EndOfStep };
        if step.terminator != want {
            self.push(&format!("{path}.terminator"), DiagnosticKind::TerminatorMisplaced);
        }
        match &step.op {
            Operation::Epart { sketches, extrude } => {
                if i == 0 && extrude.op != BooleanOp::New {
                    self.push(&format!("{path}.extrude.op"), DiagnosticKind::FirstStepNotNew);
                }
                if sketches.is_empty() {
                    self.push(&path, DiagnosticKind::EmptySketchList);
                }
                for (s, sk) in sketches.iter().enumerate() {
                    let sp = format!("{path}.sketches[{s}]");
                    self.pointer(&format!("{sp}.plane"), &sk.plane, i, &[EntityKind::Face, EntityKind::BasePlane]);
                    let f = &sk.frame;
                    self.point(&format!("{sp}.frame.origin_hint"), &f.origin_hint, i);
                    if self.finite(&format!("{sp}.frame"), &[f.rotation, f.scale]) && !(f.scale > 0.0 && f.scale <= 1.0) {
                        self.push(&format!("{sp}.frame.scale"), DiagnosticKind::ScaleOutOfRange);
                    }
                    if sk.profiles.is_empty() {
                        self.push(&sp, DiagnosticKind::EmptyProfileList);
                    }
                    for (p, prof) in sk.profiles.iter().enumerate() {
                        let pp = format!("{sp}.profiles[{p}]");
                        if prof.loops.is_empty() {
                            self.push(&pp, DiagnosticKind::EmptyProfile);
                        }
                        for (l, lp) in prof.loops.iter().enumerate() {
                            self.lp(&format!("{pp}.loops[{l}]"), lp, i);
                        }
                    }
                }
                let ep = format!("{path}.extrude");
                if self.finite(&ep, &[extrude.e_p, extrude.e_n]) {
                    if extrude.e_p < 0.0 || extrude.e_n < 0.0 {
                        self.push(&ep, DiagnosticKind::NegativeExtent);
                    } else if extrude.e_p + extrude.e_n <= 0.0 {
                        self.push(&ep, DiagnosticKind::ExtrudeZero);
                    }
                }
            }
            Operation::Chamfer { distance: v, edges } | Operation::Fillet { radius: v, edges } => {
                if i == 0 {
                    self.push(&path, DiagnosticKind::FirstStepNotNew);
                }
                if self.finite(&path, &[*v]) && *v <= 0.0 {
                    self.push(&path, DiagnosticKind::NonPositiveParameter);
                }
                if edges.is_empty() {
                    self.push(&path, DiagnosticKind::EmptyEdgeList);
                }
                if edges.len() > MAX_BLEND_EDGES {
                    self.push(&path, DiagnosticKind::TooManyEdges);
                }
                for (e, r) in edges.iter().enumerate() {
                    self.pointer(&format!("{path}.edges[{e}]"), r, i, &[EntityKind::Edge]);
                }
            }
        }
    }
}

/// Lists every structural violation; an empty list means the program is valid.
pub fn validate(program: &Program) -> Diagnostics {
    let mut c = Checker { out: Vec::new() };
    if program.steps.is_empty() {
        c.push("steps", DiagnosticKind::EmptyProgram);
    }
    let n = program.steps.len();
    for (i, s) in program.steps.iter().enumerate() {
        c.step(i, s, i + 1 == n);
    }
    c.out
}
