use serde::Serialize;

use crate::grammar::{EntityKind, Operation, Program};
use crate::kernel::region::CurveGeom;
use crate::kernel::{EdgeCurve, Execution, Frame, TriangleMesh};
use crate::{Vec2, Vec3};

use super::min_cost_assignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Line,
    Arc,
    Circle,
    Extrusion,
    Chamfer,
    Fillet,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 6] = [
        PrimitiveKind::Line,
        PrimitiveKind::Arc,
        PrimitiveKind::Circle,
        PrimitiveKind::Extrusion,
        PrimitiveKind::Chamfer,
        PrimitiveKind::Fillet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::Line => "line",
            PrimitiveKind::Arc => "arc",
            PrimitiveKind::Circle => "circle",
            PrimitiveKind::Extrusion => "extrusion",
            PrimitiveKind::Chamfer => "chamfer",
            PrimitiveKind::Fillet => "fillet",
        }
    }
}

/// A primitive as a parameter vector in normalized world space. `class`
/// separates variants that never match (e.g. boolean operation types).
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub kind: PrimitiveKind,
    pub class: u8,
    pub params: Vec<f64>,
}

impl Primitive {
    /// Chebyshev distance; infinite across classes.
    pub fn distance(&self, o: &Primitive) -> f64 {
        if self.kind != o.kind || self.class != o.class || self.params.len() != o.params.len() {
            return f64::INFINITY;
        }
        self.params.iter().zip(&o.params).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Maps world space into the unit box of a reference mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub center: Vec3,
    pub scale: f64,
}

impl Normalization {
    pub fn identity() -> Self {
        Self { center: Vec3::zeros(), scale: 1.0 }
    }

    /// Same transform as [`TriangleMesh::normalize_to_unit_box`].
    pub fn of_mesh(mesh: &TriangleMesh) -> Self {
        let b = mesh.bbox();
        let longest = b.extent().max();
        if b.is_empty() || !(longest > 0.0) {
            return Self::identity();
        }
        Self { center: b.center(), scale: 1.0 / longest }
    }

    fn point(&self, p: &Vec3) -> Vec3 {
        (p - self.center) * self.scale
    }

    fn length(&self, l: f64) -> f64 {
        l * self.scale
    }
}

fn sorted_pair(a: Vec3, b: Vec3) -> [Vec3; 2] {
    let key = |p: &Vec3| [p.x, p.y, p.z];
    if key(&a).partial_cmp(&key(&b)) == Some(std::cmp::Ordering::Greater) {
        [b, a]
    } else {
        [a, b]
    }
}

/// Unsigned direction with a fixed sign convention.
fn axis(d: &Vec3) -> Vec3 {
    let k = d.abs().imax();
    if d[k] < 0.0 {
        -d
    } else {
        *d
    }
}

fn flat(vs: &[Vec3]) -> Vec<f64> {
    vs.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
}

fn sketch_primitives(frame: &Frame, g: &CurveGeom, nz: &Normalization, out: &mut Vec<Primitive>) {
    let w = |p: &Vec2| nz.point(&frame.world(p));
    match g {
        CurveGeom::Line { a, b } => {
            let [p, q] = sorted_pair(w(a), w(b));
            out.push(Primitive { kind: PrimitiveKind::Line, class: 0, params: flat(&[p, q]) });
        }
        CurveGeom::Arc { center, radius, start, sweep_deg, ccw, .. } => {
            let d = start - center;
            let a0 = d.y.atan2(d.x);
            let sgn = if *ccw { 1.0 } else { -1.0 };
            let at = |t: f64| {
                let a = a0 + sgn * sweep_deg.to_radians() * t;
                center + Vec2::new(a.cos(), a.sin()) * *radius
            };
            let [p, q] = sorted_pair(w(&at(0.0)), w(&at(1.0)));
            out.push(Primitive { kind: PrimitiveKind::Arc, class: 0, params: flat(&[p, q, w(&at(0.5))]) });
        }
        CurveGeom::Circle { center, radius } => {
            let mut params = flat(&[w(center), axis(&frame.w)]);
            params.push(nz.length(radius * frame.scale));
            out.push(Primitive { kind: PrimitiveKind::Circle, class: 0, params });
        }
    }
}

fn edge_anchor(curve: &EdgeCurve) -> Vec3 {
    match curve {
        EdgeCurve::Circle { center, .. } => *center,
        c => c.eval(0.5).0,
    }
}

/// Every primitive of an executed program, in normalized world space.
pub fn extract_primitives(program: &Program, exec: &Execution, nz: &Normalization) -> Vec<Primitive> {
    let mut out = Vec::new();
    for (k, step) in program.steps.iter().enumerate() {
        match &step.op {
            Operation::Epart { extrude, .. } => {
                for (s, frame) in exec.frames[k].iter().enumerate() {
                    for region in &exec.regions[k][s] {
                        for lp in &region.loops {
                            for g in &lp.curves {
                                sketch_primitives(frame, g, nz, &mut out);
                            }
                        }
                    }
                    let mut params = flat(&[nz.point(&frame.origin), frame.w]);
                    params.extend([nz.length(extrude.e_p), nz.length(extrude.e_n)]);
                    out.push(Primitive { kind: PrimitiveKind::Extrusion, class: extrude.op as u8, params });
                }
            }
            Operation::Chamfer { distance: d, edges } | Operation::Fillet { radius: d, edges } => {
                let kind = if matches!(step.op, Operation::Chamfer { .. }) { PrimitiveKind::Chamfer } else { PrimitiveKind::Fillet };
                let before = exec.before(k);
                for r in edges.iter().filter(|r| r.kind == EntityKind::Edge) {
                    if let Some(e) = before.topology.edge(r.stable_id) {
                        let mut params = flat(&[nz.point(&edge_anchor(&e.curve))]);
                        params.push(nz.length(*d));
                        out.push(Primitive { kind, class: 0, params });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MatchCounts {
    pub true_positives: usize,
    pub predicted: usize,
    pub ground_truth: usize,
}

impl MatchCounts {
    pub fn add(&mut self, o: &MatchCounts) {
        self.true_positives += o.true_positives;
        self.predicted += o.predicted;
        self.ground_truth += o.ground_truth;
    }

    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            1.0
        } else {
            self.true_positives as f64 / self.predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.ground_truth == 0 {
            1.0
        } else {
            self.true_positives as f64 / self.ground_truth as f64
        }
    }

    /// 1 when both sides are empty.
    pub fn f1(&self) -> f64 {
        if self.predicted == 0 && self.ground_truth == 0 {
            return 1.0;
        }
        if self.true_positives == 0 {
            return 0.0;
        }
        let (p, r) = (self.precision(), self.recall());
        2.0 * p * r / (p + r)
    }
}

/// One-to-one matching of the primitives of `kind` that maximizes the number
/// of pairs within `tol`, breaking ties by total distance.
pub fn match_primitives(pred: &[Primitive], gt: &[Primitive], kind: PrimitiveKind, tol: f64) -> MatchCounts {
    let p: Vec<&Primitive> = pred.iter().filter(|x| x.kind == kind).collect();
    let g: Vec<&Primitive> = gt.iter().filter(|x| x.kind == kind).collect();
    // pairs outside tol cost more than any set of pairs inside it
    let miss = 1.0 + (p.len().max(g.len()) as f64) * tol.max(0.0) * 2.0;
    let cost: Vec<Vec<f64>> = p
        .iter()
        .map(|a| {
            g.iter()
                .map(|b| {
                    let d = a.distance(b);
                    if d <= tol {
                        d
                    } else {
                        miss
                    }
                })
                .collect()
        })
        .collect();
    let tp = min_cost_assignment(&cost).into_iter().filter(|&(i, j)| p[i].distance(g[j]) <= tol).count();
    MatchCounts { true_positives: tp, predicted: p.len(), ground_truth: g.len() }
}

pub fn primitive_f1(pred: &[Primitive], gt: &[Primitive], kind: PrimitiveKind, tol: f64) -> f64 {
    match_primitives(pred, gt, kind, tol).f1()
}
