//! Step-by-step program execution.

use std::sync::Arc;

use thiserror::Error;

use crate::codec::{LegacyProgram, LegacySketch, LegacyStep};
use crate::grammar::{BooleanOp, EntityKind, EntityRef, Operation, Point2, Profile, Program};
use crate::{Vec2, Vec3};

use super::blend;
use super::csg::CsgOp;
use super::extrude::{combine, mesh_boolean, prism};
use super::frame::{build_frame, euler_zyx, frame_from_euler, hint_basis, Frame, SketchPlane};
use super::mesh::TriangleMesh;
use super::region::{evaluate_profile, PlanarRegion};
use super::solid::{EdgeCurve, Solid, SurfaceTable};
use super::surface::AnalyticSurface;
use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecConfig {
    /// Segments per full circle.
    pub tess_segments: usize,
    /// Snapped points within this sketch-space distance of a target edge's
    /// endpoint move onto the endpoint.
    pub snap_vertex_radius: f64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self { tess_segments: 64, snap_vertex_radius: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step}: {error}")]
pub struct ExecError {
    pub step: usize,
    pub error: KernelError,
}

/// Everything produced while executing a program.
#[derive(Debug, Clone)]
pub struct Execution {
    /// Solid after each step.
    pub solids: Vec<Solid>,
    /// Frames per step and sketch; empty for chamfer/fillet steps.
    pub frames: Vec<Vec<Frame>>,
    pub regions: Vec<Vec<Vec<PlanarRegion>>>,
    /// The program with snapped coordinates written back.
    pub resolved: Program,
}

impl Execution {
    pub fn final_solid(&self) -> &Solid {
        self.solids.last().expect("executions have at least one step")
    }

    /// Solid that pointers of step `k` resolve against.
    pub fn before(&self, k: usize) -> Solid {
        if k == 0 {
            Solid::empty()
        } else {
            self.solids[k - 1].clone()
        }
    }
}

/// Carrier of a snap target, in world space.
enum Carrier {
    Line { p: Vec3, d: Vec3 },
    Circle { c: Vec3, n: Vec3, r: f64 },
    Polyline(Vec<Vec3>),
}

fn plane_of(solid: &Solid, r: &EntityRef) -> Result<SketchPlane, KernelError> {
    match r.kind {
        EntityKind::BasePlane => crate::grammar::BasePlane::from_stable_id(r.stable_id)
            .map(SketchPlane::base)
            .ok_or(KernelError::PointerResolutionFailed(*r)),
        EntityKind::Face => {
            let f = solid.topology.face(r.stable_id).ok_or(KernelError::PointerResolutionFailed(*r))?;
            match f.surface {
                AnalyticSurface::Plane { point, normal } => Ok(SketchPlane { point, normal }),
                _ => Err(KernelError::NonPlanarSketchTarget),
            }
        }
        EntityKind::Edge => Err(KernelError::PointerResolutionFailed(*r)),
    }
}

fn carrier_of(solid: &Solid, r: &EntityRef, target: &Frame) -> Result<Carrier, KernelError> {
    match r.kind {
        EntityKind::Edge => {
            let e = solid.topology.edge(r.stable_id).ok_or(KernelError::PointerResolutionFailed(*r))?;
            Ok(match &e.curve {
                EdgeCurve::Line { a, b } => Carrier::Line { p: *a, d: b - a },
                EdgeCurve::Circle { center, normal, radius, .. } | EdgeCurve::Arc { center, normal, radius, .. } => {
                    Carrier::Circle { c: *center, n: *normal, r: *radius }
                }
                EdgeCurve::Polyline { points } => Carrier::Polyline(points.clone()),
            })
        }
        EntityKind::BasePlane => {
            let b = crate::grammar::BasePlane::from_stable_id(r.stable_id).ok_or(KernelError::PointerResolutionFailed(*r))?;
            let nb = super::frame::v3(b.normal());
            let d = nb.cross(&target.w);
            if d.norm() < 1e-9 {
                return Err(KernelError::SnapFailure);
            }
            // Point on both planes: nb·x = 0, w·x = w·origin.
            let h = target.w.dot(&target.origin);
            let p = d.cross(&nb) * (h / d.norm_squared());
            Ok(Carrier::Line { p, d })
        }
        EntityKind::Face => Err(KernelError::PointerResolutionFailed(*r)),
    }
}

impl Carrier {
    fn distance(&self, x: &Vec3) -> f64 {
        match self {
            Carrier::Line { p, d } => {
                let w = x - p;
                (w - d * (w.dot(d) / d.norm_squared())).norm()
            }
            Carrier::Circle { c, n, r } => {
                let w = x - c;
                let h = w.dot(n);
                let rho = (w - n * h).norm();
                (h * h + (rho - r) * (rho - r)).sqrt()
            }
            Carrier::Polyline(pts) => pts.iter().map(|p| (p - x).norm()).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Curve endpoints of the solid lying on the carrier; they depend only on the
/// carrier, so every edge of a collinear class attracts to the same set.
fn carrier_vertices(solid: &Solid, carrier: &Carrier) -> Vec<Vec3> {
    let tol = 1e-9 * solid.mesh.bbox().diagonal().max(1.0);
    let mut out: Vec<Vec3> = Vec::new();
    for e in &solid.topology.edges {
        if matches!(e.curve, EdgeCurve::Circle { .. }) {
            continue;
        }
        for t in [0.0, 1.0] {
            let x = e.curve.eval(t).0;
            if carrier.distance(&x) <= tol && !out.iter().any(|y| (y - x).norm() <= tol) {
                out.push(x);
            }
        }
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z)));
    out
}

fn nearest_on_segment(p: &Vec2, a: &Vec2, b: &Vec2) -> Vec2 {
    let d = b - a;
    let l2 = d.norm_squared();
    if l2 == 0.0 {
        return *a;
    }
    a + d * ((p - a).dot(&d) / l2).clamp(0.0, 1.0)
}

/// Nearest point to `p` on the carrier projected along `frame.w`, in frame
/// coordinates, then attracted to nearby endpoints.
fn snap_point(p: &Vec2, carrier: &Carrier, ends: &[Vec3], frame: &Frame, radius: f64) -> Result<Vec2, KernelError> {
    let q = match carrier {
        Carrier::Line { p: a, d } => {
            let a2 = frame.local(a);
            let d2 = frame.local(&(a + d)) - a2;
            let l2 = d2.norm_squared();
            if l2 < 1e-18 {
                return Err(KernelError::SnapFailure);
            }
            a2 + d2 * ((p - a2).dot(&d2) / l2)
        }
        Carrier::Circle { c, n, r } => {
            if n.dot(&frame.w).abs() < 1.0 - 1e-9 {
                return Err(KernelError::SnapFailure);
            }
            let c2 = frame.local(c);
            let off = p - c2;
            if off.norm() < 1e-12 {
                return Err(KernelError::SnapFailure);
            }
            c2 + off.normalize() * (r / frame.scale)
        }
        Carrier::Polyline(pts) => {
            let loc: Vec<Vec2> = pts.iter().map(|x| frame.local(x)).collect();
            loc.windows(2)
                .map(|w| nearest_on_segment(p, &w[0], &w[1]))
                .min_by(|a, b| (a - p).norm_squared().total_cmp(&(b - p).norm_squared()))
                .ok_or(KernelError::SnapFailure)?
        }
    };
    if radius > 0.0 {
        let best = ends
            .iter()
            .map(|e| frame.local(e))
            .map(|e| ((e - q).norm(), e))
            .filter(|(d, _)| *d <= radius)
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((_, e)) = best {
            return Ok(e);
        }
    }
    if !(q.x.is_finite() && q.y.is_finite()) {
        return Err(KernelError::SnapFailure);
    }
    Ok(q)
}

fn snap_with(solid: &Solid, pt: &Point2, frame: &Frame, radius: f64) -> Result<Vec2, KernelError> {
    let r = pt.snap.as_ref().expect("only snapped points are resolved");
    let carrier = carrier_of(solid, r, frame)?;
    let ends = if radius > 0.0 { carrier_vertices(solid, &carrier) } else { Vec::new() };
    snap_point(&Vec2::new(pt.x, pt.y), &carrier, &ends, frame, radius)
}

fn hint_frame(spec: &crate::grammar::FrameSpec) -> Frame {
    let (n, d, e2) = hint_basis(spec.dr);
    Frame { origin: Vec3::zeros(), u: d, v: e2, w: n, scale: 1.0 }
}

struct Sketched {
    frame: Frame,
    regions: Vec<PlanarRegion>,
}

fn sketch_profiles(
    solid: &Solid,
    frame: &Frame,
    profiles: &[Profile],
    cfg: &ExecConfig,
    snap: bool,
) -> Result<(Vec<PlanarRegion>, Vec<Profile>), KernelError> {
    let mut regions = Vec::new();
    let mut resolved = Vec::new();
    for prof in profiles {
        let mut resolve = |p: &Point2| {
            if snap {
                snap_with(solid, p, frame, cfg.snap_vertex_radius)
            } else {
                Ok(Vec2::new(p.x, p.y))
            }
        };
        let (r, rp) = evaluate_profile(prof, cfg.tess_segments, &mut resolve)?;
        regions.push(r);
        resolved.push(rp);
    }
    Ok((regions, resolved))
}

fn union_tool(tool: Option<TriangleMesh>, m: TriangleMesh) -> TriangleMesh {
    match tool {
        None => m,
        Some(t) => mesh_boolean(&t, &m, CsgOp::Union),
    }
}

fn extrude_step(
    prev: &Solid,
    surfaces: &mut SurfaceTable,
    sketches: &[Sketched],
    e_p: f64,
    e_n: f64,
    op: BooleanOp,
) -> Result<Solid, KernelError> {
    let mut tool = None;
    for sk in sketches {
        for r in &sk.regions {
            tool = Some(union_tool(tool, prism(r, &sk.frame, e_p, e_n, surfaces)?));
        }
    }
    let tool = tool.ok_or(KernelError::DegenerateProfile)?;
    if tool.is_empty() {
        return Err(KernelError::DegenerateProfile);
    }
    combine(prev, &tool, op, Arc::new(surfaces.clone()))
}

fn edge_ids(edges: &[EntityRef], solid: &Solid) -> Result<Vec<u64>, KernelError> {
    edges
        .iter()
        .map(|e| match e.kind {
            EntityKind::Edge if solid.topology.edge(e.stable_id).is_some() => Ok(e.stable_id),
            _ => Err(KernelError::PointerResolutionFailed(*e)),
        })
        .collect()
}

/// Executes every step, resolving pointers against the previous solid.
pub fn execute_program(program: &Program, cfg: &ExecConfig) -> Result<Execution, ExecError> {
    let mut surfaces = SurfaceTable::default();
    let mut solids: Vec<Solid> = Vec::new();
    let mut frames = Vec::new();
    let mut regions = Vec::new();
    let mut resolved = program.clone();
    for (k, step) in program.steps.iter().enumerate() {
        let at = |error| ExecError { step: k, error };
        let prev = solids.last().cloned().unwrap_or_else(Solid::empty);
        match &step.op {
            Operation::Epart { sketches, extrude } => {
                let mut done = Vec::new();
                for (si, sk) in sketches.iter().enumerate() {
                    let plane = plane_of(&prev, &sk.plane).map_err(at)?;
                    let hf = hint_frame(&sk.frame);
                    let hint = match sk.frame.origin_hint.snap {
                        Some(_) => snap_with(&prev, &sk.frame.origin_hint, &hf, cfg.snap_vertex_radius).map_err(at)?,
                        None => Vec2::new(sk.frame.origin_hint.x, sk.frame.origin_hint.y),
                    };
                    let frame = build_frame(&plane, &sk.frame, &hint).map_err(at)?;
                    let (rs, ps) = sketch_profiles(&prev, &frame, &sk.profiles, cfg, true).map_err(at)?;
                    if let Operation::Epart { sketches: out, .. } = &mut resolved.steps[k].op {
                        out[si].frame.origin_hint.x = hint.x;
                        out[si].frame.origin_hint.y = hint.y;
                        out[si].profiles = ps;
                    }
                    done.push(Sketched { frame, regions: rs });
                }
                let s = extrude_step(&prev, &mut surfaces, &done, extrude.e_p, extrude.e_n, extrude.op).map_err(at)?;
                frames.push(done.iter().map(|d| d.frame).collect());
                regions.push(done.into_iter().map(|d| d.regions).collect());
                solids.push(s);
            }
            Operation::Chamfer { distance, edges } => {
                let ids = edge_ids(edges, &prev).map_err(at)?;
                let s = blend::chamfer(&prev, &ids, *distance, &mut surfaces, cfg).map_err(at)?;
                frames.push(Vec::new());
                regions.push(Vec::new());
                solids.push(s);
            }
            Operation::Fillet { radius, edges } => {
                let ids = edge_ids(edges, &prev).map_err(at)?;
                let s = blend::fillet(&prev, &ids, *radius, &mut surfaces, cfg).map_err(at)?;
                frames.push(Vec::new());
                regions.push(Vec::new());
                solids.push(s);
            }
        }
    }
    if solids.is_empty() {
        return Err(ExecError { step: 0, error: KernelError::EmptyResult });
    }
    Ok(Execution { solids, frames, regions, resolved })
}

fn scaled(profile: &Profile, s: f64) -> Profile {
    let mut p = profile.clone();
    for lp in &mut p.loops {
        for c in &mut lp.curves {
            match c {
                crate::grammar::Curve::Line { start } | crate::grammar::Curve::Arc { start, .. } => {
                    *start = Point2::new(start.x * s, start.y * s);
                }
                crate::grammar::Curve::Circle { center, radius } => {
                    *center = Point2::new(center.x * s, center.y * s);
                    *radius *= s;
                }
            }
        }
    }
    p
}

/// Absolute-frame form of an executed program.
pub fn to_legacy(program: &Program, exec: &Execution) -> Result<LegacyProgram, KernelError> {
    let mut steps = Vec::new();
    for (k, step) in exec.resolved.steps.iter().enumerate() {
        match &step.op {
            Operation::Epart { sketches, extrude } => {
                let sketches = sketches
                    .iter()
                    .zip(&exec.frames[k])
                    .map(|(sk, f)| LegacySketch {
                        euler_zyx: euler_zyx(f),
                        translation: [f.origin.x, f.origin.y, f.origin.z],
                        profiles: sk.profiles.iter().map(|p| scaled(p, f.scale)).collect(),
                    })
                    .collect();
                steps.push(LegacyStep { sketches, extrude: *extrude, terminator: step.terminator });
            }
            Operation::Chamfer { .. } => return Err(KernelError::UnsupportedOperation("chamfer")),
            Operation::Fillet { .. } => return Err(KernelError::UnsupportedOperation("fillet")),
        }
    }
    debug_assert_eq!(steps.len(), program.steps.len());
    Ok(LegacyProgram { steps })
}

/// Executes an absolute-frame program.
pub fn execute_legacy(program: &LegacyProgram, cfg: &ExecConfig) -> Result<Execution, ExecError> {
    let mut surfaces = SurfaceTable::default();
    let mut solids: Vec<Solid> = Vec::new();
    let mut frames = Vec::new();
    let mut regions = Vec::new();
    for (k, step) in program.steps.iter().enumerate() {
        let at = |error| ExecError { step: k, error };
        let prev = solids.last().cloned().unwrap_or_else(Solid::empty);
        let mut done = Vec::new();
        for sk in &step.sketches {
            let frame = frame_from_euler(sk.euler_zyx, sk.translation);
            let (rs, _) = sketch_profiles(&prev, &frame, &sk.profiles, cfg, false).map_err(at)?;
            done.push(Sketched { frame, regions: rs });
        }
        let s = extrude_step(&prev, &mut surfaces, &done, step.extrude.e_p, step.extrude.e_n, step.extrude.op).map_err(at)?;
        frames.push(done.iter().map(|d| d.frame).collect());
        regions.push(done.into_iter().map(|d| d.regions).collect());
        solids.push(s);
    }
    if solids.is_empty() {
        return Err(ExecError { step: 0, error: KernelError::EmptyResult });
    }
    Ok(Execution { solids, frames, regions, resolved: Program { steps: Vec::new() } })
}
