//! Chamfers and fillets as subtracted cutter solids.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use crate::{Vec2, Vec3};

use super::csg::CsgOp;
use super::exec::ExecConfig;
use super::extrude::{finish, mesh_boolean, prism};
use super::frame::Frame;
use super::mesh::TriangleMesh;
use super::region::{arc_segments, CurveGeom, PlanarRegion, RegionLoop};
use super::solid::{EdgeCurve, Face, Solid, SurfaceTable};
use super::surface::AnalyticSurface;
use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Chamfer,
    Fillet,
}

impl Kind {
    fn too_large(self) -> KernelError {
        match self {
            Kind::Chamfer => KernelError::ChamferTooLarge,
            Kind::Fillet => KernelError::FilletTooLarge,
        }
    }
}

pub fn chamfer(solid: &Solid, edges: &[u64], c: f64, surfaces: &mut SurfaceTable, cfg: &ExecConfig) -> Result<Solid, KernelError> {
    blend(solid, edges, c, Kind::Chamfer, surfaces, cfg)
}

pub fn fillet(solid: &Solid, edges: &[u64], f: f64, surfaces: &mut SurfaceTable, cfg: &ExecConfig) -> Result<Solid, KernelError> {
    blend(solid, edges, f, Kind::Fillet, surfaces, cfg)
}

fn blend(solid: &Solid, edges: &[u64], d: f64, kind: Kind, surfaces: &mut SurfaceTable, cfg: &ExecConfig) -> Result<Solid, KernelError> {
    if !(d > 0.0) {
        return Err(kind.too_large());
    }
    let mut cutters = Vec::new();
    for &id in edges {
        let e = solid.topology.edge(id).ok_or(KernelError::UnsupportedEdge)?;
        let f1 = solid.topology.face(e.faces[0]).ok_or(KernelError::UnsupportedEdge)?;
        let f2 = solid.topology.face(e.faces[1]).ok_or(KernelError::UnsupportedEdge)?;
        let cutter = match (&e.curve, f1.surface.is_plane(), f2.surface.is_plane()) {
            (EdgeCurve::Line { a, b }, true, true) => straight_cutter(solid, a, b, f1, f2, d, kind, surfaces, cfg)?,
            (EdgeCurve::Circle { center, radius, .. }, true, false) => rim_cutter(solid, center, *radius, f1, f2, d, kind, surfaces, cfg)?,
            (EdgeCurve::Circle { center, radius, .. }, false, true) => rim_cutter(solid, center, *radius, f2, f1, d, kind, surfaces, cfg)?,
            _ => return Err(KernelError::UnsupportedEdge),
        };
        cutters.push(cutter);
    }
    let table = Arc::new(surfaces.clone());
    let mut mesh = solid.mesh.clone();
    for c in &cutters {
        mesh = mesh_boolean(&mesh, c, CsgOp::Difference);
        if mesh.is_empty() {
            return Err(KernelError::EmptyResult);
        }
    }
    finish(mesh, table)
}

fn outward(f: &Face) -> Vec3 {
    match f.surface {
        AnalyticSurface::Plane { normal, .. } => normal * f.orientation,
        _ => unreachable!("planar faces only"),
    }
}

fn closest_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Distance from `p` to the triangles of a face.
pub(crate) fn face_distance(mesh: &TriangleMesh, face: &Face, p: &Vec3) -> f64 {
    face.triangles
        .iter()
        .map(|&t| {
            let [a, b, c] = mesh.corners(t as usize);
            (closest_on_triangle(p, &a, &b, &c) - p).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

fn on_face(solid: &Solid, face: &Face, p: &Vec3) -> bool {
    let tol = 1e-7 * solid.mesh.bbox().diagonal().max(1.0);
    face_distance(&solid.mesh, face, p) <= tol
}

/// Direction from the edge into `face`, perpendicular to the edge.
fn inward(solid: &Solid, face: &Face, a: &Vec3, b: &Vec3, n: &Vec3) -> Result<Vec3, KernelError> {
    let e = (b - a).normalize();
    let t = n.cross(&e).normalize();
    let m = (a + b) / 2.0;
    let probe = 1e-6 * (b - a).norm();
    if on_face(solid, face, &(m + t * probe)) {
        Ok(t)
    } else if on_face(solid, face, &(m - t * probe)) {
        Ok(-t)
    } else {
        Err(KernelError::UnsupportedEdge)
    }
}

#[allow(clippy::too_many_arguments)]
fn straight_cutter(
    solid: &Solid,
    a: &Vec3,
    b: &Vec3,
    f1: &Face,
    f2: &Face,
    d: f64,
    kind: Kind,
    surfaces: &mut SurfaceTable,
    cfg: &ExecConfig,
) -> Result<TriangleMesh, KernelError> {
    let (n1, n2) = (outward(f1), outward(f2));
    let t1 = inward(solid, f1, a, b, &n1)?;
    let t2 = inward(solid, f2, a, b, &n2)?;
    if t1.dot(&n2) >= -1e-9 {
        return Err(KernelError::UnsupportedEdge);
    }
    let theta = t1.dot(&t2).clamp(-1.0, 1.0).acos();
    let reach = match kind {
        Kind::Chamfer => d,
        Kind::Fillet => d / (theta / 2.0).tan(),
    };
    let mid = (a + b) / 2.0;
    if !on_face(solid, f1, &(mid + t1 * reach)) || !on_face(solid, f2, &(mid + t2 * reach)) {
        return Err(kind.too_large());
    }
    let m = 2.0 * d;
    // Cross-section offsets from the edge, in a frame with w along the edge.
    let e = (b - a).normalize();
    let frame = Frame { origin: a - e * m, u: n1, v: e.cross(&n1), w: e, scale: 1.0 };
    let to2 = |x: Vec3| Vec2::new(x.dot(&frame.u), x.dot(&frame.v));
    let (p1, p2) = (t1 * reach, t2 * reach);
    let mut pts = vec![to2(p1), to2(p1 + n1 * m), to2((n1 + n2) * m), to2(p2 + n2 * m), to2(p2)];
    let mut curves: Vec<CurveGeom> = (0..pts.len() - 1).map(|i| CurveGeom::Line { a: pts[i], b: pts[i + 1] }).collect();
    let mut edge_curve: Vec<usize> = (0..pts.len() - 1).collect();
    match kind {
        Kind::Chamfer => {
            curves.push(CurveGeom::Line { a: pts[4], b: pts[0] });
            edge_curve.push(curves.len() - 1);
        }
        Kind::Fillet => {
            let bis = (t1 + t2).normalize();
            let c3 = bis * (d / (theta / 2.0).sin());
            let c = to2(c3);
            let (s, t) = (pts[4] - c, pts[0] - c);
            let a0 = s.y.atan2(s.x);
            let mut sweep = t.y.atan2(t.x) - a0;
            while sweep > PI {
                sweep -= TAU;
            }
            while sweep < -PI {
                sweep += TAU;
            }
            let k = arc_segments(sweep.abs().to_degrees(), cfg.tess_segments);
            let ci = curves.len();
            curves.push(CurveGeom::Arc {
                center: c,
                radius: d,
                start: pts[4],
                end: pts[0],
                sweep_deg: sweep.abs().to_degrees(),
                ccw: sweep > 0.0,
            });
            edge_curve.push(ci);
            for j in 1..k {
                let ang = a0 + sweep * j as f64 / k as f64;
                pts.push(c + Vec2::new(ang.cos(), ang.sin()) * d);
                edge_curve.push(ci);
            }
        }
    }
    let mut lp = RegionLoop { points: pts, edge_curve, curves };
    if lp.signed_area() < 0.0 {
        lp.reverse();
    }
    let region = PlanarRegion { loops: vec![lp] };
    prism(&region, &frame, (b - a).norm() + 2.0 * m, 0.0, surfaces)
}

/// Surface of one segment of a revolved profile given in (r, z).
fn revolved_surface(o: &Vec3, k: &Vec3, ref_dir: &Vec3, p: (f64, f64), q: (f64, f64)) -> AnalyticSurface {
    let (r1, z1) = p;
    let (r2, z2) = q;
    if (z1 - z2).abs() < 1e-15 {
        let n = if r2 > r1 { *k } else { -k };
        return AnalyticSurface::Plane { point: o + k * z1, normal: n };
    }
    if (r1 - r2).abs() < 1e-15 {
        return AnalyticSurface::Cylinder { axis_point: *o, axis_dir: *k, radius: r1, ref_dir: *ref_dir };
    }
    let slope = (r2 - r1) / (z2 - z1);
    let apex_z = z1 - r1 / slope;
    let axis_dir = if slope > 0.0 { *k } else { -k };
    AnalyticSurface::Cone { apex: o + k * apex_z, axis_dir, half_angle: slope.abs().atan(), ref_dir: *ref_dir }
}

/// Closed solid sweeping a (r, z) polygon around the axis in `n` phase-aligned
/// steps. `tags[i]` labels the band of segment i → i+1.
fn revolve(o: &Vec3, k: &Vec3, e1: &Vec3, profile: &[(f64, f64)], tags: &[u32], n: usize) -> TriangleMesh {
    let e2 = k.cross(e1);
    let m = profile.len();
    let mut mesh = TriangleMesh::default();
    for j in 0..n {
        let a = TAU * j as f64 / n as f64;
        let dir = e1 * a.cos() + e2 * a.sin();
        for &(r, z) in profile {
            mesh.vertices.push(o + dir * r + k * z);
        }
    }
    let id = |j: usize, i: usize| ((j % n) * m + (i % m)) as u32;
    for j in 0..n {
        for i in 0..m {
            let (a, b, c, d) = (id(j, i), id(j, i + 1), id(j + 1, i + 1), id(j + 1, i));
            mesh.triangles.push([a, b, c]);
            mesh.triangles.push([a, c, d]);
            mesh.tags.push(tags[i]);
            mesh.tags.push(tags[i]);
        }
    }
    if mesh.volume() < 0.0 {
        for t in &mut mesh.triangles {
            t.swap(1, 2);
        }
    }
    mesh
}

#[allow(clippy::too_many_arguments)]
fn rim_cutter(
    solid: &Solid,
    center: &Vec3,
    r: f64,
    cap: &Face,
    wall: &Face,
    d: f64,
    kind: Kind,
    surfaces: &mut SurfaceTable,
    cfg: &ExecConfig,
) -> Result<TriangleMesh, KernelError> {
    let (axis_dir, ref_dir) = match wall.surface {
        AnalyticSurface::Cylinder { axis_dir, ref_dir, .. } => (axis_dir, ref_dir),
        _ => return Err(KernelError::UnsupportedEdge),
    };
    let k = outward(cap);
    if k.dot(&axis_dir).abs() < 1.0 - 1e-9 {
        return Err(KernelError::UnsupportedEdge);
    }
    let e1 = ref_dir;
    let s = wall.orientation;
    let inner = r - s * d;
    if inner <= 1e-9 * r {
        return Err(kind.too_large());
    }
    let m = (2.0 * d).min(0.5 * r);
    let at = |rr: f64, z: f64| center + e1 * rr + k * z;
    if !on_face(solid, cap, &at(inner, 0.0)) || !on_face(solid, wall, &at(r, -d)) {
        return Err(kind.too_large());
    }
    let mut profile = vec![(inner, 0.0), (inner, m), (r + s * m, m), (r + s * m, -d), (r, -d)];
    let mut torus = None;
    if kind == Kind::Fillet {
        let (cr, cz) = (inner, -d);
        let a0 = if s > 0.0 { 0.0 } else { PI };
        let sweep = if s > 0.0 { PI / 2.0 } else { -PI / 2.0 };
        let segs = arc_segments(90.0, cfg.tess_segments);
        for j in 1..segs {
            let a = a0 + sweep * j as f64 / segs as f64;
            profile.push((cr + d * a.cos(), cz + d * a.sin()));
        }
        torus = Some(surfaces.intern(AnalyticSurface::Torus { center: center - k * d, axis_dir: k, major_r: inner, minor_r: d, ref_dir }));
    }
    let n = profile.len();
    let tags: Vec<u32> = (0..n)
        .map(|i| match torus {
            Some(t) if i >= 4 => t,
            _ => surfaces.intern(revolved_surface(center, &k, &ref_dir, profile[i], profile[(i + 1) % n])),
        })
        .collect();
    Ok(revolve(center, &k, &e1, &profile, &tags, cfg.tess_segments))
}
