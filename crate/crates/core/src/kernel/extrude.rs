//! Prisms from planar regions and boolean combination with a solid.

use std::sync::Arc;

use crate::grammar::BooleanOp;

use super::csg::{boolean, mesh_to_polygons, polygons_to_mesh, CsgOp, Polygon};
use super::frame::Frame;
use super::mesh::TriangleMesh;
use super::region::{CurveGeom, PlanarRegion};
use super::solid::{Solid, SurfaceTable};
use super::surface::AnalyticSurface;
use super::triangulate::triangulate;
use super::KernelError;

/// Closed prism swept from `−e_n·w` to `+e_p·w`.
pub fn prism(region: &PlanarRegion, frame: &Frame, e_p: f64, e_n: f64, surfaces: &mut SurfaceTable) -> Result<TriangleMesh, KernelError> {
    if !(e_p + e_n > 0.0) {
        return Err(KernelError::ExtrudeZero);
    }
    let (z0, z1) = (-e_n, e_p);
    let mut flat = Vec::new();
    for l in &region.loops {
        flat.extend(l.points.iter().copied());
    }
    let m = flat.len() as u32;
    let mut mesh = TriangleMesh::default();
    mesh.vertices.extend(flat.iter().map(|p| frame.world_at(p, z0)));
    mesh.vertices.extend(flat.iter().map(|p| frame.world_at(p, z1)));

    let bottom = surfaces.intern(AnalyticSurface::Plane { point: frame.origin + frame.w * z0, normal: -frame.w });
    let top = surfaces.intern(AnalyticSurface::Plane { point: frame.origin + frame.w * z1, normal: frame.w });
    let holes: Vec<Vec<_>> = region.holes().iter().map(|h| h.points.clone()).collect();
    let tris = triangulate(&region.outer().points, &holes);
    if tris.is_empty() {
        return Err(KernelError::DegenerateProfile);
    }
    for t in &tris {
        let [a, b, c] = t.map(|i| i as u32);
        mesh.triangles.push([c, b, a]);
        mesh.tags.push(bottom);
        mesh.triangles.push([a + m, b + m, c + m]);
        mesh.tags.push(top);
    }

    let mut base = 0u32;
    for l in &region.loops {
        let n = l.points.len() as u32;
        let wall_tags: Vec<_> = l
            .curves
            .iter()
            .enumerate()
            .map(|(ci, g)| match *g {
                CurveGeom::Line { .. } => {
                    let i = l.edge_curve.iter().position(|&c| c == ci).unwrap();
                    let a = frame.world(&l.points[i]);
                    let b = frame.world(&l.points[(i + 1) % l.points.len()]);
                    let normal = (b - a).cross(&frame.w).normalize();
                    surfaces.intern(AnalyticSurface::Plane { point: a, normal })
                }
                CurveGeom::Arc { center, radius, start, .. } => {
                    let d = frame.world(&start) - frame.world(&center);
                    surfaces.intern(AnalyticSurface::Cylinder {
                        axis_point: frame.world(&center),
                        axis_dir: frame.w,
                        radius: radius * frame.scale,
                        ref_dir: d.normalize(),
                    })
                }
                CurveGeom::Circle { center, radius } => surfaces.intern(AnalyticSurface::Cylinder {
                    axis_point: frame.world(&center),
                    axis_dir: frame.w,
                    radius: radius * frame.scale,
                    ref_dir: frame.u,
                }),
            })
            .collect();
        for i in 0..n {
            let j = (i + 1) % n;
            let (b0, b1, t0, t1) = (base + i, base + j, base + i + m, base + j + m);
            let tag = wall_tags[l.edge_curve[i as usize]];
            mesh.triangles.push([b0, b1, t1]);
            mesh.tags.push(tag);
            mesh.triangles.push([b0, t1, t0]);
            mesh.tags.push(tag);
        }
        base += n;
    }
    Ok(mesh)
}

fn csg_op(op: BooleanOp) -> CsgOp {
    match op {
        BooleanOp::New | BooleanOp::Join => CsgOp::Union,
        BooleanOp::Cut => CsgOp::Difference,
        BooleanOp::Intersect => CsgOp::Intersection,
    }
}

/// Tolerances scaled to the size of the operands.
pub(crate) fn tolerances(a: &TriangleMesh, b: &TriangleMesh) -> (f64, f64) {
    let d = a.bbox().union(&b.bbox()).diagonal().max(1e-3);
    (1e-9 * d, 1e-8 * d)
}

/// Combines `tool` with `solid`.
pub fn combine(solid: &Solid, tool: &TriangleMesh, op: BooleanOp, surfaces: Arc<SurfaceTable>) -> Result<Solid, KernelError> {
    let mesh = if solid.is_empty() {
        match op {
            BooleanOp::New | BooleanOp::Join => tool.clone(),
            BooleanOp::Cut | BooleanOp::Intersect => return Err(KernelError::EmptyResult),
        }
    } else {
        mesh_boolean(&solid.mesh, tool, csg_op(op))
    };
    finish(mesh, surfaces)
}

pub(crate) fn mesh_boolean(a: &TriangleMesh, b: &TriangleMesh, op: CsgOp) -> TriangleMesh {
    let (eps, tol) = tolerances(a, b);
    let pa: Vec<Polygon> = mesh_to_polygons(a);
    let pb: Vec<Polygon> = mesh_to_polygons(b);
    polygons_to_mesh(&boolean(&pa, &pb, op, eps), tol)
}

pub(crate) fn finish(mesh: TriangleMesh, surfaces: Arc<SurfaceTable>) -> Result<Solid, KernelError> {
    if mesh.is_empty() || !(mesh.volume() > 0.0) {
        return Err(KernelError::EmptyResult);
    }
    mesh.check_manifold().map_err(KernelError::NonManifoldResult)?;
    Ok(Solid::new(mesh, surfaces))
}
