//! Fixed-size grid samples of faces and edges.

use ndarray::{Array2, Array3};

use crate::Vec3;

use super::solid::{Edge, Face, Solid};
use super::surface::AnalyticSurface;

/// (n, n, 8) with channels (x, y, z, nx, ny, nz, K, vis).
pub type FaceTensor = Array3<f64>;
/// (n, 12) with channels (point, tangent, reversed tangent, derivative).
pub type EdgeTensor = Array2<f64>;

pub const FACE_CHANNELS: usize = 8;
pub const EDGE_CHANNELS: usize = 12;

fn periodic(s: &AnalyticSurface) -> (bool, bool) {
    match s {
        AnalyticSurface::Plane { .. } => (false, false),
        AnalyticSurface::Cylinder { .. } | AnalyticSurface::Cone { .. } => (true, false),
        AnalyticSurface::Torus { .. } => (true, true),
    }
}

fn unwrap(x: f64, reference: f64) -> f64 {
    let mut y = x;
    while y - reference > std::f64::consts::PI {
        y -= std::f64::consts::TAU;
    }
    while reference - y > std::f64::consts::PI {
        y += std::f64::consts::TAU;
    }
    y
}

struct ParamTriangle {
    p: [(f64, f64); 3],
    lo: (f64, f64),
    hi: (f64, f64),
}

impl ParamTriangle {
    fn contains(&self, u: f64, v: f64) -> bool {
        const TOL: f64 = 1e-9;
        if u < self.lo.0 - TOL || u > self.hi.0 + TOL || v < self.lo.1 - TOL || v > self.hi.1 + TOL {
            return false;
        }
        let [a, b, c] = self.p;
        let det = (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1);
        if det.abs() < 1e-300 {
            return false;
        }
        let l1 = ((u - a.0) * (c.1 - a.1) - (c.0 - a.0) * (v - a.1)) / det;
        let l2 = ((b.0 - a.0) * (v - a.1) - (u - a.0) * (b.1 - a.1)) / det;
        l1 >= -TOL && l2 >= -TOL && l1 + l2 <= 1.0 + TOL
    }
}

/// Parametric images of a face's triangles.
fn param_triangles(solid: &Solid, face: &Face) -> Vec<ParamTriangle> {
    let s = &face.surface;
    let (pu, pv) = periodic(s);
    face.triangles
        .iter()
        .map(|&t| {
            let c = solid.mesh.corners(t as usize);
            let mut p = c.map(|x| s.param(&x));
            for k in 1..3 {
                if pu {
                    p[k].0 = unwrap(p[k].0, p[0].0);
                }
                if pv {
                    p[k].1 = unwrap(p[k].1, p[0].1);
                }
            }
            let lo = (p[0].0.min(p[1].0).min(p[2].0), p[0].1.min(p[1].1).min(p[2].1));
            let hi = (p[0].0.max(p[1].0).max(p[2].0), p[0].1.max(p[1].1).max(p[2].1));
            ParamTriangle { p, lo, hi }
        })
        .collect()
}

/// Surface-coordinate domain of a face: planes use the bounding box of the
/// face; rotational surfaces sweep the full turn.
pub fn face_domain(solid: &Solid, face: &Face) -> ((f64, f64), (f64, f64)) {
    let s = &face.surface;
    let (pu, pv) = periodic(s);
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &t in &face.triangles {
        for x in solid.mesh.corners(t as usize) {
            let (u, v) = s.param(&x);
            lo = (lo.0.min(u), lo.1.min(v));
            hi = (hi.0.max(u), hi.1.max(v));
        }
    }
    let tau = std::f64::consts::TAU;
    let u = if pu { (0.0, tau) } else { (lo.0, hi.0) };
    let v = if pv { (0.0, tau) } else { (lo.1, hi.1) };
    (u, v)
}

fn grid(range: (f64, f64), i: usize, n: usize, periodic: bool) -> f64 {
    if periodic {
        range.0 + (range.1 - range.0) * i as f64 / n as f64
    } else if n == 1 {
        (range.0 + range.1) / 2.0
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }
}

pub fn sample_face(solid: &Solid, face: &Face, n: usize) -> FaceTensor {
    let s = face.surface;
    let (pu, pv) = periodic(&s);
    let (du, dv) = face_domain(solid, face);
    let tris = param_triangles(solid, face);
    let mut out = Array3::zeros((n, n, FACE_CHANNELS));
    let tau = std::f64::consts::TAU;
    for i in 0..n {
        let u = grid(du, i, n, pu);
        for j in 0..n {
            let v = grid(dv, j, n, pv);
            let (x, nrm) = s.eval(u, v);
            let nrm = nrm * face.orientation;
            let us: &[f64] = if pu { &[u, u - tau, u + tau] } else { &[u] };
            let vs: &[f64] = if pv { &[v, v - tau, v + tau] } else { &[v] };
            let vis = tris.iter().any(|t| us.iter().any(|&a| vs.iter().any(|&b| t.contains(a, b))));
            let vals = [x.x, x.y, x.z, nrm.x, nrm.y, nrm.z, s.gaussian_curvature(&x), if vis { 1.0 } else { 0.0 }];
            for (c, val) in vals.iter().enumerate() {
                out[[i, j, c]] = *val;
            }
        }
    }
    out
}

pub fn sample_edge(edge: &Edge, n: usize) -> EdgeTensor {
    let mut out = Array2::zeros((n, EDGE_CHANNELS));
    for i in 0..n {
        let t = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
        let (p, d) = edge.curve.eval(t);
        let tan = if d.norm() > 0.0 { d.normalize() } else { Vec3::zeros() };
        let vals = [p, tan, -tan, d];
        for (k, v) in vals.iter().enumerate() {
            for c in 0..3 {
                out[[i, k * 3 + c]] = v[c];
            }
        }
    }
    out
}
