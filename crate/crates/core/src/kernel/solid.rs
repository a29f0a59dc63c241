//! Solids and the face/edge topology derived from triangle tags.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::Vec3;

use super::mesh::{Tag, TriangleMesh, UnionFind};
use super::surface::{json_vec, AnalyticSurface};

/// Tag-indexed carrier surfaces; geometrically identical surfaces share a tag.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurfaceTable {
    list: Vec<AnalyticSurface>,
}

const SAME_TOL: f64 = 1e-9;

fn same_axis(p: &Vec3, d: &Vec3, q: &Vec3, e: &Vec3) -> bool {
    d.dot(e) > 1.0 - 1e-12 && {
        let w = q - p;
        (w - d * w.dot(d)).norm() < SAME_TOL
    }
}

fn same_surface(a: &AnalyticSurface, b: &AnalyticSurface) -> bool {
    use AnalyticSurface::*;
    match (a, b) {
        (Plane { point: p, normal: n }, Plane { point: q, normal: m }) => n.dot(m) > 1.0 - 1e-12 && (q - p).dot(n).abs() < SAME_TOL,
        (
            Cylinder { axis_point: p, axis_dir: d, radius: r, .. },
            Cylinder { axis_point: q, axis_dir: e, radius: s, .. },
        ) => (r - s).abs() < SAME_TOL && same_axis(p, d, q, e),
        (
            Cone { apex: p, axis_dir: d, half_angle: h, .. },
            Cone { apex: q, axis_dir: e, half_angle: g, .. },
        ) => (h - g).abs() < 1e-12 && (p - q).norm() < SAME_TOL && d.dot(e) > 1.0 - 1e-12,
        (
            Torus { center: p, axis_dir: d, major_r: r1, minor_r: r2, .. },
            Torus { center: q, axis_dir: e, major_r: s1, minor_r: s2, .. },
        ) => (r1 - s1).abs() < SAME_TOL && (r2 - s2).abs() < SAME_TOL && (p - q).norm() < SAME_TOL && d.dot(e) > 1.0 - 1e-12,
        _ => false,
    }
}

impl SurfaceTable {
    pub fn intern(&mut self, s: AnalyticSurface) -> Tag {
        if let Some(i) = self.list.iter().position(|t| same_surface(t, &s)) {
            return i as Tag;
        }
        self.list.push(s);
        (self.list.len() - 1) as Tag
    }

    pub fn get(&self, tag: Tag) -> &AnalyticSurface {
        &self.list[tag as usize]
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }
}

/// Parametric curve of a B-rep edge.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeCurve {
    Line { a: Vec3, b: Vec3 },
    Circle { center: Vec3, normal: Vec3, radius: f64, ref_dir: Vec3 },
    /// Counter-clockwise about `normal` from `ref_dir` through `sweep` radians.
    Arc { center: Vec3, normal: Vec3, radius: f64, ref_dir: Vec3, sweep: f64 },
    Polyline { points: Vec<Vec3> },
}

impl EdgeCurve {
    pub fn kind(&self) -> &'static str {
        match self {
            EdgeCurve::Line { .. } => "line",
            EdgeCurve::Circle { .. } => "circle",
            EdgeCurve::Arc { .. } => "arc",
            EdgeCurve::Polyline { .. } => "polyline",
        }
    }

    /// Point and first derivative at `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> (Vec3, Vec3) {
        match self {
            EdgeCurve::Line { a, b } => (a + (b - a) * t, b - a),
            EdgeCurve::Circle { center, normal, radius, ref_dir } => ring(center, normal, *radius, ref_dir, std::f64::consts::TAU, t),
            EdgeCurve::Arc { center, normal, radius, ref_dir, sweep } => ring(center, normal, *radius, ref_dir, *sweep, t),
            EdgeCurve::Polyline { points } => {
                let n = points.len() - 1;
                let s = (t * n as f64).clamp(0.0, n as f64);
                let i = (s.floor() as usize).min(n - 1);
                let d = points[i + 1] - points[i];
                (points[i] + d * (s - i as f64), d * n as f64)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            EdgeCurve::Line { a, b } => json!({"type": "line", "a": json_vec(a), "b": json_vec(b)}),
            EdgeCurve::Circle { center, normal, radius, .. } => {
                json!({"type": "circle", "center": json_vec(center), "normal": json_vec(normal), "radius": radius})
            }
            EdgeCurve::Arc { center, normal, radius, ref_dir, sweep } => json!({
                "type": "arc", "center": json_vec(center), "normal": json_vec(normal), "radius": radius,
                "ref_dir": json_vec(ref_dir), "sweep": sweep
            }),
            EdgeCurve::Polyline { points } => json!({"type": "polyline", "points": points.iter().map(json_vec).collect::<Vec<_>>()}),
        }
    }
}

fn ring(c: &Vec3, n: &Vec3, r: f64, e1: &Vec3, sweep: f64, t: f64) -> (Vec3, Vec3) {
    let e2 = n.cross(e1);
    let a = sweep * t;
    let (s, co) = a.sin_cos();
    (c + (e1 * co + e2 * s) * r, (e2 * co - e1 * s) * (r * sweep))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: u64,
    pub tag: Tag,
    pub surface: AnalyticSurface,
    pub triangles: Vec<u32>,
    pub area: f64,
    /// +1 when the surface normal points out of the solid.
    pub orientation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: u64,
    pub faces: [u64; 2],
    pub curve: EdgeCurve,
    pub points: Vec<Vec3>,
}

/// Faces, edges and the face-adjacency graph of a solid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    pub faces: Vec<Face>,
    pub edges: Vec<Edge>,
    pub adjacency: Vec<(u64, u64)>,
    pub triangle_face: Vec<u64>,
}

impl Topology {
    pub fn face(&self, id: u64) -> Option<&Face> {
        self.faces.binary_search_by_key(&id, |f| f.id).ok().map(|i| &self.faces[i])
    }

    pub fn edge(&self, id: u64) -> Option<&Edge> {
        self.edges.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.edges[i])
    }
}

/// Immutable solid: a closed tagged mesh plus its topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Solid {
    pub mesh: TriangleMesh,
    pub surfaces: Arc<SurfaceTable>,
    pub topology: Topology,
}

pub const REGION_BITS: u32 = 8;
const FACE_BITS: u32 = 28;
const CHAIN_SHIFT: u32 = 56;

fn grid_key(p: &Vec3) -> [i64; 3] {
    [(p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64, (p.z * 1e9).round() as i64]
}

impl Solid {
    pub fn empty() -> Self {
        Self { mesh: TriangleMesh::default(), surfaces: Arc::new(SurfaceTable::default()), topology: Topology::default() }
    }

    pub fn new(mesh: TriangleMesh, surfaces: Arc<SurfaceTable>) -> Self {
        let topology = build_topology(&mesh, &surfaces);
        Self { mesh, surfaces, topology }
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let t = &self.topology;
        json!({
            "faces": t.faces.iter().map(|f| json!({"id": f.id, "tag": f.tag, "surface": f.surface.to_json(), "area": f.area})).collect::<Vec<_>>(),
            "edges": t.edges.iter().map(|e| json!({"id": e.id, "curve": e.curve.to_json(), "faces": e.faces})).collect::<Vec<_>>(),
            "graph": t.adjacency.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
        })
    }
}

fn build_topology(mesh: &TriangleMesh, surfaces: &SurfaceTable) -> Topology {
    let n = mesh.len();
    let mut owner: HashMap<(u32, u32), Vec<usize>> = HashMap::with_capacity(n * 3 / 2);
    for (i, t) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            owner.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut uf = UnionFind::new(n);
    for ts in owner.values() {
        if ts.len() == 2 && mesh.tags[ts[0]] == mesh.tags[ts[1]] {
            uf.union(ts[0], ts[1]);
        }
    }
    let mut comps: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for i in 0..n {
        comps.entry(uf.find(i)).or_default().push(i as u32);
    }
    let mut by_tag: BTreeMap<Tag, Vec<(Vec3, f64, Vec<u32>)>> = BTreeMap::new();
    for tris in comps.into_values() {
        let mut area = 0.0;
        let mut c = Vec3::zeros();
        for &t in &tris {
            let a = mesh.triangle_area(t as usize);
            let [p, q, r] = mesh.corners(t as usize);
            c += (p + q + r) / 3.0 * a;
            area += a;
        }
        let c = if area > 0.0 { c / area } else { mesh.corners(tris[0] as usize)[0] };
        by_tag.entry(mesh.tags[tris[0] as usize]).or_default().push((c, area, tris));
    }
    let mut faces = Vec::new();
    let mut triangle_face = vec![0u64; n];
    for (tag, mut regions) in by_tag {
        regions.sort_by(|a, b| grid_key(&a.0).cmp(&grid_key(&b.0)));
        let surface = *surfaces.get(tag);
        for (r, (_, area, tris)) in regions.into_iter().enumerate() {
            let id = ((tag as u64) << REGION_BITS) | (r as u64).min((1 << REGION_BITS) - 1);
            let mut s = 0.0;
            for &t in &tris {
                triangle_face[t as usize] = id;
                let [p, q, rr] = mesh.corners(t as usize);
                let (_, nrm) = surface.closest(&((p + q + rr) / 3.0));
                s += nrm.dot(&mesh.cross(t as usize));
            }
            faces.push(Face { id, tag, surface, triangles: tris, area, orientation: if s >= 0.0 { 1.0 } else { -1.0 } });
        }
    }
    faces.sort_by_key(|f| f.id);

    // Boundary segments grouped by face pair.
    let mut pairs: BTreeMap<(u64, u64), Vec<(u32, u32)>> = BTreeMap::new();
    let mut keys: Vec<_> = owner.iter().filter(|(_, ts)| ts.len() == 2).collect();
    keys.sort_by_key(|(k, _)| **k);
    for (&(a, b), ts) in keys {
        let (f, g) = (triangle_face[ts[0]], triangle_face[ts[1]]);
        if f != g {
            pairs.entry((f.min(g), f.max(g))).or_default().push((a, b));
        }
    }
    let mut vertex_pairs: HashMap<u32, Vec<(u64, u64)>> = HashMap::new();
    for (k, segs) in &pairs {
        for &(a, b) in segs {
            for v in [a, b] {
                let e = vertex_pairs.entry(v).or_default();
                if !e.contains(k) {
                    e.push(*k);
                }
            }
        }
    }
    let face_of = |id: u64| faces.binary_search_by_key(&id, |f| f.id).map(|i| &faces[i]).ok();
    let mut edges = Vec::new();
    let mut adjacency = Vec::new();
    for (&(f, g), segs) in &pairs {
        adjacency.push((f, g));
        let (sf, sg) = (face_of(f).unwrap().surface, face_of(g).unwrap().surface);
        let both_planes = sf.is_plane() && sg.is_plane();
        let mut chains = chains_of(segs, &mesh.vertices, |v| vertex_pairs[&v].len() > 1, both_planes);
        chains.sort_by(|a, b| {
            let ka = a.iter().map(|&v| grid_key(&mesh.vertices[v as usize])).min();
            let kb = b.iter().map(|&v| grid_key(&mesh.vertices[v as usize])).min();
            ka.cmp(&kb)
        });
        for (ci, chain) in chains.into_iter().enumerate() {
            let pts: Vec<Vec3> = chain.iter().map(|&v| mesh.vertices[v as usize]).collect();
            let curve = classify(&pts, &sf, &sg);
            let id = ((ci as u64).min(255) << CHAIN_SHIFT) | (f.min((1 << FACE_BITS) - 1) << FACE_BITS) | g.min((1 << FACE_BITS) - 1);
            edges.push(Edge { id, faces: [f, g], curve, points: pts });
        }
    }
    edges.sort_by_key(|e| e.id);
    Topology { faces, edges, adjacency, triangle_face }
}

/// Splits boundary segments into maximal chains; closed chains repeat their
/// first vertex at the end.
fn chains_of(segs: &[(u32, u32)], verts: &[Vec3], corner: impl Fn(u32) -> bool, split_turns: bool) -> Vec<Vec<u32>> {
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &(a, b) in segs {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let turn = |a: u32, b: u32, c: u32| {
        let (p, q, r) = (verts[a as usize], verts[b as usize], verts[c as usize]);
        let (d1, d2) = (q - p, r - q);
        d1.cross(&d2).norm() > 1e-9 * d1.norm() * d2.norm()
    };
    let is_break = |v: u32| {
        let nb = &adj[&v];
        nb.len() != 2 || corner(v) || (split_turns && turn(nb[0], v, nb[1]))
    };
    let mut used: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
    let mut out = Vec::new();
    let starts: Vec<u32> = adj.keys().copied().filter(|&v| is_break(v)).collect();
    let walk = |start: u32, next: u32, used: &mut std::collections::HashSet<(u32, u32)>| {
        let mut chain = vec![start];
        let (mut prev, mut cur) = (start, next);
        used.insert((prev.min(cur), prev.max(cur)));
        loop {
            chain.push(cur);
            if cur == start || is_break(cur) {
                break;
            }
            let nxt = adj[&cur].iter().copied().find(|&w| w != prev && !used.contains(&(cur.min(w), cur.max(w))));
            match nxt {
                Some(w) => {
                    used.insert((cur.min(w), cur.max(w)));
                    prev = cur;
                    cur = w;
                }
                None => break,
            }
        }
        chain
    };
    for &s in &starts {
        for &nb in &adj[&s].clone() {
            if !used.contains(&(s.min(nb), s.max(nb))) {
                out.push(walk(s, nb, &mut used));
            }
        }
    }
    // Remaining closed loops without break vertices.
    let rest: Vec<u32> = adj.keys().copied().collect();
    for s in rest {
        let mut nbs = adj[&s].clone();
        nbs.sort_by(|a, b| grid_key(&verts[*a as usize]).cmp(&grid_key(&verts[*b as usize])));
        for nb in nbs {
            if !used.contains(&(s.min(nb), s.max(nb))) {
                out.push(walk(s, nb, &mut used));
            }
        }
    }
    out
}

fn classify(pts: &[Vec3], a: &AnalyticSurface, b: &AnalyticSurface) -> EdgeCurve {
    let closed = pts.len() > 2 && pts.first() == pts.last();
    if a.is_plane() && b.is_plane() && !closed {
        return EdgeCurve::Line { a: pts[0], b: *pts.last().unwrap() };
    }
    let (plane, rot) = match (a, b) {
        (AnalyticSurface::Plane { normal, point }, r) | (r, AnalyticSurface::Plane { normal, point }) if !r.is_plane() => ((point, normal), r),
        _ => return EdgeCurve::Polyline { points: pts.to_vec() },
    };
    let (axis_p, axis_d) = rot.axis().unwrap();
    if axis_d.dot(plane.1).abs() < 1.0 - 1e-9 {
        return EdgeCurve::Polyline { points: pts.to_vec() };
    }
    let t = (plane.0 - axis_p).dot(plane.1) / axis_d.dot(plane.1);
    let center = axis_p + axis_d * t;
    let radius = pts.iter().map(|p| (p - center).norm()).sum::<f64>() / pts.len() as f64;
    let ref_rot = match *rot {
        AnalyticSurface::Cylinder { ref_dir, .. } | AnalyticSurface::Cone { ref_dir, .. } | AnalyticSurface::Torus { ref_dir, .. } => ref_dir,
        AnalyticSurface::Plane { .. } => unreachable!(),
    };
    if closed {
        return EdgeCurve::Circle { center, normal: axis_d, radius, ref_dir: ref_rot };
    }
    // Orient the arc counter-clockwise about the axis.
    let ang = |p: &Vec3| {
        let d = p - center;
        let e2 = axis_d.cross(&ref_rot);
        d.dot(&e2).atan2(d.dot(&ref_rot))
    };
    let mut total = 0.0;
    for w in pts.windows(2) {
        let mut d = ang(&w[1]) - ang(&w[0]);
        if d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        } else if d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        total += d;
    }
    let start = if total >= 0.0 { pts[0] } else { *pts.last().unwrap() };
    EdgeCurve::Arc { center, normal: axis_d, radius, ref_dir: (start - center).normalize(), sweep: total.abs() }
}
