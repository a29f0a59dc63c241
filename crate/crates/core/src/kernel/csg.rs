//! Mesh booleans on convex polygons through BSP classification trees,
//! followed by welding, T-junction repair and triangulation.

use std::collections::HashMap;

use crate::Vec3;

use super::mesh::{Aabb, Tag, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Plane {
    pub n: Vec3,
    pub w: f64,
}

impl Plane {
    /// Newell normal through the centroid.
    pub fn from_points(pts: &[Vec3]) -> Option<Plane> {
        let mut n = Vec3::zeros();
        let mut c = Vec3::zeros();
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            n.x += (a.y - b.y) * (a.z + b.z);
            n.y += (a.z - b.z) * (a.x + b.x);
            n.z += (a.x - b.x) * (a.y + b.y);
            c += a;
        }
        let len = n.norm();
        if !(len > 0.0) || !len.is_finite() {
            return None;
        }
        let n = n / len;
        let c = c / pts.len() as f64;
        Some(Plane { n, w: n.dot(&c) })
    }

    pub fn flipped(self) -> Plane {
        Plane { n: -self.n, w: -self.w }
    }

    pub fn dist(&self, p: &Vec3) -> f64 {
        self.n.dot(p) - self.w
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Polygon {
    pub verts: Vec<Vec3>,
    pub plane: Plane,
    pub tag: Tag,
    pub origin: u32,
}

impl Polygon {
    pub fn new(verts: Vec<Vec3>, tag: Tag) -> Option<Polygon> {
        let plane = Plane::from_points(&verts)?;
        Some(Polygon { verts, plane, tag, origin: 0 })
    }

    pub fn flip(&mut self) {
        self.verts.reverse();
        self.plane = self.plane.flipped();
    }

    pub fn flipped(mut self) -> Polygon {
        self.flip();
        self
    }

    pub fn area(&self) -> f64 {
        let mut s = Vec3::zeros();
        let a = self.verts[0];
        for i in 1..self.verts.len() - 1 {
            s += (self.verts[i] - a).cross(&(self.verts[i + 1] - a));
        }
        0.5 * s.norm()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.verts)
    }
}

enum Split {
    CoplanarFront(Polygon),
    CoplanarBack(Polygon),
    Front(Polygon),
    Back(Polygon),
    Spanning(Option<Polygon>, Option<Polygon>),
}

fn lex_less(a: &Vec3, b: &Vec3) -> bool {
    (a.x, a.y, a.z) < (b.x, b.y, b.z)
}

const COPLANAR: u8 = 0;
const FRONT: u8 = 1;
const BACK: u8 = 2;

fn split(plane: &Plane, poly: Polygon, eps: f64) -> Split {
    let mut kind = COPLANAR;
    let types: Vec<u8> = poly
        .verts
        .iter()
        .map(|v| {
            let d = plane.dist(v);
            let t = if d < -eps {
                BACK
            } else if d > eps {
                FRONT
            } else {
                COPLANAR
            };
            kind |= t;
            t
        })
        .collect();
    match kind {
        COPLANAR => {
            if plane.n.dot(&poly.plane.n) > 0.0 {
                Split::CoplanarFront(poly)
            } else {
                Split::CoplanarBack(poly)
            }
        }
        FRONT => Split::Front(poly),
        BACK => Split::Back(poly),
        _ => {
            let n = poly.verts.len();
            let mut f = Vec::with_capacity(n + 1);
            let mut b = Vec::with_capacity(n + 1);
            for i in 0..n {
                let j = (i + 1) % n;
                let (ti, tj) = (types[i], types[j]);
                let (vi, vj) = (poly.verts[i], poly.verts[j]);
                if ti != BACK {
                    f.push(vi);
                }
                if ti != FRONT {
                    b.push(vi);
                }
                if ti | tj == FRONT | BACK {
                    // Same point whichever way the edge is traversed.
                    let (p, q) = if lex_less(&vi, &vj) { (vi, vj) } else { (vj, vi) };
                    let t = (plane.w - plane.n.dot(&p)) / plane.n.dot(&(q - p));
                    let v = p + (q - p) * t;
                    f.push(v);
                    b.push(v);
                }
            }
            let mk = |verts: Vec<Vec3>| {
                (verts.len() >= 3).then(|| Polygon { verts, plane: poly.plane, tag: poly.tag, origin: poly.origin })
            };
            Split::Spanning(mk(f), mk(b))
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    plane: Plane,
    front: Option<u32>,
    back: Option<u32>,
}

/// Solid-classification BSP tree. Front is outside, back is inside.
#[derive(Debug, Clone, Default)]
pub(crate) struct Bsp {
    nodes: Vec<Node>,
    eps: f64,
}

impl Bsp {
    pub fn build(polys: &[Polygon], eps: f64) -> Bsp {
        let mut bsp = Bsp { nodes: Vec::new(), eps };
        if polys.is_empty() {
            return bsp;
        }
        bsp.nodes.push(Node { plane: polys[0].plane, front: None, back: None });
        let mut stack = vec![(0usize, polys.to_vec())];
        while let Some((ni, ps)) = stack.pop() {
            let plane = bsp.nodes[ni].plane;
            let (mut f, mut b) = (Vec::new(), Vec::new());
            for p in ps {
                match split(&plane, p, eps) {
                    Split::CoplanarFront(_) | Split::CoplanarBack(_) => {}
                    Split::Front(p) => f.push(p),
                    Split::Back(p) => b.push(p),
                    Split::Spanning(x, y) => {
                        f.extend(x);
                        b.extend(y);
                    }
                }
            }
            if !f.is_empty() {
                let c = bsp.nodes.len();
                bsp.nodes.push(Node { plane: f[0].plane, front: None, back: None });
                bsp.nodes[ni].front = Some(c as u32);
                stack.push((c, f));
            }
            if !b.is_empty() {
                let c = bsp.nodes.len();
                bsp.nodes.push(Node { plane: b[0].plane, front: None, back: None });
                bsp.nodes[ni].back = Some(c as u32);
                stack.push((c, b));
            }
        }
        bsp
    }

    pub fn inverted(&self) -> Bsp {
        let nodes = self
            .nodes
            .iter()
            .map(|n| Node { plane: n.plane.flipped(), front: n.back, back: n.front })
            .collect();
        Bsp { nodes, eps: self.eps }
    }

    /// Keeps the parts of `polys` outside the solid; coplanar pieces survive
    /// when they face the same way as the splitting plane.
    pub fn clip(&self, polys: Vec<Polygon>) -> Vec<Polygon> {
        if self.nodes.is_empty() {
            return polys;
        }
        let mut out = Vec::new();
        let mut stack = vec![(0usize, polys)];
        while let Some((ni, ps)) = stack.pop() {
            let node = self.nodes[ni];
            let (mut f, mut b) = (Vec::new(), Vec::new());
            for p in ps {
                match split(&node.plane, p, self.eps) {
                    Split::CoplanarFront(p) | Split::Front(p) => f.push(p),
                    Split::CoplanarBack(p) | Split::Back(p) => b.push(p),
                    Split::Spanning(x, y) => {
                        f.extend(x);
                        b.extend(y);
                    }
                }
            }
            match node.front {
                Some(c) => stack.push((c as usize, f)),
                None => out.extend(f),
            }
            if let Some(c) = node.back {
                stack.push((c as usize, b));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CsgOp {
    Union,
    Difference,
    Intersection,
}

fn invert_all(ps: Vec<Polygon>) -> Vec<Polygon> {
    ps.into_iter().map(Polygon::flipped).collect()
}

fn bounds(ps: &[Polygon]) -> Aabb {
    ps.iter().fold(Aabb::empty(), |b, p| b.union(&p.aabb()))
}

/// Boolean of two closed polygon soups.
pub(crate) fn boolean(a: &[Polygon], b: &[Polygon], op: CsgOp, eps: f64) -> Vec<Polygon> {
    let mut a: Vec<Polygon> = a.to_vec();
    let mut b: Vec<Polygon> = b.to_vec();
    for (i, p) in a.iter_mut().enumerate() {
        p.origin = i as u32;
    }
    let na = a.len() as u32;
    for (i, p) in b.iter_mut().enumerate() {
        p.origin = na + i as u32;
    }
    let originals: Vec<Polygon> = a.iter().chain(b.iter()).cloned().collect();
    let (ba, bb) = (bounds(&a), bounds(&b));
    let slack = 4.0 * eps;
    let (near_a, far_a): (Vec<_>, Vec<_>) = a.iter().cloned().partition(|p| p.aabb().overlaps(&bb, slack));
    let (near_b, far_b): (Vec<_>, Vec<_>) = b.iter().cloned().partition(|p| p.aabb().overlaps(&ba, slack));
    let ta = Bsp::build(&a, eps);
    let tb = Bsp::build(&b, eps);
    let mut out = Vec::new();
    match op {
        CsgOp::Union => {
            let a1 = tb.clip(near_a);
            let b1 = ta.clip(near_b);
            let b2 = invert_all(ta.clip(invert_all(b1)));
            out.extend(far_a);
            out.extend(a1);
            out.extend(far_b);
            out.extend(b2);
        }
        CsgOp::Difference => {
            let ta_inv = ta.inverted();
            let a1 = invert_all(tb.clip(invert_all(near_a)));
            let b1 = ta_inv.clip(near_b);
            let b2 = ta_inv.clip(invert_all(b1));
            out.extend(far_a);
            out.extend(a1);
            out.extend(b2);
        }
        CsgOp::Intersection => {
            let ta_inv = ta.inverted();
            let tb_inv = tb.inverted();
            let a1 = tb_inv.clip(invert_all(near_a));
            let b2 = ta_inv.clip(invert_all(ta_inv.clip(near_b)));
            out.extend(invert_all(a1));
            out.extend(invert_all(b2));
        }
    }
    restore_whole(out, &originals)
}

/// Replaces the fragments of a polygon that survived intact by the polygon.
fn restore_whole(pieces: Vec<Polygon>, originals: &[Polygon]) -> Vec<Polygon> {
    let mut groups: HashMap<u32, Vec<Polygon>> = HashMap::new();
    let mut order = Vec::new();
    for p in pieces {
        let g = groups.entry(p.origin).or_default();
        if g.is_empty() {
            order.push(p.origin);
        }
        g.push(p);
    }
    let mut out = Vec::new();
    for o in order {
        let g = groups.remove(&o).unwrap();
        let orig = &originals[o as usize];
        let same_side = g.iter().all(|p| p.plane.n.dot(&g[0].plane.n) > 0.0);
        let total: f64 = g.iter().map(Polygon::area).sum();
        if g.len() > 1 && same_side && total >= orig.area() * (1.0 - 1e-9) {
            let mut whole = orig.clone();
            if whole.plane.n.dot(&g[0].plane.n) < 0.0 {
                whole.flip();
            }
            out.push(whole);
        } else {
            out.extend(g);
        }
    }
    out
}

pub(crate) fn mesh_to_polygons(mesh: &TriangleMesh) -> Vec<Polygon> {
    (0..mesh.len())
        .filter_map(|t| Polygon::new(mesh.corners(t).to_vec(), mesh.tags[t]))
        .collect()
}

struct Welder {
    tol: f64,
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
    verts: Vec<Vec3>,
}

impl Welder {
    fn new(tol: f64) -> Self {
        Self { tol, cells: HashMap::new(), verts: Vec::new() }
    }

    fn key(&self, p: &Vec3) -> (i64, i64, i64) {
        let s = 1.0 / self.tol;
        ((p.x * s).floor() as i64, (p.y * s).floor() as i64, (p.z * s).floor() as i64)
    }

    fn index(&mut self, p: &Vec3) -> u32 {
        let (kx, ky, kz) = self.key(p);
        let mut best: Option<(f64, u32)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.cells.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &i in ids {
                            let d = (self.verts[i as usize] - p).norm();
                            if d <= self.tol && best.map_or(true, |(bd, bi)| d < bd || (d == bd && i < bi)) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
        }
        if let Some((_, i)) = best {
            return i;
        }
        let i = self.verts.len() as u32;
        self.verts.push(*p);
        self.cells.entry((kx, ky, kz)).or_default().push(i);
        i
    }
}

/// Welds, repairs T-junctions and triangulates a closed polygon soup.
pub(crate) fn polygons_to_mesh(polys: &[Polygon], tol: f64) -> TriangleMesh {
    let mut welder = Welder::new(tol);
    let mut faces: Vec<(Vec<u32>, Tag)> = Vec::with_capacity(polys.len());
    for p in polys {
        let mut idx: Vec<u32> = Vec::with_capacity(p.verts.len());
        for v in &p.verts {
            let i = welder.index(v);
            if idx.last() != Some(&i) {
                idx.push(i);
            }
        }
        while idx.len() > 1 && idx.first() == idx.last() {
            idx.pop();
        }
        if idx.len() >= 3 {
            faces.push((idx, p.tag));
        }
    }
    let verts = welder.verts;
    repair_t_junctions(&verts, &mut faces, tol);
    triangulate_faces(verts, &faces, tol)
}

fn repair_t_junctions(verts: &[Vec3], faces: &mut [(Vec<u32>, Tag)], tol: f64) {
    for _ in 0..8 {
        let mut he: HashMap<(u32, u32), i32> = HashMap::new();
        for (f, _) in faces.iter() {
            for k in 0..f.len() {
                *he.entry((f[k], f[(k + 1) % f.len()])).or_insert(0) += 1;
            }
        }
        let unmatched = |a: u32, b: u32| he.get(&(b, a)).copied().unwrap_or(0) < he[&(a, b)];
        let mut used = vec![false; verts.len()];
        for (f, _) in faces.iter() {
            for &i in f {
                used[i as usize] = true;
            }
        }
        let live: Vec<u32> = (0..verts.len() as u32).filter(|&i| used[i as usize]).collect();
        let mut changed = false;
        for (f, _) in faces.iter_mut() {
            let n = f.len();
            let mut out = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = (f[k], f[(k + 1) % n]);
                out.push(a);
                if !unmatched(a, b) {
                    continue;
                }
                let (pa, pb) = (verts[a as usize], verts[b as usize]);
                let d = pb - pa;
                let len2 = d.norm_squared();
                if len2 == 0.0 {
                    continue;
                }
                let bb = Aabb { min: pa.inf(&pb), max: pa.sup(&pb) };
                let mut hits: Vec<(f64, u32)> = Vec::new();
                for &v in &live {
                    if v == a || v == b || f.contains(&v) {
                        continue;
                    }
                    let p = verts[v as usize];
                    if (0..3).any(|k| p[k] < bb.min[k] - tol || p[k] > bb.max[k] + tol) {
                        continue;
                    }
                    let t = (p - pa).dot(&d) / len2;
                    if t <= 0.0 || t >= 1.0 {
                        continue;
                    }
                    if (pa + d * t - p).norm() <= tol && (p - pa).norm() > tol && (p - pb).norm() > tol {
                        hits.push((t, v));
                    }
                }
                if !hits.is_empty() {
                    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
                    out.extend(hits.iter().map(|h| h.1));
                    changed = true;
                }
            }
            *f = out;
        }
        if !changed {
            break;
        }
    }
}

fn triangulate_faces(mut verts: Vec<Vec3>, faces: &[(Vec<u32>, Tag)], tol: f64) -> TriangleMesh {
    let mut mesh = TriangleMesh::default();
    for (f, tag) in faces {
        let n = f.len();
        let p = |i: usize| verts[f[i % n] as usize];
        let flat: Vec<bool> = (0..n)
            .map(|i| {
                let (a, b, c) = (p(i + n - 1), p(i), p(i + 1));
                let chord = (c - a).norm();
                chord == 0.0 || (b - a).cross(&(c - a)).norm() <= tol * chord
            })
            .collect();
        if n == 3 {
            mesh.triangles.push([f[0], f[1], f[2]]);
            mesh.tags.push(*tag);
            continue;
        }
        let apex = (0..n).find(|&i| !flat[i] && !flat[(i + 1) % n] && !flat[(i + n - 1) % n]);
        match apex {
            Some(s) => {
                for k in 1..n - 1 {
                    mesh.triangles.push([f[s], f[(s + k) % n], f[(s + k + 1) % n]]);
                    mesh.tags.push(*tag);
                }
            }
            None => {
                let c = f.iter().map(|&i| verts[i as usize]).sum::<Vec3>() / n as f64;
                let ci = verts.len() as u32;
                verts.push(c);
                for k in 0..n {
                    mesh.triangles.push([f[k], f[(k + 1) % n], ci]);
                    mesh.tags.push(*tag);
                }
            }
        }
    }
    // Compact to referenced vertices.
    let mut remap = vec![u32::MAX; verts.len()];
    let mut out = Vec::new();
    for t in &mut mesh.triangles {
        for i in t.iter_mut() {
            if remap[*i as usize] == u32::MAX {
                remap[*i as usize] = out.len() as u32;
                out.push(verts[*i as usize]);
            }
            *i = remap[*i as usize];
        }
    }
    mesh.vertices = out;
    mesh
}
