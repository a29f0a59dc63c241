use std::collections::HashMap;
use std::io::{self, Read, Write};

use crate::Vec3;

use super::KernelError;

/// Face tag carried by every triangle; links it to an analytic surface.
pub type Tag = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self { min: Vec3::repeat(f64::INFINITY), max: Vec3::repeat(f64::NEG_INFINITY) }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.add(p);
        }
        b
    }

    pub fn add(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&o.min), max: self.max.sup(&o.max) }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    pub fn extent(&self) -> Vec3 {
        if self.is_empty() {
            Vec3::zeros()
        } else {
            self.max - self.min
        }
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn overlaps(&self, o: &Aabb, slack: f64) -> bool {
        (0..3).all(|k| self.min[k] <= o.max[k] + slack && o.min[k] <= self.max[k] + slack)
    }
}

/// Indexed triangle mesh with one face tag per triangle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub tags: Vec<Tag>,
}

/// Why a mesh fails the closed two-manifold check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldDefect {
    /// Edge used by a number of triangles other than two.
    EdgeValence { a: u32, b: u32, count: usize },
    /// Both triangles traverse the edge in the same direction.
    Orientation { a: u32, b: u32 },
    DegenerateTriangle { index: usize },
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    /// Area-weighted normal (length = 2 × area).
    pub fn cross(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        (b - a).cross(&(c - a))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.cross(t).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Σ area · unit normal.
    pub fn vector_area(&self) -> Vec3 {
        let mut s = Vec3::zeros();
        for t in 0..self.len() {
            s += self.cross(t) * 0.5;
        }
        s
    }

    /// Signed enclosed volume; positive for outward-oriented closed meshes.
    pub fn volume(&self) -> f64 {
        let mut v = 0.0;
        for t in 0..self.len() {
            let [a, b, c] = self.corners(t);
            v += a.dot(&b.cross(&c));
        }
        v / 6.0
    }

    pub fn bbox(&self) -> Aabb {
        let mut b = Aabb::empty();
        for tri in &self.triangles {
            for &i in tri {
                b.add(&self.vertices[i as usize]);
            }
        }
        b
    }

    /// Counts of directed half-edges keyed by (from, to).
    pub fn half_edges(&self) -> HashMap<(u32, u32), usize> {
        let mut m = HashMap::with_capacity(self.len() * 3);
        for tri in &self.triangles {
            for k in 0..3 {
                *m.entry((tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        m
    }

    /// Every undirected edge used by exactly one triangle in each direction.
    pub fn check_manifold(&self) -> Result<(), ManifoldDefect> {
        for (i, t) in self.triangles.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(ManifoldDefect::DegenerateTriangle { index: i });
            }
        }
        let he = self.half_edges();
        let mut keys: Vec<_> = he.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            let fwd = he[&(a, b)];
            let back = he.get(&(b, a)).copied().unwrap_or(0);
            if fwd != 1 || back != 1 {
                if fwd + back != 2 {
                    return Err(ManifoldDefect::EdgeValence { a: a.min(b), b: a.max(b), count: fwd + back });
                }
                return Err(ManifoldDefect::Orientation { a: a.min(b), b: a.max(b) });
            }
        }
        Ok(())
    }

    /// V − E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                used[t[k] as usize] = true;
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let v = used.iter().filter(|u| **u).count() as i64;
        v - edges.len() as i64 + self.len() as i64
    }

    /// Connected components of triangles sharing an edge.
    pub fn shell_count(&self) -> usize {
        let mut uf = UnionFind::new(self.len());
        let mut first: HashMap<(u32, u32), usize> = HashMap::new();
        for (i, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match first.get(&key) {
                    Some(&j) => uf.union(i, j),
                    None => {
                        first.insert(key, i);
                    }
                }
            }
        }
        (0..self.len()).filter(|&i| uf.find(i) == i).count()
    }

    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> TriangleMesh {
        TriangleMesh { vertices: self.vertices.iter().map(f).collect(), triangles: self.triangles.clone(), tags: self.tags.clone() }
    }

    /// Uniformly scaled and centered so the longest bounding-box side spans
    /// exactly [−0.5, 0.5].
    pub fn normalize_to_unit_box(&self) -> Result<TriangleMesh, KernelError> {
        let b = self.bbox();
        let ext = b.extent();
        let longest = ext.max();
        if b.is_empty() || !(longest > 0.0) || !longest.is_finite() {
            return Err(KernelError::DegenerateGeometry);
        }
        let c = b.center();
        let s = 1.0 / longest;
        Ok(self.map_vertices(|p| (p - c) * s))
    }

    /// Appends another mesh, offsetting its indices.
    pub fn append(&mut self, other: &TriangleMesh) {
        let off = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(other.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        self.tags.extend_from_slice(&other.tags);
    }

    pub fn write_stl(&self, mut w: impl Write) -> io::Result<()> {
        let mut header = [0u8; 80];
        let name = b"tagged mesh";
        header[..name.len()].copy_from_slice(name);
        w.write_all(&header)?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        for t in 0..self.len() {
            let n = self.cross(t);
            let n = if n.norm() > 0.0 { n.normalize() } else { n };
            for x in n.iter() {
                w.write_all(&(*x as f32).to_le_bytes())?;
            }
            for p in self.corners(t) {
                for x in p.iter() {
                    w.write_all(&(*x as f32).to_le_bytes())?;
                }
            }
            w.write_all(&0u16.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads binary STL, merging bit-identical corners.
    pub fn read_stl(mut r: impl Read) -> io::Result<TriangleMesh> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() < 84 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "stl shorter than header"));
        }
        let n = u32::from_le_bytes(buf[80..84].try_into().unwrap()) as usize;
        if buf.len() < 84 + n * 50 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "stl truncated"));
        }
        let mut mesh = TriangleMesh::default();
        let mut index: HashMap<[u32; 3], u32> = HashMap::new();
        let f = |o: usize| f32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
        for t in 0..n {
            let base = 84 + t * 50 + 12;
            let mut tri = [0u32; 3];
            for (k, slot) in tri.iter_mut().enumerate() {
                let o = base + k * 12;
                let key = [f(o).to_bits(), f(o + 4).to_bits(), f(o + 8).to_bits()];
                *slot = *index.entry(key).or_insert_with(|| {
                    mesh.vertices.push(Vec3::new(f(o) as f64, f(o + 4) as f64, f(o + 8) as f64));
                    (mesh.vertices.len() - 1) as u32
                });
            }
            mesh.triangles.push(tri);
            mesh.tags.push(0);
        }
        Ok(mesh)
    }

    pub fn write_obj(&self, mut w: impl Write) -> io::Result<()> {
        for p in &self.vertices {
            writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
        }
        let mut last = None;
        for (t, tag) in self.triangles.iter().zip(&self.tags) {
            if last != Some(*tag) {
                writeln!(w, "g tag_{tag}")?;
                last = Some(*tag);
            }
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cube() -> TriangleMesh {
        let v = (0..8).map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64)).collect();
        let quads = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
        let mut m = TriangleMesh { vertices: v, ..Default::default() };
        for (k, q) in quads.iter().enumerate() {
            m.triangles.push([q[0], q[1], q[2]]);
            m.triangles.push([q[0], q[2], q[3]]);
            m.tags.extend([k as u32, k as u32]);
        }
        m
    }

    #[test]
    fn cube_invariants() {
        let c = cube();
        assert!((c.volume() - 1.0).abs() < 1e-15);
        assert!(c.vector_area().norm() < 1e-15);
        assert_eq!(c.check_manifold(), Ok(()));
        assert_eq!(c.euler_characteristic(), 2);
        assert_eq!(c.shell_count(), 1);
    }

    #[test]
    fn normalize_box() {
        let m = cube().map_vertices(|p| Vec3::new(p.x * 2.0, p.y, p.z) + Vec3::new(3.0, -1.0, 0.5));
        let n = m.normalize_to_unit_box().unwrap();
        let b = n.bbox();
        assert!((b.extent() - Vec3::new(1.0, 0.5, 0.5)).norm() < 1e-15);
        assert!(b.center().norm() < 1e-15);
        let nn = n.normalize_to_unit_box().unwrap();
        for (a, b) in n.vertices.iter().zip(&nn.vertices) {
            assert!((a - b).norm() < 1e-15);
        }
        let flat = TriangleMesh::default();
        assert!(flat.normalize_to_unit_box().is_err());
    }

    #[test]
    fn stl_round_trip() {
        let c = cube();
        let mut buf = Vec::new();
        c.write_stl(&mut buf).unwrap();
        assert_eq!(buf.len(), 84 + 12 * 50);
        let back = TriangleMesh::read_stl(&buf[..]).unwrap();
        assert_eq!(back.len(), 12);
        assert_eq!(back.vertices.len(), 8);
        assert!((back.volume() - 1.0).abs() < 1e-12);
        assert_eq!(back.check_manifold(), Ok(()));
    }
}
