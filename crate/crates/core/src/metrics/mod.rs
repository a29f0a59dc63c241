//! Mesh and program quality metrics.
//!
//! Length-derived values are reported ×10³. Callers normalize meshes with
//! [`TriangleMesh::normalize_to_unit_box`] first.

mod assign;
mod intersect;
mod kdtree;
mod primitives;
mod report;

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::mesh::UnionFind;
use crate::kernel::{KernelError, TriangleMesh};
use crate::Vec3;

pub use assign::min_cost_assignment;
pub use intersect::triangles_intersect;
pub use kdtree::KdTree;
pub use primitives::{extract_primitives, match_primitives, primitive_f1, MatchCounts, Normalization, Primitive, PrimitiveKind};
pub use report::{median, MetricsReport, ModelMetrics};

pub const CD_SAMPLES: usize = 8192;
pub const SEG_THRESHOLD_DEG: f64 = 30.0;
pub const F1_TOL: f64 = 1e-2;

/// Area-weighted uniform surface samples.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<Vec<Vec3>, KernelError> {
    let areas: Vec<f64> = (0..mesh.len()).map(|t| mesh.triangle_area(t)).collect();
    let dist = WeightedIndex::new(&areas).map_err(|_| KernelError::DegenerateGeometry)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let [a, b, c] = mesh.corners(dist.sample(&mut rng));
            let s = rng.random::<f64>().sqrt();
            let r: f64 = rng.random();
            a * (1.0 - s) + b * (s * (1.0 - r)) + c * (s * r)
        })
        .collect())
}

/// Mean squared nearest-neighbour distance from each set to the other,
/// summed, ×10³.
pub fn chamfer_of_samples(a: &[Vec3], b: &[Vec3]) -> f64 {
    let (ta, tb) = (KdTree::new(a), KdTree::new(b));
    let ab = a.iter().map(|p| tb.nearest_sq(p)).sum::<f64>() / a.len() as f64;
    let ba = b.iter().map(|p| ta.nearest_sq(p)).sum::<f64>() / b.len() as f64;
    (ab + ba) * 1e3
}

pub fn chamfer_distance(a: &TriangleMesh, b: &TriangleMesh, n: usize, seed: u64) -> Result<f64, KernelError> {
    if n == 0 {
        return Err(KernelError::DegenerateGeometry);
    }
    Ok(chamfer_of_samples(&sample_surface(a, n, seed)?, &sample_surface(b, n, seed)?))
}

/// Share of outcomes that did not produce a valid solid.
pub fn invalidity_ratio(built: &[bool]) -> f64 {
    if built.is_empty() {
        return 0.0;
    }
    built.iter().filter(|b| !**b).count() as f64 / built.len() as f64
}

pub fn flux_enclosure_error(mesh: &TriangleMesh) -> f64 {
    mesh.vector_area().norm() * 1e3
}

/// Vertex ids with coincident positions merged.
fn welded(mesh: &TriangleMesh) -> Vec<[u32; 3]> {
    let mut ids: HashMap<[u64; 3], u32> = HashMap::new();
    let remap: Vec<u32> = mesh
        .vertices
        .iter()
        .map(|p| {
            let key = [p.x, p.y, p.z].map(|c| (c + 0.0).to_bits());
            let next = ids.len() as u32;
            *ids.entry(key).or_insert(next)
        })
        .collect();
    mesh.triangles.iter().map(|t| t.map(|i| remap[i as usize])).collect()
}

fn edge_triangles(tris: &[[u32; 3]]) -> HashMap<(u32, u32), Vec<usize>> {
    let mut map: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if a != b {
                map.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
    }
    map
}

/// Total length of edges used by exactly one triangle, ×10³.
pub fn dangling_edge_length(mesh: &TriangleMesh) -> f64 {
    let tris = welded(mesh);
    let mut edges: Vec<_> = edge_triangles(&tris).into_iter().collect();
    edges.sort_unstable();
    let mut len = 0.0;
    for (key, ts) in edges {
        if ts.len() == 1 {
            let t = ts[0];
            let k = (0..3).find(|&k| {
                let (a, b) = (tris[t][k], tris[t][(k + 1) % 3]);
                (a.min(b), a.max(b)) == key
            });
            if let Some(k) = k {
                let [p, q] = [k, (k + 1) % 3].map(|i| mesh.vertices[mesh.triangles[t][i] as usize]);
                len += (q - p).norm();
            }
        }
    }
    len * 1e3
}

fn triangle_boxes(mesh: &TriangleMesh) -> Vec<(Vec3, Vec3)> {
    (0..mesh.len())
        .map(|t| {
            let [a, b, c] = mesh.corners(t);
            (a.inf(&b).inf(&c), a.sup(&b).sup(&c))
        })
        .collect()
}

/// Pairs of triangles that share no vertex and touch, found by a sweep over
/// x-extents.
pub fn intersecting_pairs(mesh: &TriangleMesh) -> Vec<(usize, usize)> {
    let tris = welded(mesh);
    let boxes = triangle_boxes(mesh);
    let mut order: Vec<usize> = (0..mesh.len()).collect();
    order.sort_by(|&a, &b| boxes[a].0.x.total_cmp(&boxes[b].0.x));
    let mut out = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j].0.x > boxes[i].1.x {
                break;
            }
            let (bi, bj) = (&boxes[i], &boxes[j]);
            if (0..3).any(|d| bi.1[d] < bj.0[d] || bj.1[d] < bi.0[d]) {
                continue;
            }
            if tris[i].iter().any(|v| tris[j].contains(v)) {
                continue;
            }
            if triangles_intersect(&mesh.corners(i), &mesh.corners(j)) {
                out.push((i.min(j), i.max(j)));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Fraction of triangles touching some triangle they share no vertex with.
pub fn self_intersection_ratio(mesh: &TriangleMesh) -> f64 {
    if mesh.is_empty() {
        return 0.0;
    }
    let mut hit = vec![false; mesh.len()];
    for (i, j) in intersecting_pairs(mesh) {
        hit[i] = true;
        hit[j] = true;
    }
    hit.iter().filter(|h| **h).count() as f64 / mesh.len() as f64
}

/// Number of patches grown across edges whose dihedral angle is below
/// `thresh_deg`.
pub fn patch_count(mesh: &TriangleMesh, thresh_deg: f64) -> usize {
    let tris = welded(mesh);
    let normals: Vec<Vec3> = (0..mesh.len()).map(|t| mesh.cross(t)).collect();
    let cos_t = thresh_deg.to_radians().cos();
    let mut uf = UnionFind::new(mesh.len());
    for (_, ts) in edge_triangles(&tris) {
        for (k, &a) in ts.iter().enumerate() {
            for &b in &ts[k + 1..] {
                let (na, nb) = (normals[a], normals[b]);
                let d = na.norm() * nb.norm();
                if d > 0.0 && na.dot(&nb) / d > cos_t {
                    uf.union(a, b);
                }
            }
        }
    }
    (0..mesh.len()).filter(|&t| uf.find(t) == t).count()
}

pub fn seg_error(a: &TriangleMesh, b: &TriangleMesh, thresh_deg: f64) -> usize {
    patch_count(a, thresh_deg).abs_diff(patch_count(b, thresh_deg))
}
