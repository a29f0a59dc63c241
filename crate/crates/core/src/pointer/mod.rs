//! Candidate enumeration, geometric equivalence classes, fixed-seed candidate
//! embeddings and cosine-similarity resolution.

use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::grammar::{BasePlane, EntityKind};
use crate::kernel::frame::v3;
use crate::kernel::mesh::UnionFind;
use crate::kernel::sample::{sample_edge, sample_face, EDGE_CHANNELS, FACE_CHANNELS};
use crate::kernel::{AnalyticSurface, EdgeCurve, Solid};
use crate::Vec3;

pub const EMBED_DIM: usize = 128;
pub const HIDDEN_DIM: usize = 256;
pub const DEFAULT_SEED: u64 = 42;
pub const GRID: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PointerError {
    #[error("solid is not a closed two-manifold")]
    NonManifoldInput,
    #[error("no candidates of the requested kind")]
    NoCandidates,
    #[error("entity {0:?} is not a candidate")]
    UnknownEntity(Candidate),
}

/// A selectable entity: a model face, a model edge or a base plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    pub kind: EntityKind,
    pub stable_id: u64,
}

impl Candidate {
    pub fn face(stable_id: u64) -> Self {
        Self { kind: EntityKind::Face, stable_id }
    }

    pub fn edge(stable_id: u64) -> Self {
        Self { kind: EntityKind::Edge, stable_id }
    }

    pub fn base(plane: BasePlane) -> Self {
        Self { kind: EntityKind::BasePlane, stable_id: plane.stable_id() }
    }

    pub fn is_face_like(&self) -> bool {
        self.kind != EntityKind::Edge
    }
}

/// Fixed-seed weights of the candidate encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    pub seed: u64,
    face_conv: Array2<f64>,
    face_bias: Array1<f64>,
    face_proj: Array2<f64>,
    edge_conv: Array2<f64>,
    edge_bias: Array1<f64>,
    edge_proj: Array2<f64>,
    base: Array2<f64>,
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || {
        let g: f64 = StandardNormal.sample(rng);
        g * scale
    })
}

fn unit(v: Array1<f64>) -> Array1<f64> {
    let n = v.dot(&v).sqrt();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

impl Encoder {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let face_conv = gaussian(&mut rng, FACE_CHANNELS, HIDDEN_DIM, (1.0 / FACE_CHANNELS as f64).sqrt());
        let face_bias = gaussian(&mut rng, 1, HIDDEN_DIM, 0.5).row(0).to_owned();
        let face_proj = gaussian(&mut rng, HIDDEN_DIM, EMBED_DIM, (1.0 / HIDDEN_DIM as f64).sqrt());
        let edge_conv = gaussian(&mut rng, EDGE_CHANNELS, HIDDEN_DIM, (1.0 / EDGE_CHANNELS as f64).sqrt());
        let edge_bias = gaussian(&mut rng, 1, HIDDEN_DIM, 0.5).row(0).to_owned();
        let edge_proj = gaussian(&mut rng, HIDDEN_DIM, EMBED_DIM, (1.0 / HIDDEN_DIM as f64).sqrt());
        let mut base = gaussian(&mut rng, 3, EMBED_DIM, 1.0);
        for mut r in base.rows_mut() {
            let n = r.dot(&r).sqrt();
            r /= n;
        }
        Self { seed, face_conv, face_bias, face_proj, edge_conv, edge_bias, edge_proj, base }
    }

    /// Per-sample channel expansion with a rectifier, mean pooling, linear
    /// projection and unit normalization.
    fn encode(samples: Array2<f64>, conv: &Array2<f64>, bias: &Array1<f64>, proj: &Array2<f64>) -> Array1<f64> {
        let h = (samples.dot(conv) + bias).mapv(|x| x.max(0.0));
        let pooled = h.mean_axis(Axis(0)).expect("non-empty grid");
        unit(pooled.dot(proj))
    }

    pub fn embed_face(&self, tensor: &crate::kernel::FaceTensor) -> Array1<f64> {
        let (a, b, c) = tensor.dim();
        let flat = tensor.to_shape((a * b, c)).expect("contiguous tensor").to_owned();
        Self::encode(flat, &self.face_conv, &self.face_bias, &self.face_proj)
    }

    pub fn embed_edge(&self, tensor: &crate::kernel::EdgeTensor) -> Array1<f64> {
        Self::encode(tensor.clone(), &self.edge_conv, &self.edge_bias, &self.edge_proj)
    }

    pub fn embed_base(&self, plane: BasePlane) -> Array1<f64> {
        self.base.row(plane.stable_id() as usize).to_owned()
    }
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new(DEFAULT_SEED)
    }
}

/// Faces (base planes first) and edges of a solid with embeddings and
/// equivalence classes. `face_class[i]` / `edge_class[i]` is the smallest
/// index of the member's class.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub faces: Vec<Candidate>,
    pub edges: Vec<Candidate>,
    pub face_embeddings: Vec<Array1<f64>>,
    pub edge_embeddings: Vec<Array1<f64>>,
    pub face_class: Vec<usize>,
    pub edge_class: Vec<usize>,
}

impl CandidateSet {
    pub fn position(&self, c: &Candidate) -> Option<(bool, usize)> {
        if c.is_face_like() {
            self.faces.iter().position(|x| x == c).map(|i| (true, i))
        } else {
            self.edges.iter().position(|x| x == c).map(|i| (false, i))
        }
    }

    pub fn embedding(&self, c: &Candidate) -> Option<&Array1<f64>> {
        self.position(c).map(|(f, i)| if f { &self.face_embeddings[i] } else { &self.edge_embeddings[i] })
    }

    /// Members of the class containing `c`.
    pub fn class_of(&self, c: &Candidate) -> Option<Vec<Candidate>> {
        let (f, i) = self.position(c)?;
        let (list, class) = if f { (&self.faces, &self.face_class) } else { (&self.edges, &self.edge_class) };
        Some((0..list.len()).filter(|&j| class[j] == class[i]).map(|j| list[j]).collect())
    }
}

/// Carrier of a face-like candidate for class comparison.
#[derive(Debug, Clone, Copy)]
enum FaceCarrier {
    Plane { n: Vec3, d: f64 },
    Other(AnalyticSurface),
}

#[derive(Debug, Clone)]
enum EdgeCarrier {
    Line { p: Vec3, d: Vec3 },
    Circle { c: Vec3, n: Vec3, r: f64 },
    Other,
}

fn same_face_carrier(a: &FaceCarrier, b: &FaceCarrier, tol: f64) -> bool {
    match (a, b) {
        (FaceCarrier::Plane { n: n1, d: d1 }, FaceCarrier::Plane { n: n2, d: d2 }) => {
            let s = n1.dot(n2);
            n1.cross(n2).norm() < 1e-6 && (d1 - s.signum() * d2).abs() < tol
        }
        (FaceCarrier::Other(x), FaceCarrier::Other(y)) => x == y,
        _ => false,
    }
}

fn same_edge_carrier(a: &EdgeCarrier, b: &EdgeCarrier, tol: f64) -> bool {
    match (a, b) {
        (EdgeCarrier::Line { p: p1, d: d1 }, EdgeCarrier::Line { p: p2, d: d2 }) => {
            let w = p2 - p1;
            d1.cross(d2).norm() < 1e-6 && (w - d1 * w.dot(d1)).norm() < tol
        }
        (EdgeCarrier::Circle { c: c1, n: n1, r: r1 }, EdgeCarrier::Circle { c: c2, n: n2, r: r2 }) => {
            (c1 - c2).norm() < tol && n1.cross(n2).norm() < 1e-6 && (r1 - r2).abs() < tol
        }
        _ => false,
    }
}

fn partition<T>(items: &[T], same: impl Fn(&T, &T) -> bool) -> Vec<usize> {
    let mut uf = UnionFind::new(items.len());
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if same(&items[i], &items[j]) {
                uf.union(i, j);
            }
        }
    }
    let roots: Vec<usize> = (0..items.len()).map(|i| uf.find(i)).collect();
    (0..items.len()).map(|i| (0..items.len()).find(|&j| roots[j] == roots[i]).unwrap()).collect()
}

/// Length tolerance for carrier comparison.
pub fn class_tolerance(solid: &Solid) -> f64 {
    1e-6 * solid.mesh.bbox().diagonal().max(1.0)
}

/// All candidates of a solid in deterministic order.
pub fn enumerate(solid: &Solid, encoder: &Encoder) -> Result<CandidateSet, PointerError> {
    if !solid.is_empty() && solid.mesh.check_manifold().is_err() {
        return Err(PointerError::NonManifoldInput);
    }
    let tol = class_tolerance(solid);
    let mut faces = Vec::new();
    let mut face_embeddings = Vec::new();
    let mut face_carriers = Vec::new();
    for b in BasePlane::ALL {
        faces.push(Candidate::base(b));
        face_embeddings.push(encoder.embed_base(b));
        face_carriers.push(FaceCarrier::Plane { n: v3(b.normal()), d: 0.0 });
    }
    for f in &solid.topology.faces {
        faces.push(Candidate::face(f.id));
        face_embeddings.push(encoder.embed_face(&sample_face(solid, f, GRID)));
        face_carriers.push(match f.surface {
            AnalyticSurface::Plane { point, normal } => FaceCarrier::Plane { n: normal, d: normal.dot(&point) },
            s => FaceCarrier::Other(s),
        });
    }
    let mut edges = Vec::new();
    let mut edge_embeddings = Vec::new();
    let mut edge_carriers = Vec::new();
    for e in &solid.topology.edges {
        edges.push(Candidate::edge(e.id));
        edge_embeddings.push(encoder.embed_edge(&sample_edge(e, GRID)));
        edge_carriers.push(match &e.curve {
            EdgeCurve::Line { a, b } => EdgeCarrier::Line { p: *a, d: (b - a).normalize() },
            EdgeCurve::Circle { center, normal, radius, .. } | EdgeCurve::Arc { center, normal, radius, .. } => {
                EdgeCarrier::Circle { c: *center, n: *normal, r: *radius }
            }
            EdgeCurve::Polyline { .. } => EdgeCarrier::Other,
        });
    }
    let face_class = partition(&face_carriers, |a, b| same_face_carrier(a, b, tol));
    let edge_class = partition(&edge_carriers, |a, b| same_edge_carrier(a, b, tol));
    Ok(CandidateSet { faces, edges, face_embeddings, edge_embeddings, face_class, edge_class })
}

pub fn cosine(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let d = a.dot(a).sqrt() * b.dot(b).sqrt();
    if d == 0.0 {
        0.0
    } else {
        a.dot(b) / d
    }
}

/// Candidates of one kind ranked by cosine similarity, best first; ties go to
/// the lowest stable id.
pub fn rank(query: &Array1<f64>, set: &CandidateSet, faces: bool) -> Vec<(Candidate, f64)> {
    let (list, emb) = if faces { (&set.faces, &set.face_embeddings) } else { (&set.edges, &set.edge_embeddings) };
    let mut out: Vec<(usize, Candidate, f64)> = list.iter().zip(emb).enumerate().map(|(i, (c, e))| (i, *c, cosine(query, e))).collect();
    out.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.1.stable_id.cmp(&b.1.stable_id)).then(a.0.cmp(&b.0)));
    out.into_iter().map(|(_, c, s)| (c, s)).collect()
}

pub fn resolve(query: &Array1<f64>, set: &CandidateSet, faces: bool) -> Result<Candidate, PointerError> {
    rank(query, set, faces).first().map(|(c, _)| *c).ok_or(PointerError::NoCandidates)
}

/// Valid and invalid targets of a pointer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointerTruth {
    pub positives: Vec<Candidate>,
    pub negatives: Vec<Candidate>,
}

pub fn ground_truth(target: &Candidate, set: &CandidateSet) -> Result<PointerTruth, PointerError> {
    let positives = set.class_of(target).ok_or(PointerError::UnknownEntity(*target))?;
    let list = if target.is_face_like() { &set.faces } else { &set.edges };
    let negatives = list.iter().filter(|c| !positives.contains(c)).copied().collect();
    Ok(PointerTruth { positives, negatives })
}
