//! Seeded generator of multi-step programs that reference earlier geometry.

use std::fs;
use std::path::Path;

use anyhow::Context;
use cadseq_core::codec::{encode, QuantConfig};
use cadseq_core::grammar::build::{chamfer, circle, extrude, fillet, frame, polygon, profile, program, rect, sketch};
use cadseq_core::grammar::{validate, BasePlane, BooleanOp, Direction, EntityRef, Loop, Point2, Program, Step};
use cadseq_core::kernel::frame::{build_frame, hint_basis};
use cadseq_core::kernel::{execute_program, AnalyticSurface, EdgeCurve, ExecConfig, Execution, SketchPlane, Solid};
use cadseq_core::{Vec2, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_models: usize,
    pub min_steps: usize,
    pub max_steps: usize,
    /// Relative weights of rectangle, polygon and circle-bearing profiles.
    pub rect_weight: f64,
    pub polygon_weight: f64,
    pub circle_weight: f64,
    pub chamfer_prob: f64,
    pub fillet_prob: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_models: 200,
            min_steps: 2,
            max_steps: 4,
            rect_weight: 0.5,
            polygon_weight: 0.25,
            circle_weight: 0.25,
            chamfer_prob: 0.1,
            fillet_prob: 0.1,
            seed: 0,
        }
    }
}

pub fn model_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

pub struct Model {
    pub name: String,
    pub seed: u64,
    pub program: Program,
    pub exec: Execution,
}

const STEP_ATTEMPTS: usize = 40;

fn base_profile(rng: &mut ChaCha8Rng, spec: &CorpusSpec) -> Vec<Loop> {
    let w = rng.random_range(0.6..2.0);
    let h = rng.random_range(0.6..2.0);
    let (x0, y0) = (rng.random_range(-1.0..0.2), rng.random_range(-1.0..0.2));
    let total = spec.rect_weight + spec.polygon_weight + spec.circle_weight;
    let pick = rng.random_range(0.0..total.max(f64::MIN_POSITIVE));
    if pick < spec.rect_weight {
        vec![rect(x0, y0, x0 + w, y0 + h)]
    } else if pick < spec.rect_weight + spec.polygon_weight {
        let (cx, cy) = (x0 + w * rng.random_range(0.3..0.7), y0 + h * rng.random_range(0.3..0.7));
        vec![polygon(&[(x0, y0), (x0 + w, y0), (x0 + w, cy), (cx, cy), (cx, y0 + h), (x0, y0 + h)])]
    } else if rng.random_bool(0.5) {
        let r = 0.5 * w.min(h);
        vec![circle(x0 + r, y0 + r, r)]
    } else {
        let r = 0.25 * w.min(h);
        vec![rect(x0, y0, x0 + w, y0 + h), circle(x0 + w * 0.5, y0 + h * 0.5, r)]
    }
}

fn base_step(rng: &mut ChaCha8Rng, spec: &CorpusSpec) -> Step {
    let plane = BasePlane::ALL[rng.random_range(0..3)];
    let dr = match plane {
        BasePlane::Right => Direction::XPos,
        BasePlane::Front => Direction::YPos,
        BasePlane::Top => Direction::ZPos,
    };
    let mut fs = frame(dr);
    fs.origin_hint = Point2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let sk = sketch(EntityRef::base_plane(0, plane), fs, vec![profile(base_profile(rng, spec))]);
    extrude(vec![sk], rng.random_range(0.4..1.5), 0.0, BooleanOp::New)
}

struct PlanarFace {
    id: u64,
    point: Vec3,
    normal: Vec3,
    outward: Vec3,
    triangles: Vec<[Vec3; 3]>,
}

fn planar_faces(solid: &Solid) -> Vec<PlanarFace> {
    let largest = solid.topology.faces.iter().map(|f| f.area).fold(0.0, f64::max);
    solid
        .topology
        .faces
        .iter()
        .filter(|f| f.area > 0.05 * largest)
        .filter_map(|f| match f.surface {
            AnalyticSurface::Plane { point, normal } => {
                let outward = f.triangles.iter().map(|&t| solid.mesh.cross(t as usize)).sum::<Vec3>().normalize();
                let triangles = f.triangles.iter().map(|&t| solid.mesh.corners(t as usize)).collect();
                Some(PlanarFace { id: f.id, point, normal, outward, triangles })
            }
            _ => None,
        })
        .collect()
}

impl PlanarFace {
    fn contains(&self, p: &Vec3) -> bool {
        self.triangles.iter().any(|[a, b, c]| {
            let n = (b - a).cross(&(c - a));
            let nn = n.norm_squared();
            if nn == 0.0 {
                return false;
            }
            let l0 = (c - b).cross(&(p - b)).dot(&n) / nn;
            let l1 = (a - c).cross(&(p - c)).dot(&n) / nn;
            let l2 = 1.0 - l0 - l1;
            l0 >= 1e-9 && l1 >= 1e-9 && l2 >= 1e-9
        })
    }

    fn direction(&self) -> Option<Direction> {
        Direction::ALL
            .into_iter()
            .map(|d| (d, Vec3::from(d.primary()).dot(&self.outward)))
            .filter(|(_, c)| *c > 0.99)
            .map(|(d, _)| d)
            .next()
    }
}

fn line_edges_of(solid: &Solid, face: u64, min_len: f64) -> Vec<(u64, Vec3, Vec3)> {
    solid
        .topology
        .edges
        .iter()
        .filter(|e| e.faces.contains(&face))
        .filter_map(|e| match e.curve {
            EdgeCurve::Line { a, b } if (b - a).norm() > min_len => Some((e.id, a, b)),
            _ => None,
        })
        .collect()
}

/// Sketch on an existing planar face: a rectangle anchored on one of its
/// edges, or a circle inside it. The frame origin snaps onto the anchor
/// edge's start vertex.
fn face_step(rng: &mut ChaCha8Rng, solid: &Solid, k: u32, spec: &CorpusSpec) -> Option<Step> {
    let faces = planar_faces(solid);
    if faces.is_empty() {
        return None;
    }
    let face = &faces[rng.random_range(0..faces.len())];
    let dr = face.direction()?;
    let edges = line_edges_of(solid, face.id, 0.2);
    if edges.is_empty() {
        return None;
    }
    let (eid, a, b) = edges[rng.random_range(0..edges.len())];
    let (_, d, e2) = hint_basis(dr);
    let hint = Vec2::new(a.dot(&d), a.dot(&e2));
    let mut fs = frame(dr);
    fs.origin_hint = Point2::snapped(hint.x, hint.y, EntityRef::edge(k, eid));
    let f = build_frame(&SketchPlane { point: face.point, normal: face.normal }, &fs, &hint).ok()?;
    let bl = f.local(&b);
    let len = bl.norm();
    let perp = Vec2::new(-bl.y, bl.x) / len;
    let probe = |s: f64| face.contains(&f.world(&(bl * 0.5 + perp * (s * 1e-3))));
    let inward = if probe(1.0) {
        perp
    } else if probe(-1.0) {
        -perp
    } else {
        return None;
    };

    let total = spec.rect_weight + spec.polygon_weight + spec.circle_weight;
    let want_circle = rng.random_range(0.0..total.max(f64::MIN_POSITIVE)) >= spec.rect_weight + spec.polygon_weight;
    let lp = if want_circle {
        let r = rng.random_range(0.05..0.2) * len.min(1.5);
        let c = bl * rng.random_range(0.3..0.7) + inward * (r + rng.random_range(0.02..0.2));
        let inside = (0..24).all(|i| {
            let t = std::f64::consts::TAU * i as f64 / 24.0;
            face.contains(&f.world(&(c + Vec2::new(t.cos(), t.sin()) * (r * 1.05))))
        });
        if !inside {
            return None;
        }
        circle(c.x, c.y, r)
    } else {
        let (t0, t1) = if rng.random_bool(0.5) {
            (0.0, 1.0)
        } else {
            let t0 = rng.random_range(0.0..0.4);
            (t0, rng.random_range(t0 + 0.3..1.0))
        };
        let depth = rng.random_range(0.1..0.6) * len.min(1.5);
        let on_edge = |t: f64| {
            let p = bl * t;
            Point2::snapped(p.x, p.y, EntityRef::edge(k, eid))
        };
        let (c2, c3) = (bl * t1 + inward * depth, bl * t0 + inward * depth);
        let mut lp = rect(0.0, 0.0, 1.0, 1.0);
        for (curve, p) in lp.curves.iter_mut().zip([on_edge(t0), on_edge(t1), Point2::new(c2.x, c2.y), Point2::new(c3.x, c3.y)]) {
            if let cadseq_core::grammar::Curve::Line { start } = curve {
                *start = p;
            }
        }
        lp
    };
    let sk = sketch(EntityRef::face(k, face.id), fs, vec![profile(vec![lp])]);
    Some(if rng.random_bool(0.55) {
        extrude(vec![sk], rng.random_range(0.1..0.7), 0.0, BooleanOp::Join)
    } else {
        extrude(vec![sk], rng.random_range(0.02..0.1), rng.random_range(0.05..0.4), BooleanOp::Cut)
    })
}

fn blend_step(rng: &mut ChaCha8Rng, solid: &Solid, k: u32, fillet_step: bool) -> Option<Step> {
    let edges: Vec<u64> = solid
        .topology
        .edges
        .iter()
        .filter(|e| matches!(e.curve, EdgeCurve::Line { a, b } if (b - a).norm() > 0.25))
        .map(|e| e.id)
        .collect();
    if edges.is_empty() {
        return None;
    }
    let id = edges[rng.random_range(0..edges.len())];
    let d = rng.random_range(0.03..0.12);
    let refs = vec![EntityRef::edge(k, id)];
    Some(if fillet_step { fillet(d, refs) } else { chamfer(d, refs) })
}

fn try_steps(steps: &[Step], cfg: &ExecConfig) -> Option<(Program, Execution)> {
    let p = program(steps.to_vec());
    if !validate(&p).is_empty() {
        return None;
    }
    let exec = execute_program(&p, cfg).ok()?;
    let solid = exec.final_solid();
    if solid.mesh.volume() < 1e-3 || encode(&p, &QuantConfig::with_q(4)).is_err() {
        return None;
    }
    Some((p, exec))
}

/// One model; deterministic in `seed`.
pub fn generate_program(spec: &CorpusSpec, seed: u64, cfg: &ExecConfig) -> (Program, Execution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n_steps = rng.random_range(spec.min_steps.max(1)..=spec.max_steps.max(spec.min_steps.max(1)));
        let mut steps = Vec::new();
        let mut state = None;
        for _ in 0..STEP_ATTEMPTS {
            steps.push(base_step(&mut rng, spec));
            if let Some(ok) = try_steps(&steps, cfg) {
                state = Some(ok);
                break;
            }
            steps.pop();
        }
        let Some(mut current) = state else { continue };
        while steps.len() < n_steps {
            let k = steps.len() as u32;
            let mut added = false;
            for _ in 0..STEP_ATTEMPTS {
                let solid = current.1.final_solid();
                let roll: f64 = rng.random();
                let step = if roll < spec.chamfer_prob {
                    blend_step(&mut rng, solid, k, false)
                } else if roll < spec.chamfer_prob + spec.fillet_prob {
                    blend_step(&mut rng, solid, k, true)
                } else {
                    face_step(&mut rng, solid, k, spec)
                };
                let Some(step) = step else { continue };
                steps.push(step);
                if let Some(ok) = try_steps(&steps, cfg) {
                    current = ok;
                    added = true;
                    break;
                }
                steps.pop();
            }
            if !added {
                break;
            }
        }
        if steps.len() >= spec.min_steps {
            return current;
        }
    }
}

pub fn model_name(index: usize) -> String {
    format!("model_{index:04}")
}

/// Generates every model of the corpus, in parallel, ordered by index.
pub fn generate(spec: &CorpusSpec, cfg: &ExecConfig) -> Vec<Model> {
    (0..spec.n_models)
        .into_par_iter()
        .map(|i| {
            let seed = model_seed(spec.seed, i);
            let (program, exec) = generate_program(spec, seed, cfg);
            Model { name: model_name(i), seed, program, exec }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub seed: u64,
    pub steps: usize,
    pub tokens: usize,
    pub pointers: usize,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: CorpusSpec,
    pub q: u32,
    pub tess_segments: usize,
    pub models: Vec<ManifestEntry>,
}

/// Writes `<name>.program.json`, `<name>.seq.json`, `<name>.stl` per model
/// and `manifest.json`.
pub fn write_corpus(models: &[Model], spec: &CorpusSpec, q: u32, cfg: &ExecConfig, dir: &Path) -> anyhow::Result<Manifest> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut entries = Vec::new();
    for m in models {
        let stream = encode(&m.program, &QuantConfig::with_q(q))?;
        fs::write(dir.join(format!("{}.program.json", m.name)), serde_json::to_string_pretty(&m.program)?)?;
        fs::write(dir.join(format!("{}.seq.json", m.name)), stream.to_json())?;
        let mut stl = Vec::new();
        m.exec.final_solid().mesh.write_stl(&mut stl)?;
        fs::write(dir.join(format!("{}.stl", m.name)), stl)?;
        entries.push(ManifestEntry {
            name: m.name.clone(),
            seed: m.seed,
            steps: m.program.steps.len(),
            tokens: stream.len(),
            pointers: stream.pointers.len(),
            volume: m.exec.final_solid().mesh.volume(),
        });
    }
    let manifest = Manifest { spec: spec.clone(), q, tess_segments: cfg.tess_segments, models: entries };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> anyhow::Result<Manifest> {
    let path = dir.join("manifest.json");
    Ok(serde_json::from_str(&fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?)?)
}

/// Programs of a written corpus, in manifest order.
pub fn read_programs(dir: &Path) -> anyhow::Result<Vec<(String, Program)>> {
    read_manifest(dir)?
        .models
        .into_iter()
        .map(|e| {
            let p = crate::pipeline::read_program(&dir.join(format!("{}.program.json", e.name)))?;
            Ok((e.name, p))
        })
        .collect()
}
