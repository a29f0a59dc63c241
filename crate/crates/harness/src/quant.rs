//! Reconstruction error of both codecs across bit widths.

use std::path::Path;

use cadseq_core::codec::{decode, decode_legacy, encode, encode_legacy, QuantConfig};
use cadseq_core::grammar::Program;
use cadseq_core::kernel::{execute_legacy, execute_program, to_legacy, ExecConfig, TriangleMesh};
use cadseq_core::metrics::{chamfer_distance, chamfer_of_samples, median, sample_surface, CD_SAMPLES};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::model_seed;
use crate::format::sig6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Codec {
    Pointer,
    Legacy,
}

impl Codec {
    pub fn name(self) -> &'static str {
        match self {
            Codec::Pointer => "pointer",
            Codec::Legacy => "legacy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantStudyConfig {
    pub q_values: Vec<u32>,
    pub n_samples: usize,
    pub seed: u64,
    pub tess_segments: usize,
}

impl Default for QuantStudyConfig {
    fn default() -> Self {
        Self { q_values: (4..=10).collect(), n_samples: CD_SAMPLES, seed: 0, tess_segments: 64 }
    }
}

/// CD per (codec, q) for one model; `None` marks a failed rebuild.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRow {
    pub name: String,
    pub pointer: Vec<Option<f64>>,
    pub legacy: Vec<Option<f64>>,
    /// CD between two independent sample sets of the ground truth.
    pub self_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub codec: Codec,
    pub q: u32,
    pub median_cd: Option<f64>,
    pub valid: usize,
    pub invalid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantStudy {
    pub config: QuantStudyConfig,
    pub cells: Vec<Cell>,
    pub rows: Vec<ModelRow>,
    /// Models dropped because the legacy codec cannot express them.
    pub excluded: Vec<String>,
}

fn normalized(mesh: &TriangleMesh) -> Option<TriangleMesh> {
    mesh.normalize_to_unit_box().ok()
}

fn cd_against(gt: &TriangleMesh, rebuilt: Option<TriangleMesh>, n: usize, seed: u64) -> Option<f64> {
    let r = normalized(&rebuilt?)?;
    chamfer_distance(gt, &r, n, seed).ok()
}

fn pointer_rebuild(program: &Program, q: u32, tess: usize) -> Option<TriangleMesh> {
    let stream = encode(program, &QuantConfig::with_q(q)).ok()?;
    let decoded = decode(&stream).ok()?;
    let bin = (stream.nv_range.hi - stream.nv_range.lo) / ((1u64 << q) - 1) as f64;
    let cfg = ExecConfig { tess_segments: tess, snap_vertex_radius: bin };
    Some(execute_program(&decoded, &cfg).ok()?.final_solid().mesh.clone())
}

enum Prepared {
    Excluded,
    Ready { gt: TriangleMesh, legacy: cadseq_core::codec::LegacyProgram },
}

fn prepare(program: &Program, tess: usize) -> Prepared {
    let cfg = ExecConfig { tess_segments: tess, snap_vertex_radius: 0.0 };
    let Ok(exec) = execute_program(program, &cfg) else { return Prepared::Excluded };
    let Ok(legacy) = to_legacy(program, &exec) else { return Prepared::Excluded };
    match normalized(&exec.final_solid().mesh) {
        Some(gt) => Prepared::Ready { gt, legacy },
        None => Prepared::Excluded,
    }
}

pub fn run_study(models: &[(String, Program)], cfg: &QuantStudyConfig) -> QuantStudy {
    let results: Vec<Result<ModelRow, String>> = models
        .par_iter()
        .enumerate()
        .map(|(i, (name, program))| {
            let Prepared::Ready { gt, legacy } = prepare(program, cfg.tess_segments) else { return Err(name.clone()) };
            let seed = model_seed(cfg.seed, i);
            let mut row = ModelRow { name: name.clone(), pointer: Vec::new(), legacy: Vec::new(), self_noise: 0.0 };
            for &q in &cfg.q_values {
                row.pointer.push(cd_against(&gt, pointer_rebuild(program, q, cfg.tess_segments), cfg.n_samples, seed));
                let lm = encode_legacy(&legacy, &QuantConfig::with_q(q))
                    .ok()
                    .and_then(|s| decode_legacy(&s).ok())
                    .and_then(|p| execute_legacy(&p, &ExecConfig { tess_segments: cfg.tess_segments, snap_vertex_radius: 0.0 }).ok())
                    .map(|e| e.final_solid().mesh.clone());
                row.legacy.push(cd_against(&gt, lm, cfg.n_samples, seed));
            }
            if let (Ok(a), Ok(b)) = (sample_surface(&gt, cfg.n_samples, seed), sample_surface(&gt, cfg.n_samples, !seed)) {
                row.self_noise = chamfer_of_samples(&a, &b);
            }
            Ok(row)
        })
        .collect();
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(name) => excluded.push(name),
        }
    }
    let mut cells = Vec::new();
    for codec in [Codec::Pointer, Codec::Legacy] {
        for (k, &q) in cfg.q_values.iter().enumerate() {
            let vals: Vec<Option<f64>> = rows.iter().map(|r| if codec == Codec::Pointer { r.pointer[k] } else { r.legacy[k] }).collect();
            let ok: Vec<f64> = vals.iter().flatten().copied().collect();
            cells.push(Cell { codec, q, median_cd: median(&ok), valid: ok.len(), invalid: vals.len() - ok.len() });
        }
    }
    QuantStudy { config: cfg.clone(), cells, rows, excluded }
}

impl QuantStudy {
    pub fn median(&self, codec: Codec, q: u32) -> Option<f64> {
        self.cells.iter().find(|c| c.codec == codec && c.q == q).and_then(|c| c.median_cd)
    }

    /// Median over models of the ground-truth self-sampling CD.
    pub fn noise_floor(&self) -> f64 {
        median(&self.rows.iter().map(|r| r.self_noise).collect::<Vec<_>>()).unwrap_or(0.0)
    }

    pub fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["codec", "q", "median_cd", "valid", "invalid"])?;
        for c in &self.cells {
            w.write_record([
                c.codec.name().to_string(),
                c.q.to_string(),
                c.median_cd.map(sig6).unwrap_or_default(),
                c.valid.to_string(),
                c.invalid.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per model: name, self-noise, then pointer and legacy CD per q.
    pub fn write_rows_csv(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["name".to_string(), "self_noise".to_string()];
        for codec in [Codec::Pointer, Codec::Legacy] {
            header.extend(self.config.q_values.iter().map(|q| format!("{}_{q}", codec.name())));
        }
        w.write_record(&header)?;
        let cell = |v: &Option<f64>| v.map(sig6).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![r.name.clone(), sig6(r.self_noise)];
            rec.extend(r.pointer.iter().map(cell));
            rec.extend(r.legacy.iter().map(cell));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
