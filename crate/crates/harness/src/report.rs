//! Scores predicted programs against ground truth and writes reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cadseq_core::grammar::Program;
use cadseq_core::kernel::{ExecConfig, Execution};
use cadseq_core::metrics::{
    chamfer_distance, dangling_edge_length, extract_primitives, flux_enclosure_error, match_primitives, seg_error,
    self_intersection_ratio, MetricsReport, ModelMetrics, Normalization, PrimitiveKind,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::format::sig6;
use crate::pipeline::{build_program, build_stream, read_program, read_stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub seg_thresh_deg: f64,
    pub f1_tol: f64,
    pub tess_segments: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            n_samples: cadseq_core::metrics::CD_SAMPLES,
            seed: 0,
            seg_thresh_deg: cadseq_core::metrics::SEG_THRESHOLD_DEG,
            f1_tol: cadseq_core::metrics::F1_TOL,
            tess_segments: 64,
        }
    }
}

/// Metrics of one prediction; `pred` is `None` when it failed to build.
pub fn score(name: &str, pred: Option<(&Program, &Execution)>, gt: (&Program, &Execution), cfg: &MetricsConfig, seed: u64) -> ModelMetrics {
    let gt_mesh = &gt.1.final_solid().mesh;
    let nz = Normalization::of_mesh(gt_mesh);
    let gt_prims = extract_primitives(gt.0, gt.1, &nz);
    let pred_prims = pred.map(|(p, e)| extract_primitives(p, e, &nz)).unwrap_or_default();
    let primitives: BTreeMap<_, _> =
        PrimitiveKind::ALL.into_iter().map(|k| (k, match_primitives(&pred_prims, &gt_prims, k, cfg.f1_tol))).collect();
    let Some((_, pe)) = pred else {
        return ModelMetrics { primitives, ..ModelMetrics::failed(name) };
    };
    let (Ok(a), Ok(b)) = (pe.final_solid().mesh.normalize_to_unit_box(), gt_mesh.normalize_to_unit_box()) else {
        return ModelMetrics { primitives, ..ModelMetrics::failed(name) };
    };
    ModelMetrics {
        name: name.to_string(),
        built: true,
        cd: chamfer_distance(&b, &a, cfg.n_samples, seed).ok(),
        seg_e: Some(seg_error(&a, &b, cfg.seg_thresh_deg)),
        flux_ee: Some(flux_enclosure_error(&a)),
        dang_el: Some(dangling_edge_length(&a)),
        sir: Some(self_intersection_ratio(&a)),
        primitives,
    }
}

pub struct Pair {
    pub name: String,
    pub pred: PathBuf,
    pub gt: PathBuf,
}

/// Pairs `<name>.seq.json` in `pred_dir` with `<name>.program.json` (or
/// `<name>.seq.json`) in `gt_dir`. Unpaired names are returned separately.
pub fn pair_dirs(pred_dir: &Path, gt_dir: &Path) -> anyhow::Result<(Vec<Pair>, Vec<String>)> {
    let mut names = Vec::new();
    for entry in fs::read_dir(pred_dir)? {
        let file = entry?.file_name().to_string_lossy().to_string();
        if let Some(name) = file.strip_suffix(".seq.json") {
            names.push(name.to_string());
        }
    }
    names.sort();
    let mut pairs = Vec::new();
    let mut missing = Vec::new();
    for name in names {
        let program = gt_dir.join(format!("{name}.program.json"));
        let seq = gt_dir.join(format!("{name}.seq.json"));
        let gt = if program.exists() {
            program
        } else if seq.exists() {
            seq
        } else {
            missing.push(name);
            continue;
        };
        pairs.push(Pair { pred: pred_dir.join(format!("{name}.seq.json")), gt, name });
    }
    Ok((pairs, missing))
}

fn load_gt(path: &Path, cfg: &ExecConfig) -> anyhow::Result<(Program, Execution)> {
    if path.to_string_lossy().ends_with(".program.json") {
        let p = read_program(path)?;
        let e = build_program(&p, cfg)?;
        Ok((p, e))
    } else {
        Ok(build_stream(&read_stream(path)?, cfg)?)
    }
}

pub fn evaluate_dirs(pred_dir: &Path, gt_dir: &Path, cfg: &MetricsConfig) -> anyhow::Result<(MetricsReport, Vec<String>)> {
    let (pairs, mut missing) = pair_dirs(pred_dir, gt_dir)?;
    let exec_cfg = ExecConfig { tess_segments: cfg.tess_segments, snap_vertex_radius: 0.0 };
    let rows: Vec<Option<ModelMetrics>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, pair)| {
            let gt = load_gt(&pair.gt, &exec_cfg).ok()?;
            let pred = read_stream(&pair.pred).and_then(|s| build_stream(&s, &exec_cfg)).ok();
            let seed = crate::corpus::model_seed(cfg.seed, i);
            Some(score(&pair.name, pred.as_ref().map(|(p, e)| (p, e)), (&gt.0, &gt.1), cfg, seed))
        })
        .collect();
    let mut models = Vec::new();
    for (pair, row) in pairs.iter().zip(rows) {
        match row {
            Some(m) => models.push(m),
            None => missing.push(pair.name.clone()),
        }
    }
    Ok((MetricsReport::new(models), missing))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-model rows followed by `aggregate,<metric>,<value>` footer rows.
pub fn write_csv(report: &MetricsReport, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
    w.write_record(["name", "built", "cd", "seg_e", "flux_ee", "dang_el", "sir"])?;
    for m in &report.models {
        w.write_record([
            m.name.clone(),
            m.built.to_string(),
            opt(m.cd.map(sig6)),
            opt(m.seg_e),
            opt(m.flux_ee.map(sig6)),
            opt(m.dang_el.map(sig6)),
            opt(m.sir.map(sig6)),
        ])?;
    }
    w.write_record(["aggregate", "ir", &sig6(report.ir)])?;
    w.write_record(["aggregate", "cd_mean", &opt(report.cd_mean.map(sig6))])?;
    w.write_record(["aggregate", "cd_median", &opt(report.cd_median.map(sig6))])?;
    for (k, v) in &report.f1 {
        w.write_record(["aggregate", &format!("f1_{}", k.name()), &sig6(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(report: &MetricsReport, path: &Path) -> anyhow::Result<()> {
    fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}
