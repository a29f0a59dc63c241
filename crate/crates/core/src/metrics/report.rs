use std::collections::BTreeMap;

use serde::Serialize;

use super::{invalidity_ratio, MatchCounts, PrimitiveKind};

/// Metrics of one evaluated model. Geometry fields are `None` when the
/// prediction did not build.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelMetrics {
    pub name: String,
    pub built: bool,
    pub cd: Option<f64>,
    pub seg_e: Option<usize>,
    pub flux_ee: Option<f64>,
    pub dang_el: Option<f64>,
    pub sir: Option<f64>,
    #[serde(skip)]
    pub primitives: BTreeMap<PrimitiveKind, MatchCounts>,
}

impl ModelMetrics {
    pub fn failed(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            built: false,
            cd: None,
            seg_e: None,
            flux_ee: None,
            dang_el: None,
            sir: None,
            primitives: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub models: Vec<ModelMetrics>,
    pub ir: f64,
    pub cd_mean: Option<f64>,
    pub cd_median: Option<f64>,
    /// Micro-averaged over all models.
    pub f1: BTreeMap<PrimitiveKind, f64>,
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

impl MetricsReport {
    pub fn new(models: Vec<ModelMetrics>) -> Self {
        let built: Vec<bool> = models.iter().map(|m| m.built).collect();
        let cds: Vec<f64> = models.iter().filter_map(|m| m.cd).collect();
        let cd_mean = (!cds.is_empty()).then(|| cds.iter().sum::<f64>() / cds.len() as f64);
        let mut f1 = BTreeMap::new();
        for kind in PrimitiveKind::ALL {
            let mut total = MatchCounts::default();
            for m in &models {
                if let Some(c) = m.primitives.get(&kind) {
                    total.add(c);
                }
            }
            f1.insert(kind, total.f1());
        }
        Self { ir: invalidity_ratio(&built), cd_mean, cd_median: median(&cds), f1, models }
    }
}
