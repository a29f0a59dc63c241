//! Finite-difference checks of the analytic loss gradients on seeded inputs.

use cadseq_core::neural::{grad_check, label_value_loss_grad, pointer_loss_grad};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradReport {
    pub label_value: f64,
    pub pointer: f64,
}

pub const STEP: f64 = 1e-5;

/// Worst relative error over `trials` random problems per loss.
pub fn run(seed: u64, trials: usize) -> GradReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradReport { label_value: 0.0, pointer: 0.0 };
    for _ in 0..trials {
        let n = rng.random_range(2..12);
        let y = rng.random_range(0..n);
        let alpha = rng.random_range(0.0..0.5);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let f = |z: &[f64]| {
            let (l, g) = label_value_loss_grad(Array1::from(z.to_vec()).view(), y, alpha, n).unwrap();
            (l, g.to_vec())
        };
        report.label_value = report.label_value.max(grad_check(f, &x, STEP));

        let dim = 16;
        let m = rng.random_range(2..8);
        let cands = Array2::from_shape_fn((m, dim), |_| rng.random_range(-1.0..1.0));
        let split = rng.random_range(1..m);
        let pos: Vec<usize> = (0..split).collect();
        let neg: Vec<usize> = (split..m).collect();
        let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        x.push(rng.random_range(0.0..4.0));
        let f = |z: &[f64]| {
            let g = pointer_loss_grad(Array1::from(z[..dim].to_vec()).view(), cands.view(), &pos, &neg, z[dim]).unwrap();
            let mut d = g.d_p.to_vec();
            d.push(g.d_log_scale);
            (g.loss, d)
        };
        report.pointer = report.pointer.max(grad_check(f, &x, STEP));
    }
    report
}
