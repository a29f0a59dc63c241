use ndarray::{Array1, ArrayView1, ArrayView2};

use super::{norm, softplus, NeuralError};

/// Upper clip on the logit scale `s = 1/τ`.
pub const MAX_LOGIT_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub alpha: f64,
    pub n_classes: usize,
    /// Learnable `log s`.
    pub log_scale: f64,
    pub lambda_v: f64,
    pub lambda_p: f64,
}

impl LossConfig {
    pub fn new(alpha: f64, n_classes: usize) -> Self {
        Self { alpha, n_classes, log_scale: (1.0f64 / 0.07).ln(), lambda_v: 0.5, lambda_p: 0.5 }
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp().min(MAX_LOGIT_SCALE)
    }

    pub fn tau(&self) -> f64 {
        1.0 / self.scale()
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.n_classes < 2 {
            return Err(NeuralError::Config(format!("{} classes", self.n_classes)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(NeuralError::Config(format!("smoothing {}", self.alpha)));
        }
        if !(self.lambda_v >= 0.0 && self.lambda_p >= 0.0) {
            return Err(NeuralError::Config("negative loss weight".into()));
        }
        if !self.log_scale.is_finite() {
            return Err(NeuralError::Config("non-finite temperature".into()));
        }
        Ok(())
    }

    pub fn total(&self, l_v: f64, l_p: f64) -> f64 {
        total_loss(l_v, l_p, self.lambda_v, self.lambda_p)
    }
}

/// `log σ(x)`.
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let m = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let e = logits.mapv(|x| (x - m).exp());
    let z = e.sum();
    e / z
}

fn log_softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let m = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lse = m + logits.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    logits.mapv(|x| x - lse)
}

fn smoothing_weights(n: usize, y: usize, alpha: f64) -> impl Fn(usize) -> f64 {
    let off = alpha / (n - 1) as f64;
    move |i| if i == y { 1.0 - alpha } else { off }
}

fn check_label(logits: ArrayView1<f64>, y: usize, alpha: f64, n: usize) -> Result<(), NeuralError> {
    if n < 2 {
        return Err(NeuralError::Config(format!("{n} classes")));
    }
    if logits.len() != n {
        return Err(NeuralError::Shape(format!("{} logits for {n} classes", logits.len())));
    }
    if y >= n {
        return Err(NeuralError::Config(format!("target {y} outside {n} classes")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(NeuralError::Config(format!("smoothing {alpha}")));
    }
    Ok(())
}

/// Label-smoothed cross-entropy.
pub fn label_value_loss(logits: ArrayView1<f64>, y: usize, alpha: f64, n: usize) -> Result<f64, NeuralError> {
    label_value_loss_grad(logits, y, alpha, n).map(|(l, _)| l)
}

/// Loss and its gradient with respect to the logits.
pub fn label_value_loss_grad(
    logits: ArrayView1<f64>,
    y: usize,
    alpha: f64,
    n: usize,
) -> Result<(f64, Array1<f64>), NeuralError> {
    check_label(logits, y, alpha, n)?;
    let w = smoothing_weights(n, y, alpha);
    let lp = log_softmax(logits);
    let loss = -lp.iter().enumerate().map(|(i, l)| w(i) * l).sum::<f64>();
    let grad = Array1::from_iter(lp.iter().enumerate().map(|(i, l)| l.exp() - w(i)));
    Ok((loss, grad))
}

fn cosine(p: ArrayView1<f64>, c: ArrayView1<f64>) -> f64 {
    let d = norm(p) * norm(c);
    if d > 0.0 {
        p.dot(&c) / d
    } else {
        0.0
    }
}

fn check_pointer(p: ArrayView1<f64>, cands: ArrayView2<f64>, pos: &[usize], neg: &[usize]) -> Result<(), NeuralError> {
    if pos.is_empty() && neg.is_empty() {
        return Err(NeuralError::Config("no positive or negative candidates".into()));
    }
    if cands.ncols() != p.len() {
        return Err(NeuralError::Shape(format!("query width {} vs candidate width {}", p.len(), cands.ncols())));
    }
    if let Some(j) = pos.iter().chain(neg).find(|&&j| j >= cands.nrows()) {
        return Err(NeuralError::Shape(format!("candidate {j} outside {}", cands.nrows())));
    }
    Ok(())
}

/// Contrastive pointer loss at temperature `tau`.
pub fn pointer_loss(
    p: ArrayView1<f64>,
    cands: ArrayView2<f64>,
    pos: &[usize],
    neg: &[usize],
    tau: f64,
) -> Result<f64, NeuralError> {
    if !(tau > 0.0) {
        return Err(NeuralError::Config(format!("temperature {tau}")));
    }
    check_pointer(p, cands, pos, neg)?;
    let s = 1.0 / tau;
    let total: f64 = pos.iter().map(|&j| -log_sigmoid(s * cosine(p, cands.row(j)))).sum::<f64>()
        + neg.iter().map(|&j| softplus(s * cosine(p, cands.row(j)))).sum::<f64>();
    Ok(total / (pos.len() + neg.len()) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointerLossGrad {
    pub loss: f64,
    pub d_p: Array1<f64>,
    pub d_log_scale: f64,
}

/// Pointer loss parameterized by `log s`, with gradients for the query and
/// the log-scale. The gradient through the clip is zero once `s` saturates.
pub fn pointer_loss_grad(
    p: ArrayView1<f64>,
    cands: ArrayView2<f64>,
    pos: &[usize],
    neg: &[usize],
    log_scale: f64,
) -> Result<PointerLossGrad, NeuralError> {
    check_pointer(p, cands, pos, neg)?;
    let raw = log_scale.exp();
    let (s, ds) = if raw < MAX_LOGIT_SCALE { (raw, raw) } else { (MAX_LOGIT_SCALE, 0.0) };
    let m = (pos.len() + neg.len()) as f64;
    let pn = norm(p);
    let mut loss = 0.0;
    let mut d_p = Array1::zeros(p.len());
    let mut d_log_scale = 0.0;
    let terms = pos.iter().map(|&j| (j, true)).chain(neg.iter().map(|&j| (j, false)));
    for (j, positive) in terms {
        let c = cands.row(j);
        let cn = norm(c);
        let cos = cosine(p, c);
        let z = s * cos;
        // dℓ/dz for ℓ = softplus(−z) or softplus(z)
        let (l, dz) = if positive { (softplus(-z), -sigmoid(-z)) } else { (softplus(z), sigmoid(z)) };
        loss += l;
        d_log_scale += dz * cos * ds;
        if pn > 0.0 && cn > 0.0 {
            let dcos = &c / (pn * cn) - &p * (cos / (pn * pn));
            d_p.scaled_add(dz * s, &dcos);
        }
    }
    Ok(PointerLossGrad { loss: loss / m, d_p: d_p / m, d_log_scale: d_log_scale / m })
}

pub fn total_loss(l_v: f64, l_p: f64, lambda_v: f64, lambda_p: f64) -> f64 {
    lambda_v * l_v + lambda_p * l_p
}

/// Largest relative deviation between the analytic gradient returned by `f`
/// at `x` and central differences of step `h`.
pub fn grad_check<F>(f: F, x: &[f64], h: f64) -> f64
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (_, analytic) = f(x);
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe).0;
        probe[i] = x[i] - h;
        let down = f(&probe).0;
        probe[i] = x[i];
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let scale = a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((a - numeric).abs() / scale);
    }
    worst
}
