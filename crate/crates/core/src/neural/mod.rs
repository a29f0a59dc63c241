//! Reference forward passes of the graph layer and attention, plus the two
//! training losses with analytic gradients.

mod loss;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub use loss::{
    grad_check, label_value_loss, label_value_loss_grad, log_sigmoid, pointer_loss, pointer_loss_grad, softmax,
    total_loss, LossConfig, PointerLossGrad, MAX_LOGIT_SCALE,
};

pub const FEATURE_DIM: usize = 128;
pub const MLP_HIDDEN: usize = 128;
pub const HEADS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

fn shape_err<T>(msg: impl Into<String>) -> Result<T, NeuralError> {
    Err(NeuralError::Shape(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Softplus,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Softplus => softplus(x),
            Activation::Identity => x,
        }
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Affine map `x W^T + b` on row vectors. `w` is `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Linear {
    pub fn identity(dim: usize) -> Self {
        Self { w: Array2::eye(dim), b: Array1::zeros(dim) }
    }

    pub fn zeros(out: usize, inp: usize) -> Self {
        Self { w: Array2::zeros((out, inp)), b: Array1::zeros(out) }
    }

    pub fn random(out: usize, inp: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = 1.0 / (inp as f64).sqrt();
        let w = Array2::from_shape_simple_fn((out, inp), || {
            let g: f64 = StandardNormal.sample(rng);
            scale * g
        });
        Self { w, b: Array1::zeros(out) }
    }

    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, NeuralError> {
        if x.ncols() != self.in_dim() || self.b.len() != self.out_dim() {
            return shape_err(format!("linear {}→{} applied to width {}", self.in_dim(), self.out_dim(), x.ncols()));
        }
        Ok(x.dot(&self.w.t()) + &self.b)
    }
}

/// Two-layer perceptron; no activation after the second layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub l1: Linear,
    pub l2: Linear,
    pub act: Activation,
}

impl Mlp {
    pub fn identity(dim: usize) -> Self {
        Self { l1: Linear::identity(dim), l2: Linear::identity(dim), act: Activation::Identity }
    }

    pub fn random(dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        Self { l1: Linear::random(hidden, dim, rng), l2: Linear::random(dim, hidden, rng), act: Activation::Softplus }
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, NeuralError> {
        let mut h = self.l1.forward(x)?;
        h.mapv_inplace(|v| self.act.apply(v));
        self.l2.forward(h.view())
    }
}

/// Multi-head attention projections; all maps are `dim × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct MhaParams {
    pub heads: usize,
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
}

impl MhaParams {
    pub fn identity(dim: usize, heads: usize) -> Self {
        Self {
            heads,
            q: Linear::identity(dim),
            k: Linear::identity(dim),
            v: Linear::identity(dim),
            o: Linear::identity(dim),
        }
    }

    pub fn random(dim: usize, heads: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            heads,
            q: Linear::random(dim, dim, rng),
            k: Linear::random(dim, dim, rng),
            v: Linear::random(dim, dim, rng),
            o: Linear::random(dim, dim, rng),
        }
    }
}

/// Scaled dot-product attention per head, concatenated and projected.
pub fn mha(q: ArrayView2<f64>, k: ArrayView2<f64>, v: ArrayView2<f64>, p: &MhaParams) -> Result<Array2<f64>, NeuralError> {
    let dim = p.q.out_dim();
    if p.heads == 0 || dim % p.heads != 0 {
        return shape_err(format!("{} heads do not divide width {dim}", p.heads));
    }
    if k.nrows() != v.nrows() {
        return shape_err(format!("{} keys but {} values", k.nrows(), v.nrows()));
    }
    if k.nrows() == 0 {
        return shape_err("attention over an empty key set");
    }
    let (qp, kp, vp) = (p.q.forward(q)?, p.k.forward(k)?, p.v.forward(v)?);
    if kp.ncols() != dim || vp.ncols() != dim {
        return shape_err("projection widths differ");
    }
    let hd = dim / p.heads;
    let scale = 1.0 / (hd as f64).sqrt();
    let mut cat = Array2::zeros((q.nrows(), dim));
    for h in 0..p.heads {
        let cols = s![.., h * hd..(h + 1) * hd];
        let mut scores = qp.slice(cols).dot(&kp.slice(cols).t()) * scale;
        for mut row in scores.axis_iter_mut(Axis(0)) {
            let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            row.mapv_inplace(|x| (x - m).exp());
            let z = row.sum();
            row /= z;
        }
        cat.slice_mut(cols).assign(&scores.dot(&vp.slice(cols)));
    }
    p.o.forward(cat.view())
}

/// Weights of one message-passing layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnLayer {
    pub phi: Mlp,
    pub psi: Mlp,
    pub eps: f64,
    pub gamma: f64,
    pub f_theta: Linear,
    pub f_xi: Linear,
    pub attn: MhaParams,
}

impl GnnLayer {
    pub fn random(dim: usize, hidden: usize, heads: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            phi: Mlp::random(dim, hidden, rng),
            psi: Mlp::random(dim, hidden, rng),
            eps: 0.0,
            gamma: 0.0,
            f_theta: Linear::random(dim, dim, rng),
            f_xi: Linear::random(dim, dim, rng),
            attn: MhaParams::random(dim, heads, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    pub layers: Vec<GnnLayer>,
}

impl GnnParams {
    /// `k` layers over 128-d features with seeded Gaussian weights.
    pub fn random(k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { layers: (0..k).map(|_| GnnLayer::random(FEATURE_DIM, MLP_HIDDEN, HEADS, &mut rng)).collect() }
    }
}

fn check_graph(nodes: ArrayView2<f64>, edges: ArrayView2<f64>, adjacency: &[(usize, usize)]) -> Result<(), NeuralError> {
    if edges.nrows() != adjacency.len() {
        return shape_err(format!("{} edge features for {} edges", edges.nrows(), adjacency.len()));
    }
    if edges.nrows() > 0 && edges.ncols() != nodes.ncols() {
        return shape_err(format!("node width {} vs edge width {}", nodes.ncols(), edges.ncols()));
    }
    if let Some(&(i, j)) = adjacency.iter().find(|&&(i, j)| i >= nodes.nrows() || j >= nodes.nrows()) {
        return shape_err(format!("edge ({i}, {j}) outside {} nodes", nodes.nrows()));
    }
    Ok(())
}

/// One layer of node and edge updates. `adjacency[e] = (i, j)` is the
/// undirected edge carried by row `e` of `edges`.
pub fn gnn_layer(
    nodes: ArrayView2<f64>,
    edges: ArrayView2<f64>,
    adjacency: &[(usize, usize)],
    layer: &GnnLayer,
) -> Result<(Array2<f64>, Array2<f64>), NeuralError> {
    check_graph(nodes, edges, adjacency)?;
    let dim = nodes.ncols();
    let mut pre = &nodes * (1.0 + layer.eps);
    if !adjacency.is_empty() {
        let gate = layer.f_theta.forward(edges)?;
        if gate.ncols() != dim {
            return shape_err("gate width differs from node width");
        }
        for (e, &(i, j)) in adjacency.iter().enumerate() {
            let g = gate.row(e);
            let mut ri = pre.row_mut(i);
            ri += &(&g * &nodes.row(j));
            if i != j {
                let mut rj = pre.row_mut(j);
                rj += &(&g * &nodes.row(i));
            }
        }
    }
    let new_nodes = layer.phi.forward(pre.view())?;
    if new_nodes.ncols() != dim {
        return shape_err("node MLP changes width");
    }

    if adjacency.is_empty() {
        return Ok((new_nodes, edges.to_owned()));
    }
    let attn = mha(edges, nodes, nodes, &layer.attn)?;
    let mut sums = Array2::zeros(edges.raw_dim());
    for (e, &(i, j)) in adjacency.iter().enumerate() {
        sums.row_mut(e).assign(&(&nodes.row(i) + &nodes.row(j)));
    }
    let psi_in = &edges * (1.0 + layer.gamma) + layer.f_xi.forward(sums.view())?;
    let new_edges = &edges + &attn + layer.psi.forward(psi_in.view())?;
    Ok((new_nodes, new_edges))
}

/// Applies every layer in order; zero layers return the inputs.
pub fn gnn_forward(
    nodes: ArrayView2<f64>,
    edges: ArrayView2<f64>,
    adjacency: &[(usize, usize)],
    params: &GnnParams,
) -> Result<(Array2<f64>, Array2<f64>), NeuralError> {
    check_graph(nodes, edges, adjacency)?;
    let (mut n, mut e) = (nodes.to_owned(), edges.to_owned());
    for layer in &params.layers {
        (n, e) = gnn_layer(n.view(), e.view(), adjacency, layer)?;
    }
    Ok((n, e))
}

pub(crate) fn norm(x: ArrayView1<f64>) -> f64 {
    x.dot(&x).sqrt()
}
