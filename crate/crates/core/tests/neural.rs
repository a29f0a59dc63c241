use cadseq_core::neural::*;
use ndarray::{arr1, arr2, Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_layer(dim: usize) -> GnnLayer {
    GnnLayer {
        phi: Mlp::identity(dim),
        psi: Mlp::identity(dim),
        eps: 0.5,
        gamma: 0.25,
        f_theta: Linear::identity(dim),
        f_xi: Linear::identity(dim),
        attn: MhaParams::identity(dim, 1),
    }
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

#[test]
fn two_node_toy_layer() {
    let nodes = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
    let edges = arr2(&[[1.0, 2.0]]);
    let (n, e) = gnn_layer(nodes.view(), edges.view(), &[(0, 1)], &toy_layer(2)).unwrap();
    let want_n = arr2(&[[1.5, 2.0], [1.0, 1.5]]);
    let want_e = [3.580238450673343074, 6.169761549326656926];
    for (a, b) in n.iter().zip(want_n.iter()) {
        assert!((a - b).abs() < 1e-10);
    }
    for (a, b) in e.iter().zip(want_e) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn no_edges_reduces_to_scaled_self() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let layer = GnnLayer::random(8, 16, 2, &mut rng);
    let nodes = random_matrix(3, 8, &mut rng);
    let edges = Array2::zeros((0, 8));
    let (n, e) = gnn_layer(nodes.view(), edges.view(), &[], &layer).unwrap();
    let want = layer.phi.forward((&nodes * (1.0 + layer.eps)).view()).unwrap();
    assert_eq!(n, want);
    assert_eq!(e.nrows(), 0);
}

#[test]
fn zero_gate_ignores_neighbours() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut layer = GnnLayer::random(8, 16, 2, &mut rng);
    layer.eps = 0.3;
    layer.f_theta = Linear::zeros(8, 8);
    let nodes = random_matrix(3, 8, &mut rng);
    let edges = random_matrix(2, 8, &mut rng);
    let (n, _) = gnn_layer(nodes.view(), edges.view(), &[(0, 1), (1, 2)], &layer).unwrap();
    let want = layer.phi.forward((&nodes * 1.3).view()).unwrap();
    assert_eq!(n, want);
}

#[test]
fn zero_attention_and_psi_keep_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut layer = GnnLayer::random(8, 16, 2, &mut rng);
    layer.attn.o = Linear::zeros(8, 8);
    layer.psi.l2 = Linear::zeros(8, 16);
    let nodes = random_matrix(4, 8, &mut rng);
    let edges = random_matrix(3, 8, &mut rng);
    let (_, e) = gnn_layer(nodes.view(), edges.view(), &[(0, 1), (1, 2), (2, 3)], &layer).unwrap();
    assert_eq!(e, edges);
}

#[test]
fn zero_layers_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let nodes = random_matrix(3, 128, &mut rng);
    let edges = random_matrix(2, 128, &mut rng);
    let (n, e) = gnn_forward(nodes.view(), edges.view(), &[(0, 1), (0, 2)], &GnnParams::random(0, 1)).unwrap();
    assert_eq!((n, e), (nodes, edges));
}

#[test]
fn full_width_layers_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let nodes = random_matrix(5, 128, &mut rng);
    let edges = random_matrix(4, 128, &mut rng);
    let params = GnnParams::random(2, 42);
    let (n, e) = gnn_forward(nodes.view(), edges.view(), &[(0, 1), (1, 2), (2, 3), (3, 4)], &params).unwrap();
    assert_eq!((n.dim(), e.dim()), ((5, 128), (4, 128)));
    assert!(n.iter().chain(e.iter()).all(|x| x.is_finite()));
}

#[test]
fn shape_errors() {
    let layer = toy_layer(2);
    let nodes = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
    let bad = arr2(&[[1.0, 2.0, 3.0]]);
    assert!(matches!(gnn_layer(nodes.view(), bad.view(), &[(0, 1)], &layer), Err(NeuralError::Shape(_))));
    let e = arr2(&[[1.0, 2.0]]);
    assert!(matches!(gnn_layer(nodes.view(), e.view(), &[(0, 5)], &layer), Err(NeuralError::Shape(_))));
    assert!(matches!(gnn_layer(nodes.view(), e.view(), &[], &layer), Err(NeuralError::Shape(_))));
    let p = MhaParams::identity(2, 3);
    assert!(matches!(mha(nodes.view(), nodes.view(), nodes.view(), &p), Err(NeuralError::Shape(_))));
}

#[test]
fn mha_single_key_returns_value() {
    let q = arr2(&[[0.3, -0.2, 0.5, 0.1]]);
    let v = arr2(&[[2.0, 3.0, -1.0, 0.5]]);
    let out = mha(q.view(), q.view(), v.view(), &MhaParams::identity(4, 2)).unwrap();
    assert_eq!(out, v);
}

#[test]
fn mha_identical_keys_average_values() {
    let q = arr2(&[[0.3, -0.2, 0.5, 0.1]]);
    let k = arr2(&[[1.0, 1.0, 0.0, 2.0], [1.0, 1.0, 0.0, 2.0]]);
    let v = arr2(&[[2.0, 3.0, -1.0, 0.5], [0.0, 1.0, 1.0, 1.5]]);
    let out = mha(q.view(), k.view(), v.view(), &MhaParams::identity(4, 2)).unwrap();
    for (a, b) in out.iter().zip([1.0, 2.0, 0.0, 1.0]) {
        assert!((a - b).abs() < 1e-15);
    }
}

fn project(x: ArrayView2<f64>, l: &Linear) -> Vec<Vec<f64>> {
    (0..x.nrows())
        .map(|r| (0..l.out_dim()).map(|o| l.b[o] + (0..l.in_dim()).map(|i| l.w[[o, i]] * x[[r, i]]).sum::<f64>()).collect())
        .collect()
}

#[test]
fn mha_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = MhaParams::random(8, 2, &mut rng);
    let q = random_matrix(4, 8, &mut rng);
    let k = random_matrix(4, 8, &mut rng);
    let v = random_matrix(4, 8, &mut rng);
    let got = mha(q.view(), k.view(), v.view(), &p).unwrap();

    let (qp, kp, vp) = (project(q.view(), &p.q), project(k.view(), &p.k), project(v.view(), &p.v));
    let hd = 4;
    let mut cat = Array2::zeros((4, 8));
    for h in 0..2 {
        for r in 0..4 {
            let score = |c: usize| (0..hd).map(|t| qp[r][h * hd + t] * kp[c][h * hd + t]).sum::<f64>() / 2.0;
            let z: f64 = (0..4).map(|c| score(c).exp()).sum();
            for t in 0..hd {
                cat[[r, h * hd + t]] = (0..4).map(|c| score(c).exp() / z * vp[c][h * hd + t]).sum();
            }
        }
    }
    let want = project(cat.view(), &p.o);
    for r in 0..4 {
        for c in 0..8 {
            assert!((got[[r, c]] - want[r][c]).abs() < 1e-12);
        }
    }
}

#[test]
fn label_loss_fixtures() {
    let logits = arr1(&[2.0, -1.0, 0.5, 0.0]);
    let p = softmax(logits.view());
    let ce = -p[2].ln();
    assert!((label_value_loss(logits.view(), 2, 0.0, 4).unwrap() - ce).abs() < 1e-12);
    for n in [2, 5, 1000] {
        let l = label_value_loss(Array1::from_elem(n, 0.7).view(), 1, 0.0, n).unwrap();
        assert!((l - (n as f64).ln()).abs() < 1e-12);
    }
    let l = label_value_loss(arr1(&[2.0, 0.0, 0.0]).view(), 0, 0.1, 3).unwrap();
    assert!((l - 0.4395447662218845).abs() < 1e-12);
}

#[test]
fn label_loss_errors_and_stability() {
    assert!(matches!(label_value_loss(arr1(&[1.0]).view(), 0, 0.0, 1), Err(NeuralError::Config(_))));
    assert!(matches!(label_value_loss(arr1(&[1.0, 2.0]).view(), 2, 0.0, 2), Err(NeuralError::Config(_))));
    assert!(matches!(label_value_loss(arr1(&[1.0, 2.0]).view(), 0, 0.0, 3), Err(NeuralError::Shape(_))));
    let (l, g) = label_value_loss_grad(arr1(&[1e4, -1e4, 0.0]).view(), 1, 0.1, 3).unwrap();
    assert!(l.is_finite() && g.iter().all(|x| x.is_finite()));
    let big = label_value_loss(arr1(&[50.0, 0.0, 0.0]).view(), 0, 0.0, 3).unwrap();
    let bigger = label_value_loss(arr1(&[100.0, 0.0, 0.0]).view(), 0, 0.0, 3).unwrap();
    assert!(bigger <= big && big >= 0.0);
}

#[test]
fn pointer_loss_fixtures() {
    let c = arr2(&[[1.0, 0.0, 0.0]]);
    let l = pointer_loss(arr1(&[2.0, 0.0, 0.0]).view(), c.view(), &[0], &[], 0.07).unwrap();
    assert!((l - 6.248747557120382e-7).abs() < 1e-10);
    let l = pointer_loss(arr1(&[0.0, 1.0, 0.0]).view(), c.view(), &[], &[0], 1.0).unwrap();
    assert!((l - 2f64.ln()).abs() < 1e-12);
    let cs = arr2(&[[1.0, 0.0, 0.0], [0.0, 0.0, 3.0], [-2.0, 0.0, 1.0]]);
    let l = pointer_loss(arr1(&[0.0, 1.0, 0.0]).view(), cs.view(), &[0, 2], &[1], 1.0).unwrap();
    assert!((l - 2f64.ln()).abs() < 1e-12);
    assert!(matches!(pointer_loss(arr1(&[1.0, 0.0, 0.0]).view(), c.view(), &[], &[], 1.0), Err(NeuralError::Config(_))));
    let sharp = pointer_loss(arr1(&[1.0, 0.0, 0.0]).view(), arr2(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).view(), &[0], &[1], 0.01).unwrap();
    assert!(sharp >= 0.0 && sharp < 1e-40);
}

#[test]
fn total_loss_weights() {
    assert_eq!(total_loss(0.8, 0.8, 0.5, 0.5), 0.8);
    assert_eq!(total_loss(0.8, 3.0, 0.5, 0.0), 0.4);
    let cfg = LossConfig::new(0.1, 10);
    assert_eq!(cfg.total(1.0, 3.0), 2.0);
    assert!((cfg.tau() - 0.07).abs() < 1e-15);
}

#[test]
fn temperature_is_clipped() {
    let mut cfg = LossConfig::new(0.0, 2);
    for log_s in [-3.0, 0.0, 4.0, 4.6, 4.7, 10.0, 1e3] {
        cfg.log_scale = log_s;
        assert!(cfg.tau() >= 0.01 && cfg.scale() <= MAX_LOGIT_SCALE);
    }
    cfg.n_classes = 1;
    assert!(cfg.validate().is_err());
}

#[test]
fn label_gradient_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let n = rng.random_range(2..12);
        let y = rng.random_range(0..n);
        let alpha = rng.random_range(0.0..0.3);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let f = |z: &[f64]| {
            let (l, g) = label_value_loss_grad(Array1::from(z.to_vec()).view(), y, alpha, n).unwrap();
            (l, g.to_vec())
        };
        assert!(grad_check(f, &x, 1e-5) < 1e-5);
    }
}

#[test]
fn pointer_gradient_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let cands = random_matrix(6, 16, &mut rng);
        let p: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let log_s = rng.random_range(0.0..4.0);
        let (pos, neg) = (vec![0, 3], vec![1, 2, 5]);
        let mut x = p.clone();
        x.push(log_s);
        let f = |z: &[f64]| {
            let g = pointer_loss_grad(Array1::from(z[..16].to_vec()).view(), cands.view(), &pos, &neg, z[16]).unwrap();
            let mut d = g.d_p.to_vec();
            d.push(g.d_log_scale);
            (g.loss, d)
        };
        assert!(grad_check(f, &x, 1e-5) < 1e-4);
        let g = pointer_loss_grad(Array1::from(p.clone()).view(), cands.view(), &pos, &neg, log_s).unwrap();
        let direct = pointer_loss(Array1::from(p).view(), cands.view(), &pos, &neg, (-log_s).exp()).unwrap();
        assert!((g.loss - direct).abs() < 1e-12);
    }
}

#[test]
fn constant_function_has_zero_gradient() {
    assert_eq!(grad_check(|x| (4.0, vec![0.0; x.len()]), &[1.0, -2.0, 3.0], 1e-5), 0.0);
}
