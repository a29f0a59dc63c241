use cadseq_core::grammar::build::*;
use cadseq_core::grammar::{BasePlane, BooleanOp, Direction, EntityRef, Point2};
use cadseq_core::kernel::{execute_program, EdgeCurve, ExecConfig, KernelError, Solid};
use cadseq_core::Vec3;

fn cfg() -> ExecConfig {
    ExecConfig::default()
}

fn unit_cube() -> Solid {
    let p = program(vec![box_step(0, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], BooleanOp::New)]);
    execute_program(&p, &cfg()).unwrap().final_solid().clone()
}

fn top_face(s: &Solid, z: f64) -> u64 {
    s.topology
        .faces
        .iter()
        .find(|f| matches!(f.surface, cadseq_core::kernel::AnalyticSurface::Plane { point, normal } if normal.z.abs() > 0.999 && (point.z - z).abs() < 1e-12))
        .unwrap()
        .id
}

fn line_edge(s: &Solid, a: Vec3, b: Vec3) -> u64 {
    s.topology
        .edges
        .iter()
        .find(|e| match e.curve {
            EdgeCurve::Line { a: p, b: q } => ((p - a).norm() < 1e-9 && (q - b).norm() < 1e-9) || ((p - b).norm() < 1e-9 && (q - a).norm() < 1e-9),
            _ => false,
        })
        .unwrap()
        .id
}

#[test]
fn cube_topology() {
    let s = unit_cube();
    assert!((s.mesh.volume() - 1.0).abs() < 1e-12);
    assert_eq!(s.topology.faces.len(), 6);
    assert_eq!(s.topology.edges.len(), 12);
    assert_eq!(s.topology.adjacency.len(), 12);
    assert!(s.topology.edges.iter().all(|e| matches!(e.curve, EdgeCurve::Line { .. })));
}

#[test]
fn cylinder_cut_volume() {
    let p = program(vec![
        box_step(0, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], BooleanOp::New),
        extrude(vec![sketch(EntityRef::base_plane(1, BasePlane::Top), frame(Direction::ZPos), vec![profile(vec![circle(0.5, 0.5, 0.25)])])], 1.0, 0.0, BooleanOp::Cut),
    ]);
    let s = execute_program(&p, &cfg()).unwrap().final_solid().clone();
    let exact = 1.0 - std::f64::consts::PI * 0.0625;
    assert!((s.mesh.volume() - exact).abs() / exact < 5e-3, "{}", s.mesh.volume());
    assert_eq!(s.topology.faces.len(), 7);
    let circles = s.topology.edges.iter().filter(|e| matches!(e.curve, EdgeCurve::Circle { .. })).count();
    assert_eq!(circles, 2);
    assert_eq!(s.mesh.check_manifold(), Ok(()));
}

#[test]
fn sketch_on_face_pointer() {
    let cube = unit_cube();
    let top = top_face(&cube, 1.0);
    let p = program(vec![
        box_step(0, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], BooleanOp::New),
        extrude(vec![sketch(EntityRef::face(1, top), frame(Direction::ZPos), vec![profile(vec![rect(0.25, 0.25, 0.75, 0.75)])])], 0.5, 0.0, BooleanOp::Join),
    ]);
    let ex = execute_program(&p, &cfg()).unwrap();
    assert!((ex.frames[1][0].origin - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    let s = ex.final_solid();
    assert!((s.mesh.volume() - 1.125).abs() < 1e-12);
    assert_eq!(s.topology.faces.len(), 11);
    let chi = s.mesh.euler_characteristic();
    assert_eq!(chi, 2);
}

#[test]
fn snapping_removes_offset() {
    let cube = unit_cube();
    let edge = line_edge(&cube, Vec3::new(1.0, 0.0, 1.0), Vec3::new(1.0, 1.0, 1.0));
    let top = top_face(&cube, 1.0);
    let mut lp = rect(0.0, 0.0, 0.998, 0.5);
    if let cadseq_core::grammar::Curve::Line { start } = &mut lp.curves[1] {
        *start = Point2::snapped(0.998, 0.0, EntityRef::edge(1, edge));
    }
    let p = program(vec![
        box_step(0, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], BooleanOp::New),
        extrude(vec![sketch(EntityRef::face(1, top), frame(Direction::ZPos), vec![profile(vec![lp])])], 0.5, 0.0, BooleanOp::Join),
    ]);
    let ex = execute_program(&p, &cfg()).unwrap();
    let r = &ex.regions[1][0][0];
    assert!(r.outer().points.iter().any(|q| (q.x - 1.0).abs() < 1e-15 && q.y == 0.0));
}

#[test]
fn stale_pointer_fails() {
    let p = program(vec![
        box_step(0, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], BooleanOp::New),
        extrude(vec![sketch(EntityRef::face(1, 9999), frame(Direction::ZPos), vec![profile(vec![rect(0.0, 0.0, 1.0, 1.0)])])], 0.5, 0.0, BooleanOp::Join),
    ]);
    let err = execute_program(&p, &cfg()).unwrap_err();
    assert_eq!(err.step, 1);
    assert!(err.error.is_pointer_error());
}

#[test]
fn disjoint_intersect_is_empty() {
    let p = program(vec![
        box_step(0, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], BooleanOp::New),
        box_step(1, [3.0, 0.0, 0.0], [4.0, 1.0, 1.0], BooleanOp::Intersect),
    ]);
    assert_eq!(execute_program(&p, &cfg()).unwrap_err().error, KernelError::EmptyResult);
}

#[test]
fn edge_chamfer_and_fillet_volumes() {
    let cube = unit_cube();
    let edge = line_edge(&cube, Vec3::new(1.0, 0.0, 1.0), Vec3::new(1.0, 1.0, 1.0));
    for (is_chamfer, d, exact) in [(true, 0.1, 1.0 - 0.005), (false, 0.1, 1.0 - (1.0 - std::f64::consts::FRAC_PI_4) * 0.01)] {
        let blend = if is_chamfer { chamfer(d, vec![EntityRef::edge(1, edge)]) } else { fillet(d, vec![EntityRef::edge(1, edge)]) };
        let p = program(vec![box_step(0, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], BooleanOp::New), blend]);
        let s = execute_program(&p, &cfg()).unwrap().final_solid().clone();
        assert!((s.mesh.volume() - exact).abs() / exact < 5e-3, "{} vs {exact}", s.mesh.volume());
        assert_eq!(s.topology.faces.len(), 7);
        assert_eq!(s.mesh.check_manifold(), Ok(()));
    }
}

#[test]
fn rim_chamfer_adds_cone() {
    let p0 = program(vec![extrude(
        vec![sketch(EntityRef::base_plane(0, BasePlane::Top), frame(Direction::ZPos), vec![profile(vec![circle(0.0, 0.0, 0.5)])])],
        1.0,
        0.0,
        BooleanOp::New,
    )]);
    let cyl = execute_program(&p0, &cfg()).unwrap().final_solid().clone();
    assert_eq!(cyl.topology.faces.len(), 3);
    let rim = cyl
        .topology
        .edges
        .iter()
        .find(|e| matches!(e.curve, EdgeCurve::Circle { center, .. } if center.z > 0.5))
        .unwrap()
        .id;
    let base = cyl.mesh.volume();
    let (c, r) = (0.1, 0.5);
    let tau = std::f64::consts::TAU;
    let lost_chamfer = c * c / 2.0 * tau * (r - c / 3.0);
    let k = (10.0 - 3.0 * std::f64::consts::PI) / (12.0 - 3.0 * std::f64::consts::PI);
    let lost_fillet = (1.0 - std::f64::consts::FRAC_PI_4) * c * c * tau * (r - k * c);
    for is_chamfer in [true, false] {
        let blend = if is_chamfer { chamfer(c, vec![EntityRef::edge(1, rim)]) } else { fillet(c, vec![EntityRef::edge(1, rim)]) };
        let mut steps = p0.steps.clone();
        steps.push(blend);
        let s = execute_program(&program(steps), &cfg()).unwrap().final_solid().clone();
        assert_eq!(s.mesh.check_manifold(), Ok(()));
        assert_eq!(s.topology.faces.len(), 4);
        let lost = if is_chamfer { lost_chamfer } else { lost_fillet };
        assert!(((base - s.mesh.volume()) - lost).abs() / lost < 2e-2, "{} vs {lost}", base - s.mesh.volume());
        let kind = if is_chamfer { "cone" } else { "torus" };
        assert!(s.topology.faces.iter().any(|f| f.surface.kind() == kind));
    }
}
