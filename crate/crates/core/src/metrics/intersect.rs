//! Exact triangle-triangle contact test on floating-point input.

use robust::{orient2d, orient3d, Coord, Coord3D};

use crate::Vec3;

fn c3(p: &Vec3) -> Coord3D<f64> {
    Coord3D { x: p.x, y: p.y, z: p.z }
}

fn o3(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    orient3d(c3(a), c3(b), c3(c), c3(d))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

type P2 = [f64; 2];

fn o2(a: &P2, b: &P2, c: &P2) -> i8 {
    sign(orient2d(Coord { x: a[0], y: a[1] }, Coord { x: b[0], y: b[1] }, Coord { x: c[0], y: c[1] }))
}

fn on_segment(a: &P2, b: &P2, p: &P2) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed segments `ab` and `cd` share a point.
fn segments_touch(a: &P2, b: &P2, c: &P2, d: &P2) -> bool {
    let (d1, d2, d3, d4) = (o2(a, b, c), o2(a, b, d), o2(c, d, a), o2(c, d, b));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(a, b, c))
        || (d2 == 0 && on_segment(a, b, d))
        || (d3 == 0 && on_segment(c, d, a))
        || (d4 == 0 && on_segment(c, d, b))
}

fn point_in_triangle(p: &P2, t: &[P2; 3]) -> bool {
    let s = [o2(&t[0], &t[1], p), o2(&t[1], &t[2], p), o2(&t[2], &t[0], p)];
    !(s.contains(&1) && s.contains(&-1))
}

fn drop_axis(tri: &[Vec3; 3]) -> usize {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
    n.abs().imax()
}

fn project(p: &Vec3, axis: usize) -> P2 {
    match axis {
        0 => [p.y, p.z],
        1 => [p.z, p.x],
        _ => [p.x, p.y],
    }
}

fn coplanar_touch(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let axis = drop_axis(a);
    let pa = a.map(|p| project(&p, axis));
    let pb = b.map(|p| project(&p, axis));
    for i in 0..3 {
        for j in 0..3 {
            if segments_touch(&pa[i], &pa[(i + 1) % 3], &pb[j], &pb[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle(&pa[0], &pb) || point_in_triangle(&pb[0], &pa)
}

/// Closed segment `pq` meets closed triangle `t`.
fn segment_meets(p: &Vec3, q: &Vec3, t: &[Vec3; 3]) -> bool {
    let (sp, sq) = (sign(o3(&t[0], &t[1], &t[2], p)), sign(o3(&t[0], &t[1], &t[2], q)));
    if sp * sq > 0 {
        return false;
    }
    if sp == 0 && sq == 0 {
        let axis = drop_axis(t);
        let tt = t.map(|x| project(&x, axis));
        let (a, b) = (project(p, axis), project(q, axis));
        return point_in_triangle(&a, &tt) || (0..3).any(|i| segments_touch(&a, &b, &tt[i], &tt[(i + 1) % 3]));
    }
    let s = [sign(o3(p, q, &t[0], &t[1])), sign(o3(p, q, &t[1], &t[2])), sign(o3(p, q, &t[2], &t[0]))];
    !(s.contains(&1) && s.contains(&-1))
}

/// Two closed triangles share at least one point.
pub fn triangles_intersect(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let sb = b.map(|p| sign(o3(&a[0], &a[1], &a[2], &p)));
    if sb.iter().all(|&s| s > 0) || sb.iter().all(|&s| s < 0) {
        return false;
    }
    let sa = a.map(|p| sign(o3(&b[0], &b[1], &b[2], &p)));
    if sa.iter().all(|&s| s > 0) || sa.iter().all(|&s| s < 0) {
        return false;
    }
    if sb.iter().all(|&s| s == 0) {
        return coplanar_touch(a, b);
    }
    (0..3).any(|i| segment_meets(&a[i], &a[(i + 1) % 3], b)) || (0..3).any(|i| segment_meets(&b[i], &b[(i + 1) % 3], a))
}
