//! Profile evaluation: snapping, tessellation and loop normalization.

use robust::{orient2d, Coord};

use crate::grammar::{Curve, Orientation, Point2, Profile};
use crate::Vec2;

use super::triangulate::signed_area;
use super::KernelError;

/// Exact geometry of one source curve in sketch coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveGeom {
    Line { a: Vec2, b: Vec2 },
    Arc { center: Vec2, radius: f64, start: Vec2, end: Vec2, sweep_deg: f64, ccw: bool },
    Circle { center: Vec2, radius: f64 },
}

/// Closed polyline; edge `i` runs from point `i` to point `i + 1` and comes
/// from curve `edge_curve[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionLoop {
    pub points: Vec<Vec2>,
    pub edge_curve: Vec<usize>,
    pub curves: Vec<CurveGeom>,
}

impl RegionLoop {
    pub(crate) fn reverse(&mut self) {
        let n = self.points.len();
        self.points.reverse();
        let old = self.edge_curve.clone();
        for j in 0..n {
            self.edge_curve[j] = old[(2 * n - 2 - j) % n];
        }
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }
}

/// Outer loop (counter-clockwise) first, then clockwise holes.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarRegion {
    pub loops: Vec<RegionLoop>,
}

impl PlanarRegion {
    pub fn area(&self) -> f64 {
        self.loops.iter().map(RegionLoop::signed_area).sum()
    }

    pub fn outer(&self) -> &RegionLoop {
        &self.loops[0]
    }

    pub fn holes(&self) -> &[RegionLoop] {
        &self.loops[1..]
    }
}

/// Segment count for an arc of `sweep_deg` at `segments` per full turn.
pub fn arc_segments(sweep_deg: f64, segments: usize) -> usize {
    ((segments as f64 * sweep_deg / 360.0).ceil() as usize).max(2)
}

/// Center and radius of the arc from `s` to `e` with the given sweep.
pub fn arc_center(s: &Vec2, e: &Vec2, sweep_deg: f64, ccw: bool) -> Option<(Vec2, f64)> {
    let d = e - s;
    let c = d.norm();
    let half = sweep_deg.to_radians() / 2.0;
    if c == 0.0 || half.sin() == 0.0 {
        return None;
    }
    let radius = c / (2.0 * half.sin());
    let h = c / (2.0 * half.tan());
    let left = Vec2::new(-d.y, d.x) / c;
    let m = (s + e) / 2.0;
    Some((if ccw { m + left * h } else { m - left * h }, radius))
}

fn point_of(p: &Point2, resolve: &mut dyn FnMut(&Point2) -> Result<Vec2, KernelError>) -> Result<Vec2, KernelError> {
    if p.snap.is_some() {
        resolve(p)
    } else {
        Ok(Vec2::new(p.x, p.y))
    }
}

/// Evaluates a profile into a normalized region, also returning the profile
/// with snapped coordinates written back.
pub fn evaluate_profile(
    profile: &Profile,
    segments: usize,
    resolve: &mut dyn FnMut(&Point2) -> Result<Vec2, KernelError>,
) -> Result<(PlanarRegion, Profile), KernelError> {
    let mut loops = Vec::new();
    let mut resolved = profile.clone();
    for (li, lp) in profile.loops.iter().enumerate() {
        let mut anchors = Vec::with_capacity(lp.curves.len());
        for (ci, c) in lp.curves.iter().enumerate() {
            let p = point_of(c.anchor(), resolve)?;
            let slot = match &mut resolved.loops[li].curves[ci] {
                Curve::Line { start } | Curve::Arc { start, .. } => start,
                Curve::Circle { center, .. } => center,
            };
            slot.x = p.x;
            slot.y = p.y;
            anchors.push(p);
        }
        loops.push(tessellate_loop(&lp.curves, &anchors, segments)?);
    }
    let region = normalize(loops)?;
    Ok((region, resolved))
}

fn tessellate_loop(curves: &[Curve], anchors: &[Vec2], segments: usize) -> Result<RegionLoop, KernelError> {
    let mut points = Vec::new();
    let mut edge_curve = Vec::new();
    let mut geoms = Vec::new();
    if let [Curve::Circle { radius, .. }] = curves {
        if !(*radius > 0.0) {
            return Err(KernelError::DegenerateProfile);
        }
        let c = anchors[0];
        for k in 0..segments {
            let t = std::f64::consts::TAU * k as f64 / segments as f64;
            points.push(c + Vec2::new(t.cos(), t.sin()) * *radius);
            edge_curve.push(0);
        }
        geoms.push(CurveGeom::Circle { center: c, radius: *radius });
        return Ok(RegionLoop { points, edge_curve, curves: geoms });
    }
    let n = curves.len();
    for (i, c) in curves.iter().enumerate() {
        let s = anchors[i];
        let e = anchors[(i + 1) % n];
        points.push(s);
        edge_curve.push(i);
        match c {
            Curve::Line { .. } => geoms.push(CurveGeom::Line { a: s, b: e }),
            Curve::Arc { sweep, orientation, .. } => {
                let ccw = *orientation == Orientation::CounterClockwise;
                let (center, radius) = arc_center(&s, &e, *sweep, ccw).ok_or(KernelError::DegenerateProfile)?;
                let a0 = (s - center).y.atan2((s - center).x);
                let m = arc_segments(*sweep, segments);
                let step = sweep.to_radians() / m as f64 * if ccw { 1.0 } else { -1.0 };
                for k in 1..m {
                    let a = a0 + step * k as f64;
                    points.push(center + Vec2::new(a.cos(), a.sin()) * radius);
                    edge_curve.push(i);
                }
                geoms.push(CurveGeom::Arc { center, radius, start: s, end: e, sweep_deg: *sweep, ccw });
            }
            Curve::Circle { .. } => return Err(KernelError::DegenerateProfile),
        }
    }
    Ok(RegionLoop { points, edge_curve, curves: geoms })
}

fn c2(p: &Vec2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

fn on_segment(a: &Vec2, b: &Vec2, p: &Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection with exact orientation tests.
pub fn segments_intersect(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let o1 = orient2d(c2(a), c2(b), c2(c));
    let o2 = orient2d(c2(a), c2(b), c2(d));
    let o3 = orient2d(c2(c), c2(d), c2(a));
    let o4 = orient2d(c2(c), c2(d), c2(b));
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Even-odd point-in-polygon.
pub fn point_in_polygon(p: &Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let o = orient2d(c2(&a), c2(&b), c2(p));
            if (o > 0.0) == (b.y > a.y) {
                inside = !inside;
            }
        }
    }
    inside
}

fn loop_is_simple(l: &RegionLoop) -> bool {
    let p = &l.points;
    let n = p.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        if a == b {
            return false;
        }
        // Fold-back between consecutive edges.
        let c = p[(i + 2) % n];
        if orient2d(c2(&a), c2(&b), c2(&c)) == 0.0 && (c - b).dot(&(a - b)) > 0.0 {
            return false;
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(&a, &b, &p[j], &p[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

fn loops_cross(a: &RegionLoop, b: &RegionLoop) -> bool {
    let (p, q) = (&a.points, &b.points);
    for i in 0..p.len() {
        for j in 0..q.len() {
            if segments_intersect(&p[i], &p[(i + 1) % p.len()], &q[j], &q[(j + 1) % q.len()]) {
                return true;
            }
        }
    }
    false
}

fn normalize(mut loops: Vec<RegionLoop>) -> Result<PlanarRegion, KernelError> {
    for l in &loops {
        if !loop_is_simple(l) {
            return Err(KernelError::SelfIntersectingLoop);
        }
        if l.signed_area().abs() <= 1e-14 {
            return Err(KernelError::DegenerateProfile);
        }
    }
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            if loops_cross(&loops[i], &loops[j]) {
                return Err(KernelError::AmbiguousRegion);
            }
        }
    }
    let outer = (0..loops.len())
        .max_by(|&a, &b| loops[a].signed_area().abs().total_cmp(&loops[b].signed_area().abs()))
        .ok_or(KernelError::DegenerateProfile)?;
    let outer_loop = loops.remove(outer);
    for h in &loops {
        if !point_in_polygon(&h.points[0], &outer_loop.points) {
            return Err(KernelError::AmbiguousRegion);
        }
    }
    for i in 0..loops.len() {
        for j in 0..loops.len() {
            if i != j && point_in_polygon(&loops[i].points[0], &loops[j].points) {
                return Err(KernelError::AmbiguousRegion);
            }
        }
    }
    let mut out = vec![outer_loop];
    out.extend(loops);
    for (k, l) in out.iter_mut().enumerate() {
        let ccw = l.signed_area() > 0.0;
        if ccw != (k == 0) {
            l.reverse();
        }
    }
    Ok(PlanarRegion { loops: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Loop;

    fn no_snap(_: &Point2) -> Result<Vec2, KernelError> {
        unreachable!()
    }

    fn poly(pts: &[(f64, f64)]) -> Loop {
        Loop { curves: pts.iter().map(|&(x, y)| Curve::Line { start: Point2::new(x, y) }).collect() }
    }

    #[test]
    fn circle_area() {
        let prof = Profile { loops: vec![Loop { curves: vec![Curve::Circle { center: Point2::new(0.0, 0.0), radius: 1.0 }] }] };
        let (r, _) = evaluate_profile(&prof, 64, &mut no_snap).unwrap();
        let exact = 32.0 * (std::f64::consts::TAU / 64.0).sin();
        assert!((r.area() - exact).abs() < 1e-12);
        assert!((r.area() - std::f64::consts::PI).abs() / std::f64::consts::PI < 2e-3);
    }

    #[test]
    fn square_clockwise_input_is_reoriented() {
        let prof = Profile { loops: vec![poly(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)])] };
        let (r, _) = evaluate_profile(&prof, 64, &mut no_snap).unwrap();
        assert!((r.area() - 1.0).abs() < 1e-15);
        let l = r.outer();
        for i in 0..4 {
            let CurveGeom::Line { a, b } = l.curves[l.edge_curve[i]] else { panic!() };
            let (p, q) = (l.points[i], l.points[(i + 1) % 4]);
            assert!((p == a && q == b) || (p == b && q == a));
        }
    }

    #[test]
    fn washer_and_errors() {
        let hole = Loop { curves: vec![Curve::Circle { center: Point2::new(0.5, 0.5), radius: 0.25 }] };
        let prof = Profile { loops: vec![hole.clone(), poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])] };
        let (r, _) = evaluate_profile(&prof, 64, &mut no_snap).unwrap();
        assert!(r.outer().signed_area() > 0.0 && r.holes()[0].signed_area() < 0.0);
        let bow = Profile { loops: vec![poly(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)])] };
        assert_eq!(evaluate_profile(&bow, 64, &mut no_snap).unwrap_err(), KernelError::SelfIntersectingLoop);
        let outside = Profile {
            loops: vec![poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]), Loop {
                curves: vec![Curve::Circle { center: Point2::new(3.0, 0.5), radius: 0.25 }],
            }],
        };
        assert_eq!(evaluate_profile(&outside, 64, &mut no_snap).unwrap_err(), KernelError::AmbiguousRegion);
    }

    #[test]
    fn arc_slot() {
        // Stadium: two lines and two half circles of radius 0.5.
        let lp = Loop {
            curves: vec![
                Curve::Line { start: Point2::new(0.0, 0.0) },
                Curve::Arc { start: Point2::new(2.0, 0.0), sweep: 180.0, orientation: Orientation::CounterClockwise },
                Curve::Line { start: Point2::new(2.0, 1.0) },
                Curve::Arc { start: Point2::new(0.0, 1.0), sweep: 180.0, orientation: Orientation::CounterClockwise },
            ],
        };
        let (r, _) = evaluate_profile(&Profile { loops: vec![lp] }, 64, &mut no_snap).unwrap();
        let exact = 2.0 + 8.0 * (std::f64::consts::PI / 32.0).sin();
        assert!((r.area() - exact).abs() < 1e-12, "{} {}", r.area(), exact);
        let CurveGeom::Arc { center, radius, .. } = r.outer().curves[1] else { panic!() };
        assert!((center - Vec2::new(2.0, 0.5)).norm() < 1e-15 && (radius - 0.5).abs() < 1e-15);
    }

    #[test]
    fn snapped_point_uses_resolver() {
        let mut lp = poly(&[(0.0, 0.0), (0.998, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        if let Curve::Line { start } = &mut lp.curves[1] {
            start.snap = Some(crate::grammar::EntityRef::edge(0, 7));
        }
        let mut snap = |p: &Point2| Ok(Vec2::new(1.0, p.y));
        let (r, resolved) = evaluate_profile(&Profile { loops: vec![lp] }, 64, &mut snap).unwrap();
        assert_eq!(r.outer().points[1], Vec2::new(1.0, 0.0));
        assert_eq!(resolved.loops[0].curves[1].anchor().x, 1.0);
        assert!(resolved.loops[0].curves[1].anchor().snap.is_some());
    }
}
