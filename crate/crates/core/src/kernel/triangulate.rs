//! Ear clipping for simple polygons with holes.

use robust::{orient2d, Coord};

use crate::Vec2;

fn c(p: &Vec2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

fn orient(a: &Vec2, b: &Vec2, p: &Vec2) -> f64 {
    orient2d(c(a), c(b), c(p))
}

pub fn signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

/// Triangulates `outer` (counter-clockwise) with clockwise `holes`.
///
/// Indices refer to the concatenation of `outer` followed by each hole.
/// Triangles are counter-clockwise.
pub fn triangulate(outer: &[Vec2], holes: &[Vec<Vec2>]) -> Vec<[usize; 3]> {
    let mut pts: Vec<Vec2> = outer.to_vec();
    let mut ring: Vec<usize> = (0..outer.len()).collect();
    let mut hole_rings: Vec<Vec<usize>> = Vec::new();
    for h in holes {
        let base = pts.len();
        pts.extend_from_slice(h);
        hole_rings.push((base..base + h.len()).collect());
    }
    let max_x = |r: &Vec<usize>| r.iter().map(|&i| pts[i].x).fold(f64::NEG_INFINITY, f64::max);
    hole_rings.sort_by(|a, b| max_x(b).total_cmp(&max_x(a)));
    for h in &hole_rings {
        bridge(&pts, &mut ring, h);
    }
    clip_ears(&pts, ring)
}

/// Splices `hole` into `ring` through a mutually visible vertex pair.
fn bridge(pts: &[Vec2], ring: &mut Vec<usize>, hole: &[usize]) {
    let (hk, &m) = hole
        .iter()
        .enumerate()
        .max_by(|a, b| pts[*a.1].x.total_cmp(&pts[*b.1].x).then(pts[*b.1].y.total_cmp(&pts[*a.1].y)))
        .expect("hole has vertices");
    let mp = pts[m];
    let n = ring.len();
    // Nearest crossing of the +x ray from M with the ring.
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let (a, b) = (pts[ring[i]], pts[ring[(i + 1) % n]]);
        if (a.y > mp.y) == (b.y > mp.y) && a.y != mp.y && b.y != mp.y {
            continue;
        }
        if a.y == b.y {
            if a.y == mp.y {
                for (k, p) in [(i, a), ((i + 1) % n, b)] {
                    if p.x >= mp.x && best.map_or(true, |(bx, _)| p.x - mp.x < bx) {
                        best = Some((p.x - mp.x, k));
                    }
                }
            }
            continue;
        }
        let t = (mp.y - a.y) / (b.y - a.y);
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let x = a.x + t * (b.x - a.x);
        if x < mp.x {
            continue;
        }
        // Keep crossings on edges that face the ray from the inside.
        if orient(&a, &b, &mp) < 0.0 {
            continue;
        }
        let k = if a.x > b.x { i } else { (i + 1) % n };
        if best.map_or(true, |(bx, _)| x - mp.x < bx) {
            best = Some((x - mp.x, k));
        }
    }
    let vis = match best {
        None => (0..n).min_by(|&a, &b| (pts[ring[a]] - mp).norm().total_cmp(&(pts[ring[b]] - mp).norm())).unwrap(),
        Some((dx, k)) => {
            let ip = Vec2::new(mp.x + dx, mp.y);
            let pp = pts[ring[k]];
            if pp == ip {
                k
            } else {
                // Reflex vertices inside (M, I, P) can block P; take the one
                // with the smallest angle to the ray.
                let mut cand = k;
                let mut best_key = (f64::INFINITY, f64::INFINITY);
                for j in 0..n {
                    let q = pts[ring[j]];
                    if j == k || q == mp {
                        continue;
                    }
                    let prev = pts[ring[(j + n - 1) % n]];
                    let next = pts[ring[(j + 1) % n]];
                    if orient(&prev, &q, &next) > 0.0 {
                        continue;
                    }
                    if in_triangle(&mp, &ip, &pp, &q) {
                        let d = q - mp;
                        let key = ((d.y.abs()).atan2(d.x), d.norm());
                        if key < best_key {
                            best_key = key;
                            cand = j;
                        }
                    }
                }
                cand
            }
        }
    };
    let mut spliced = Vec::with_capacity(ring.len() + hole.len() + 2);
    spliced.extend_from_slice(&ring[..=vis]);
    for k in 0..=hole.len() {
        spliced.push(hole[(hk + k) % hole.len()]);
    }
    spliced.push(ring[vis]);
    spliced.extend_from_slice(&ring[vis + 1..]);
    *ring = spliced;
}

fn in_triangle(a: &Vec2, b: &Vec2, c: &Vec2, p: &Vec2) -> bool {
    let s = orient(a, b, c).signum();
    if s == 0.0 {
        return false;
    }
    orient(a, b, p) * s >= 0.0 && orient(b, c, p) * s >= 0.0 && orient(c, a, p) * s >= 0.0
}

fn clip_ears(pts: &[Vec2], mut ring: Vec<usize>) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(ring.len().saturating_sub(2));
    let mut start = 0;
    while ring.len() > 3 {
        let n = ring.len();
        let mut clipped = None;
        for s in 0..n {
            let i = (start + s) % n;
            let (ip, inx) = ((i + n - 1) % n, (i + 1) % n);
            let (a, b, cc) = (pts[ring[ip]], pts[ring[i]], pts[ring[inx]]);
            if orient(&a, &b, &cc) <= 0.0 {
                continue;
            }
            let blocked = (0..n).any(|j| {
                if j == i || j == ip || j == inx {
                    return false;
                }
                let q = pts[ring[j]];
                if q == a || q == b || q == cc {
                    return false;
                }
                in_triangle(&a, &b, &cc, &q)
            });
            if !blocked {
                clipped = Some(i);
                break;
            }
        }
        // Numerically stuck: take the most convex corner.
        let i = clipped.unwrap_or_else(|| {
            (0..n)
                .max_by(|&x, &y| {
                    let o = |i: usize| orient(&pts[ring[(i + n - 1) % n]], &pts[ring[i]], &pts[ring[(i + 1) % n]]);
                    o(x).total_cmp(&o(y))
                })
                .unwrap()
        });
        out.push([ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]]);
        ring.remove(i);
        start = if i == 0 { 0 } else { i - 1 };
    }
    if ring.len() == 3 {
        out.push([ring[0], ring[1], ring[2]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(pts: &[Vec2], tris: &[[usize; 3]]) -> f64 {
        tris.iter().map(|t| signed_area(&[pts[t[0]], pts[t[1]], pts[t[2]]])).sum()
    }

    fn square(c: f64, r: f64, ccw: bool) -> Vec<Vec2> {
        let mut v = vec![Vec2::new(c - r, c - r), Vec2::new(c + r, c - r), Vec2::new(c + r, c + r), Vec2::new(c - r, c + r)];
        if !ccw {
            v.reverse();
        }
        v
    }

    #[test]
    fn convex_and_flat_vertices() {
        let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        let t = triangulate(&pts, &[]);
        assert_eq!(t.len(), 3);
        assert!((area(&pts, &t) - 1.0).abs() < 1e-15);
        assert!(t.iter().all(|t| signed_area(&[pts[t[0]], pts[t[1]], pts[t[2]]]) > 0.0));
    }

    #[test]
    fn l_shape() {
        let pts: Vec<Vec2> = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
            .iter()
            .map(|&(x, y)| Vec2::new(x, y))
            .collect();
        let t = triangulate(&pts, &[]);
        assert_eq!(t.len(), 4);
        assert!((area(&pts, &t) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn square_with_two_holes() {
        let outer = square(0.0, 2.0, true);
        let holes = vec![square(-1.0, 0.5, false), square(1.0, 0.5, false)];
        let t = triangulate(&outer, &holes);
        let mut all = outer.clone();
        for h in &holes {
            all.extend_from_slice(h);
        }
        assert!((area(&all, &t) - (16.0 - 2.0)).abs() < 1e-12);
        assert!(t.iter().all(|t| signed_area(&[all[t[0]], all[t[1]], all[t[2]]]) > 0.0));
        assert_eq!(t.len(), 14);
    }
}
