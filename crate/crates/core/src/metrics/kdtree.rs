use crate::Vec3;

/// Static 3-d tree for nearest-neighbour distance queries.
pub struct KdTree {
    points: Vec<Vec3>,
    axes: Vec<u8>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut points = points.to_vec();
        let mut axes = vec![0u8; points.len()];
        build(&mut points, &mut axes);
        Self { points, axes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Squared distance from `q` to the closest stored point.
    pub fn nearest_sq(&self, q: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        self.search(0, self.points.len(), q, &mut best);
        best
    }

    fn search(&self, lo: usize, hi: usize, q: &Vec3, best: &mut f64) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = &self.points[mid];
        let d = (p - q).norm_squared();
        if d < *best {
            *best = d;
        }
        let axis = self.axes[mid] as usize;
        let delta = q[axis] - p[axis];
        let (near, far) = if delta < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(near.0, near.1, q, best);
        if delta * delta < *best {
            self.search(far.0, far.1, q, best);
        }
    }
}

fn build(points: &mut [Vec3], axes: &mut [u8]) {
    if points.is_empty() {
        return;
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points.iter() {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let axis = (hi - lo).imax();
    let mid = points.len() / 2;
    points.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    axes[mid] = axis as u8;
    let (left, right) = points.split_at_mut(mid);
    let (al, ar) = axes.split_at_mut(mid);
    build(left, al);
    build(&mut right[1..], &mut ar[1..]);
}
