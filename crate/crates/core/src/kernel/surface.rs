use serde_json::{json, Value};

use crate::Vec3;

/// Carrier surface of a face tag.
///
/// `ref_dir` is the angular zero of rotational surfaces; tessellated rings
/// start there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticSurface {
    Plane { point: Vec3, normal: Vec3 },
    Cylinder { axis_point: Vec3, axis_dir: Vec3, radius: f64, ref_dir: Vec3 },
    Cone { apex: Vec3, axis_dir: Vec3, half_angle: f64, ref_dir: Vec3 },
    Torus { center: Vec3, axis_dir: Vec3, major_r: f64, minor_r: f64, ref_dir: Vec3 },
}

pub(crate) fn json_vec(v: &Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

/// Unit vector orthogonal to `n`, chosen from the least aligned world axis.
pub fn any_perpendicular(n: &Vec3) -> Vec3 {
    let a = n.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    (axis - n * n.dot(&axis)).normalize()
}

impl AnalyticSurface {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalyticSurface::Plane { .. } => "plane",
            AnalyticSurface::Cylinder { .. } => "cylinder",
            AnalyticSurface::Cone { .. } => "cone",
            AnalyticSurface::Torus { .. } => "torus",
        }
    }

    pub fn is_plane(&self) -> bool {
        matches!(self, AnalyticSurface::Plane { .. })
    }

    /// Rotation axis (point, unit direction) of non-planar surfaces.
    pub fn axis(&self) -> Option<(Vec3, Vec3)> {
        match *self {
            AnalyticSurface::Plane { .. } => None,
            AnalyticSurface::Cylinder { axis_point, axis_dir, .. } => Some((axis_point, axis_dir)),
            AnalyticSurface::Cone { apex, axis_dir, .. } => Some((apex, axis_dir)),
            AnalyticSurface::Torus { center, axis_dir, .. } => Some((center, axis_dir)),
        }
    }

    fn frame(&self) -> (Vec3, Vec3, Vec3, Vec3) {
        let (o, k, r) = match *self {
            AnalyticSurface::Plane { point, normal } => (point, normal, any_perpendicular(&normal)),
            AnalyticSurface::Cylinder { axis_point, axis_dir, ref_dir, .. } => (axis_point, axis_dir, ref_dir),
            AnalyticSurface::Cone { apex, axis_dir, ref_dir, .. } => (apex, axis_dir, ref_dir),
            AnalyticSurface::Torus { center, axis_dir, ref_dir, .. } => (center, axis_dir, ref_dir),
        };
        (o, k, r, k.cross(&r))
    }

    /// Surface coordinates: plane (x, y); cylinder (θ, h); cone (θ, t);
    /// torus (θ, φ).
    pub fn param(&self, p: &Vec3) -> (f64, f64) {
        let (o, k, e1, e2) = self.frame();
        let d = p - o;
        match *self {
            AnalyticSurface::Plane { .. } => (d.dot(&e1), d.dot(&e2)),
            AnalyticSurface::Cylinder { .. } | AnalyticSurface::Cone { .. } => (d.dot(&e2).atan2(d.dot(&e1)), d.dot(&k)),
            AnalyticSurface::Torus { major_r, .. } => {
                let (x, y, z) = (d.dot(&e1), d.dot(&e2), d.dot(&k));
                let rho = (x * x + y * y).sqrt();
                (y.atan2(x), z.atan2(rho - major_r))
            }
        }
    }

    /// Point and geometric unit normal (pointing away from the axis for
    /// rotational surfaces) at surface coordinates.
    pub fn eval(&self, a: f64, b: f64) -> (Vec3, Vec3) {
        let (o, k, e1, e2) = self.frame();
        match *self {
            AnalyticSurface::Plane { normal, .. } => (o + e1 * a + e2 * b, normal),
            AnalyticSurface::Cylinder { radius, .. } => {
                let r = e1 * a.cos() + e2 * a.sin();
                (o + k * b + r * radius, r)
            }
            AnalyticSurface::Cone { half_angle, .. } => {
                let r = e1 * a.cos() + e2 * a.sin();
                let n = r * half_angle.cos() - k * half_angle.sin();
                (o + k * b + r * (b * half_angle.tan()), n)
            }
            AnalyticSurface::Torus { major_r, minor_r, .. } => {
                let r = e1 * a.cos() + e2 * a.sin();
                let n = r * b.cos() + k * b.sin();
                (o + r * major_r + n * minor_r, n)
            }
        }
    }

    /// Projection of `p` onto the surface with its geometric normal.
    pub fn closest(&self, p: &Vec3) -> (Vec3, Vec3) {
        let (a, b) = self.param(p);
        match *self {
            AnalyticSurface::Plane { normal, .. } => {
                let (q, _) = self.eval(a, b);
                (q, normal)
            }
            _ => self.eval(a, b),
        }
    }

    pub fn gaussian_curvature(&self, p: &Vec3) -> f64 {
        match *self {
            AnalyticSurface::Torus { major_r, minor_r, .. } => {
                let (_, phi) = self.param(p);
                phi.cos() / (minor_r * (major_r + minor_r * phi.cos()))
            }
            _ => 0.0,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnalyticSurface::Plane { point, normal } => json!({"type": "plane", "point": json_vec(point), "normal": json_vec(normal)}),
            AnalyticSurface::Cylinder { axis_point, axis_dir, radius, .. } => {
                json!({"type": "cylinder", "axis_point": json_vec(axis_point), "axis_dir": json_vec(axis_dir), "radius": radius})
            }
            AnalyticSurface::Cone { apex, axis_dir, half_angle, .. } => {
                json!({"type": "cone", "apex": json_vec(apex), "axis_dir": json_vec(axis_dir), "half_angle": half_angle})
            }
            AnalyticSurface::Torus { center, axis_dir, major_r, minor_r, .. } => json!({
                "type": "torus", "center": json_vec(center), "axis_dir": json_vec(axis_dir),
                "major_r": major_r, "minor_r": minor_r
            }),
        }
    }
}
