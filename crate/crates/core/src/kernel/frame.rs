use crate::grammar::{BasePlane, Direction, FrameSpec};
use crate::{Vec2, Vec3};

use super::KernelError;

/// Right-handed sketch frame; in-plane coordinates are multiplied by `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub w: Vec3,
    pub scale: f64,
}

impl Frame {
    pub fn world(&self, p: &Vec2) -> Vec3 {
        self.origin + (self.u * p.x + self.v * p.y) * self.scale
    }

    pub fn world_at(&self, p: &Vec2, z: f64) -> Vec3 {
        self.world(p) + self.w * z
    }

    pub fn local(&self, p: &Vec3) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(&self.u), d.dot(&self.v)) / self.scale
    }

    /// Rotation matrix with columns u, v, w.
    pub fn rotation(&self) -> nalgebra::Matrix3<f64> {
        nalgebra::Matrix3::from_columns(&[self.u, self.v, self.w])
    }

    /// Rounds every component to a 1e-9 grid for equality checks.
    pub fn canonical(&self) -> [i64; 13] {
        let r = |x: f64| (x * 1e9).round() as i64;
        let mut out = [0i64; 13];
        let vals = [self.origin, self.u, self.v, self.w];
        for (k, v) in vals.iter().enumerate() {
            for j in 0..3 {
                out[k * 3 + j] = r(v[j]);
            }
        }
        out[12] = r(self.scale);
        out
    }
}

pub fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Plane a sketch can be placed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchPlane {
    pub point: Vec3,
    pub normal: Vec3,
}

impl SketchPlane {
    pub fn base(b: BasePlane) -> Self {
        Self { point: Vec3::zeros(), normal: v3(b.normal()) }
    }
}

/// World point of a frame-origin hint: coordinates on the plane through the
/// world origin orthogonal to n, spanned by (d, n × d).
pub fn hint_basis(dr: Direction) -> (Vec3, Vec3, Vec3) {
    let n = v3(dr.primary());
    let d = v3(dr.auxiliary());
    (n, d, n.cross(&d))
}

pub fn hint_to_world(dr: Direction, p: &Vec2) -> Vec3 {
    let (_, e1, e2) = hint_basis(dr);
    e1 * p.x + e2 * p.y
}

const DEGENERATE: f64 = 1e-9;

/// Places a frame on `plane` from a direction symbol, an already resolved
/// origin hint, a rotation in degrees and a scale.
pub fn build_frame(plane: &SketchPlane, spec: &FrameSpec, hint: &Vec2) -> Result<Frame, KernelError> {
    let (n, d, _) = hint_basis(spec.dr);
    let nf = plane.normal.normalize();
    let dot = nf.dot(&n);
    if dot.abs() < DEGENERATE {
        return Err(KernelError::DegenerateDirection);
    }
    let w0 = if dot > 0.0 { nf } else { -nf };
    let proj = d - w0 * d.dot(&w0);
    if proj.norm() < DEGENERATE {
        return Err(KernelError::DegenerateProjection);
    }
    let u0 = proj.normalize();
    let v0 = w0.cross(&u0);
    let pw = hint_to_world(spec.dr, hint);
    let t = (plane.point - pw).dot(&nf) / n.dot(&nf);
    let origin = pw + n * t;
    let r = spec.rotation.to_radians();
    let (s, c) = r.sin_cos();
    let u = (u0 * c + v0 * s).normalize();
    let v = (v0 * c - u0 * s).normalize();
    let w = u.cross(&v);
    Ok(Frame { origin, u, v, w, scale: spec.scale })
}

/// Z-Y-X intrinsic Euler angles in degrees of a frame rotation.
pub fn euler_zyx(f: &Frame) -> [f64; 3] {
    let r = f.rotation();
    let sy = (-r[(2, 0)]).clamp(-1.0, 1.0);
    let ty = sy.asin();
    let (tz, tx) = if sy.abs() > 1.0 - 1e-12 {
        ((-r[(0, 1)]).atan2(r[(1, 1)]), 0.0)
    } else {
        (r[(1, 0)].atan2(r[(0, 0)]), r[(2, 1)].atan2(r[(2, 2)]))
    };
    [tz.to_degrees(), ty.to_degrees(), tx.to_degrees()]
}

/// Frame from Z-Y-X intrinsic Euler angles (degrees) and a translation.
pub fn frame_from_euler(angles: [f64; 3], translation: [f64; 3]) -> Frame {
    let [z, y, x] = angles.map(f64::to_radians);
    let rz = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), z);
    let ry = nalgebra::Rotation3::from_axis_angle(&Vec3::y_axis(), y);
    let rx = nalgebra::Rotation3::from_axis_angle(&Vec3::x_axis(), x);
    let m = (rz * ry * rx).into_inner();
    Frame { origin: v3(translation), u: m.column(0).into(), v: m.column(1).into(), w: m.column(2).into(), scale: 1.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Point2;

    fn spec(dr: Direction, rotation: f64) -> FrameSpec {
        FrameSpec { dr, origin_hint: Point2::new(0.0, 0.0), rotation, scale: 1.0 }
    }

    #[test]
    fn top_plane_frames() {
        let top = SketchPlane::base(BasePlane::Top);
        let f = build_frame(&top, &spec(Direction::ZPos, 0.0), &Vec2::zeros()).unwrap();
        assert_eq!((f.u, f.v, f.w, f.origin), (Vec3::x(), Vec3::y(), Vec3::z(), Vec3::zeros()));
        let f = build_frame(&top, &spec(Direction::ZPos, 90.0), &Vec2::zeros()).unwrap();
        assert!((f.u - Vec3::y()).norm() < 1e-15);
        assert!((f.v + Vec3::x()).norm() < 1e-15);
    }

    #[test]
    fn origin_projects_along_direction() {
        let face = SketchPlane { point: Vec3::new(0.3, 0.2, 1.0), normal: Vec3::z() };
        let f = build_frame(&face, &spec(Direction::ZPos, 0.0), &Vec2::new(0.25, 0.5)).unwrap();
        assert!((f.origin - Vec3::new(0.25, 0.5, 1.0)).norm() < 1e-15);
        let f = build_frame(&face, &spec(Direction::ZNeg, 0.0), &Vec2::new(0.25, 0.5)).unwrap();
        // Z− uses (Y+, X+) as hint axes; W' still points toward −z.
        assert!((f.origin - Vec3::new(0.5, 0.25, 1.0)).norm() < 1e-15);
        assert!((f.w + Vec3::z()).norm() < 1e-15);
    }

    #[test]
    fn degenerate_directions() {
        let top = SketchPlane::base(BasePlane::Top);
        assert_eq!(build_frame(&top, &spec(Direction::XPos, 0.0), &Vec2::zeros()), Err(KernelError::DegenerateDirection));
        let tilted = SketchPlane { point: Vec3::zeros(), normal: Vec3::new(1.0, 0.0, 1.0).normalize() };
        // Z+ uses X+ as auxiliary, which is not parallel to the tilted normal.
        assert!(build_frame(&tilted, &spec(Direction::ZPos, 0.0), &Vec2::zeros()).is_ok());
        let grazing = SketchPlane { point: Vec3::zeros(), normal: Vec3::new(0.0, 1.0, 1e-12).normalize() };
        assert_eq!(build_frame(&grazing, &spec(Direction::ZPos, 0.0), &Vec2::zeros()), Err(KernelError::DegenerateDirection));
    }

    #[test]
    fn euler_round_trip() {
        for angles in [[0.0, 0.0, 0.0], [30.0, -20.0, 45.0], [90.0, 0.0, 90.0], [-120.0, 60.0, 10.0]] {
            let f = frame_from_euler(angles, [1.0, 2.0, 3.0]);
            let back = frame_from_euler(euler_zyx(&f), [1.0, 2.0, 3.0]);
            assert!((f.rotation() - back.rotation()).norm() < 1e-12);
        }
        let f = frame_from_euler([10.0, 90.0, 0.0], [0.0; 3]);
        let back = frame_from_euler(euler_zyx(&f), [0.0; 3]);
        assert!((f.rotation() - back.rotation()).norm() < 1e-9);
    }
}
