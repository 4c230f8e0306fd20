//! 3D primitives shared by every channel model.
//!
//! Frame convention: z points up, the floor is the plane z = 0 and one room
//! corner sits at the origin.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or free vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector along `self`, or `None` for a zero or non-finite vector.
    #[inline]
    pub fn normalize(self) -> Option<UnitVec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(UnitVec3(self / n))
        } else {
            None
        }
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A direction with unit Euclidean norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Vec3::new(1.0, 0.0, 0.0));
    pub const Y: UnitVec3 = UnitVec3(Vec3::new(0.0, 1.0, 0.0));
    pub const Z: UnitVec3 = UnitVec3(Vec3::new(0.0, 0.0, 1.0));
    pub const NEG_Z: UnitVec3 = UnitVec3(Vec3::new(0.0, 0.0, -1.0));

    /// Normalizes `v`; fails for zero or non-finite input.
    pub fn new(v: Vec3) -> Result<Self> {
        v.normalize()
            .ok_or_else(|| Error::InvalidArgument(format!("cannot normalize vector {v}")))
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(self) -> f64 {
        self.0.y
    }

    #[inline]
    pub fn z(self) -> f64 {
        self.0.z
    }

    #[inline]
    pub fn as_vec(self) -> Vec3 {
        self.0
    }

    #[inline]
    pub fn dot(self, v: Vec3) -> f64 {
        self.0.dot(v)
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}

impl TryFrom<Vec3> for UnitVec3 {
    type Error = Error;
    fn try_from(v: Vec3) -> Result<Self> {
        UnitVec3::new(v)
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    #[inline]
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

impl Mul<f64> for UnitVec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        self.0 * s
    }
}

/// Box resting in the room with a rotation about the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    center: Vec3,
    half_extents: Vec3,
    yaw: f64,
    // cached rotation of the local x axis
    cos_yaw: f64,
    sin_yaw: f64,
}

impl OrientedBox {
    /// `half_extents` are along the box's local x, y and z axes; `yaw` in [0, π).
    pub fn new(center: Vec3, half_extents: Vec3, yaw: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidArgument(format!("box center {center} is not finite")));
        }
        if !(half_extents.x > 0.0 && half_extents.y > 0.0 && half_extents.z > 0.0)
            || !half_extents.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "box half extents must be positive, got {half_extents}"
            )));
        }
        if !(0.0..PI).contains(&yaw) {
            return Err(Error::InvalidArgument(format!("box yaw {yaw} outside [0, π)")));
        }
        Ok(Self {
            center,
            half_extents,
            yaw,
            cos_yaw: yaw.cos(),
            sin_yaw: yaw.sin(),
        })
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn half_extents(&self) -> Vec3 {
        self.half_extents
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    #[inline]
    fn to_local(&self, p: Vec3) -> Vec3 {
        let d = p - self.center;
        Vec3::new(
            d.x * self.cos_yaw + d.y * self.sin_yaw,
            -d.x * self.sin_yaw + d.y * self.cos_yaw,
            d.z,
        )
    }

    /// Strict interior test; points on the surface are outside.
    pub fn contains(&self, p: Vec3) -> bool {
        let l = self.to_local(p);
        l.x.abs() < self.half_extents.x
            && l.y.abs() < self.half_extents.y
            && l.z.abs() < self.half_extents.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    a: Vec3,
    b: Vec3,
}

impl Segment {
    pub fn new(a: Vec3, b: Vec3) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidArgument(format!("degenerate segment at {a}")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> Vec3 {
        self.a
    }

    pub fn b(&self) -> Vec3 {
        self.b
    }
}

/// Receiver normal from a polar angle measured from the vertical and an
/// azimuth measured from +x.
pub fn unit_normal_from_polar(theta: f64, omega: f64) -> Result<UnitVec3> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidArgument(format!("polar angle {theta} outside [0, π/2]")));
    }
    if !(0.0..TAU).contains(&omega) {
        return Err(Error::InvalidArgument(format!("azimuth {omega} outside [0, 2π)")));
    }
    let (st, ct) = theta.sin_cos();
    let (so, co) = omega.sin_cos();
    Ok(UnitVec3(Vec3::new(st * co, st * so, ct)))
}

/// Specular reflection of the incident direction `d` off a surface with
/// normal `n`. The ray must arrive at the front face.
pub fn reflect(d: UnitVec3, n: UnitVec3) -> Result<UnitVec3> {
    let dn = d.dot(n.as_vec());
    if dn >= 0.0 {
        return Err(Error::BackFaceIncidence(dn));
    }
    Ok(UnitVec3(d.as_vec() - n * (2.0 * dn)))
}

#[inline]
pub fn cos_between(u: UnitVec3, v: UnitVec3) -> f64 {
    u.dot(v.as_vec()).clamp(-1.0, 1.0)
}

/// Whether the open segment `s` passes through the interior of `b`.
///
/// Slab test in the box frame. Grazing contact with a face, edge or corner
/// does not count as an intersection.
pub fn segment_intersects_box(s: &Segment, b: &OrientedBox) -> bool {
    segment_hits_box(s.a, s.b, b)
}

#[inline]
pub(crate) fn segment_hits_box(p: Vec3, q: Vec3, b: &OrientedBox) -> bool {
    let top = b.center.z + b.half_extents.z;
    let bottom = b.center.z - b.half_extents.z;
    if (p.z >= top && q.z >= top) || (p.z <= bottom && q.z <= bottom) {
        return false;
    }

    let lp = b.to_local(p);
    let lq = b.to_local(q);
    let dir = lq - lp;
    let mut t_lo = 0.0_f64;
    let mut t_hi = 1.0_f64;
    for (origin, step, half) in [
        (lp.x, dir.x, b.half_extents.x),
        (lp.y, dir.y, b.half_extents.y),
        (lp.z, dir.z, b.half_extents.z),
    ] {
        if step == 0.0 {
            if origin.abs() >= half {
                return false;
            }
            continue;
        }
        let t1 = (-half - origin) / step;
        let t2 = (half - origin) / step;
        let (near, far) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        t_lo = t_lo.max(near);
        t_hi = t_hi.min(far);
        if t_lo >= t_hi {
            return false;
        }
    }
    t_lo < t_hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn polar_normal_cases() {
        let up = unit_normal_from_polar(0.0, 1.234).unwrap();
        assert!(close(up.as_vec(), Vec3::new(0.0, 0.0, 1.0), 1e-15));
        let side = unit_normal_from_polar(FRAC_PI_2, 0.0).unwrap();
        assert!(close(side.as_vec(), Vec3::new(1.0, 0.0, 0.0), 1e-15));
        let diag = unit_normal_from_polar(FRAC_PI_4, FRAC_PI_2).unwrap();
        assert!(close(diag.as_vec(), Vec3::new(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn polar_normal_rejects_out_of_range() {
        assert!(unit_normal_from_polar(-0.1, 0.0).is_err());
        assert!(unit_normal_from_polar(FRAC_PI_2 + 1e-9, 0.0).is_err());
        assert!(unit_normal_from_polar(0.3, TAU).is_err());
        assert!(unit_normal_from_polar(0.3, -1e-9).is_err());
    }

    #[test]
    fn reflect_cases() {
        let n = UnitVec3::Z;
        let r = reflect(UnitVec3::NEG_Z, n).unwrap();
        assert!(close(r.as_vec(), Vec3::new(0.0, 0.0, 1.0), 1e-15));

        let d = UnitVec3::new(Vec3::new(1.0, 0.0, -1.0)).unwrap();
        let r = reflect(d, n).unwrap();
        assert!(close(r.as_vec(), Vec3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn reflect_back_face() {
        let d = UnitVec3::new(Vec3::new(1.0, 0.0, 1.0)).unwrap();
        assert!(matches!(reflect(d, UnitVec3::Z), Err(Error::BackFaceIncidence(_))));
        // grazing incidence is also rejected
        assert!(reflect(UnitVec3::X, UnitVec3::Z).is_err());
    }

    #[test]
    fn cosine_cases() {
        let u = UnitVec3::Z;
        assert_eq!(cos_between(u, u), 1.0);
        assert_eq!(cos_between(u, UnitVec3::X), 0.0);
        let v = UnitVec3::new(Vec3::new(1.0, 0.0, 1.0)).unwrap();
        assert!((cos_between(u, v) - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn segment_box_basic() {
        let b = OrientedBox::new(Vec3::new(0.0, 0.0, 0.875), Vec3::new(0.375, 0.1, 0.875), 0.0)
            .unwrap();
        let far = Segment::new(Vec3::new(10.0, 10.0, 0.0), Vec3::new(10.0, 10.0, 3.0)).unwrap();
        assert!(!segment_intersects_box(&far, &b));
        let through = Segment::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 3.0)).unwrap();
        assert!(segment_intersects_box(&through, &b));
    }

    #[test]
    fn touching_surface_is_not_blocking() {
        let b = OrientedBox::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 1.0, 1.0), 0.0).unwrap();
        // runs along the top face
        let s = Segment::new(Vec3::new(-2.0, 0.0, 2.0), Vec3::new(2.0, 0.0, 2.0)).unwrap();
        assert!(!segment_intersects_box(&s, &b));
        // ends exactly on a face
        let s = Segment::new(Vec3::new(-3.0, 0.0, 1.0), Vec3::new(-1.0, 0.0, 1.0)).unwrap();
        assert!(!segment_intersects_box(&s, &b));
        // along a side face
        let s = Segment::new(Vec3::new(1.0, -3.0, 0.5), Vec3::new(1.0, 3.0, 0.5)).unwrap();
        assert!(!segment_intersects_box(&s, &b));
        // pierces slightly
        let s = Segment::new(Vec3::new(-3.0, 0.0, 1.0), Vec3::new(-0.999, 0.0, 1.0)).unwrap();
        assert!(segment_intersects_box(&s, &b));
    }

    #[test]
    fn yawed_box_diagonal() {
        // a 45° box covers the diagonal direction but not the axis-aligned corner region
        let b = OrientedBox::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.1, 1.0), FRAC_PI_4)
            .unwrap();
        let diag = Segment::new(Vec3::new(0.6, 0.6, 1.0), Vec3::new(0.6, 0.6, 1.5)).unwrap();
        assert!(segment_intersects_box(&diag, &b));
        let off = Segment::new(Vec3::new(0.6, -0.6, 1.0), Vec3::new(0.6, -0.6, 1.5)).unwrap();
        assert!(!segment_intersects_box(&off, &b));
    }

    #[test]
    fn box_validation() {
        let c = Vec3::ZERO;
        assert!(OrientedBox::new(c, Vec3::new(0.0, 1.0, 1.0), 0.0).is_err());
        assert!(OrientedBox::new(c, Vec3::new(1.0, 1.0, 1.0), PI).is_err());
        assert!(OrientedBox::new(c, Vec3::new(1.0, 1.0, 1.0), -0.1).is_err());
        assert!(Segment::new(c, c).is_err());
    }

    #[test]
    fn contains_is_strict() {
        let b = OrientedBox::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), 0.0).unwrap();
        assert!(b.contains(Vec3::new(0.5, 0.5, 0.5)));
        assert!(!b.contains(Vec3::new(1.0, 0.0, 0.0)));
    }
}
