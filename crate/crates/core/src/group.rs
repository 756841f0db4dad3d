//! Heisenberg group arithmetic in exponential coordinates.
//!
//! The group law is
//!
//! ```text
//! (x, y, z) · (x', y', z') = (x + x', y + y', z + z' + (x y' − x' y) / 2)
//! ```
//!
//! with left-invariant frame `X = ∂x − (y/2)∂z`, `Y = ∂y + (x/2)∂z`, `Z = ∂z`.
//! Covectors are carried either in coordinate components (`du dx + dv dy + dw dz`
//! at an explicit base point) or in frame components `(h_X, h_Y, h_Z)`. Frame
//! components are meaningful without a base point because the frame is
//! left-invariant.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A point of the Heisenberg group in exponential coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GroupPoint {
    pub const IDENTITY: GroupPoint = GroupPoint { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn identity() -> Self {
        Self::IDENTITY
    }

    /// Group product `self · other`.
    #[inline]
    pub fn mul(self, other: GroupPoint) -> GroupPoint {
        GroupPoint {
            x: self.x + other.x,
            y: self.y + other.y,
            z: self.z + other.z + 0.5 * (self.x * other.y - other.x * self.y),
        }
    }

    /// Group inverse. The cross term vanishes on negation.
    #[inline]
    pub fn inv(self) -> GroupPoint {
        GroupPoint { x: -self.x, y: -self.y, z: -self.z }
    }

    /// `inv(self) · other`, the displacement from `self` to `other` seen from the identity.
    #[inline]
    pub fn between(self, other: GroupPoint) -> GroupPoint {
        self.inv().mul(other)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Sup-norm of the coordinate difference.
    pub fn max_abs_diff(&self, other: &GroupPoint) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

impl Mul for GroupPoint {
    type Output = GroupPoint;

    fn mul(self, rhs: GroupPoint) -> GroupPoint {
        GroupPoint::mul(self, rhs)
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "({:.*}, {:.*}, {:.*})", p, self.x, p, self.y, p, self.z),
            None => write!(f, "({}, {}, {})", self.x, self.y, self.z),
        }
    }
}

/// `L_base(q) = base · q`.
#[inline]
pub fn left_translate(base: GroupPoint, q: GroupPoint) -> GroupPoint {
    base.mul(q)
}

/// `R_base(q) = q · base`.
#[inline]
pub fn right_translate(base: GroupPoint, q: GroupPoint) -> GroupPoint {
    q.mul(base)
}

/// Covector components on `dx, dy, dz` at some base point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoordCovector {
    pub du: f64,
    pub dv: f64,
    pub dw: f64,
}

impl CoordCovector {
    pub const fn new(du: f64, dv: f64, dw: f64) -> Self {
        Self { du, dv, dw }
    }

    pub fn is_finite(&self) -> bool {
        self.du.is_finite() && self.dv.is_finite() && self.dw.is_finite()
    }
}

/// Covector components against the left-invariant frame `X, Y, Z`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameCovector {
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
}

impl FrameCovector {
    pub const ZERO: FrameCovector = FrameCovector { hx: 0.0, hy: 0.0, hz: 0.0 };

    pub const fn new(hx: f64, hy: f64, hz: f64) -> Self {
        Self { hx, hy, hz }
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.hx * s, self.hy * s, self.hz * s)
    }

    pub fn is_finite(&self) -> bool {
        self.hx.is_finite() && self.hy.is_finite() && self.hz.is_finite()
    }

    /// Future-directed timelike: `h_X < −|h_Y|`.
    pub fn is_future_timelike(&self) -> bool {
        self.hx < -self.hy.abs()
    }

    /// Past-directed timelike: `h_X > |h_Y|`.
    pub fn is_past_timelike(&self) -> bool {
        self.hx > self.hy.abs()
    }

    pub fn max_abs_diff(&self, other: &FrameCovector) -> f64 {
        (self.hx - other.hx)
            .abs()
            .max((self.hy - other.hy).abs())
            .max((self.hz - other.hz).abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.hx, self.hy, self.hz]
    }
}

impl Add for FrameCovector {
    type Output = FrameCovector;

    fn add(self, rhs: FrameCovector) -> FrameCovector {
        FrameCovector::new(self.hx + rhs.hx, self.hy + rhs.hy, self.hz + rhs.hz)
    }
}

impl Sub for FrameCovector {
    type Output = FrameCovector;

    fn sub(self, rhs: FrameCovector) -> FrameCovector {
        FrameCovector::new(self.hx - rhs.hx, self.hy - rhs.hy, self.hz - rhs.hz)
    }
}

impl Neg for FrameCovector {
    type Output = FrameCovector;

    fn neg(self) -> FrameCovector {
        self.scale(-1.0)
    }
}

impl Mul<FrameCovector> for f64 {
    type Output = FrameCovector;

    fn mul(self, rhs: FrameCovector) -> FrameCovector {
        rhs.scale(self)
    }
}

impl fmt::Display for FrameCovector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "({:.*}, {:.*}, {:.*})", p, self.hx, p, self.hy, p, self.hz),
            None => write!(f, "({}, {}, {})", self.hx, self.hy, self.hz),
        }
    }
}

/// Pair a coordinate covector at `q` with the frame `X, Y, Z` at `q`.
#[inline]
pub fn coord_to_frame(q: GroupPoint, lambda: CoordCovector) -> FrameCovector {
    FrameCovector {
        hx: lambda.du - 0.5 * q.y * lambda.dw,
        hy: lambda.dv + 0.5 * q.x * lambda.dw,
        hz: lambda.dw,
    }
}

/// Inverse of [`coord_to_frame`].
#[inline]
pub fn frame_to_coord(q: GroupPoint, h: FrameCovector) -> CoordCovector {
    CoordCovector {
        du: h.hx + 0.5 * q.y * h.hz,
        dv: h.hy - 0.5 * q.x * h.hz,
        dw: h.hz,
    }
}
