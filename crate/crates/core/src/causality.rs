//! Causal structure and time separation.
//!
//! After left-translating the base point to the identity, the causal and
//! chronological futures are the quadratic cones
//!
//! ```text
//! J⁺(e) = { −x² + y² + 4|z| ≤ 0, x ≥ 0 },   I⁺(e) = { −x² + y² + 4|z| < 0, x > 0 }
//! ```
//!
//! and on `I⁺(e)` the time separation has the closed form
//! `τ(e, (x, y, z)) = √(x² − y²) · β(ζ) / sinh β(ζ)` with `ζ = z / (x² − y²)`,
//! where `β` inverts `α(t) = (sinh 2t − 2t) / (8 sinh² t)` on `(−1/4, 1/4)`.

use rand::Rng;
use thiserror::Error;

use crate::group::GroupPoint;
use crate::special::{id_over_sinh, sinh_minus_id};

/// Absolute slack, scaled by the coordinate magnitude, for boundary decisions.
pub const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("target is not in the chronological future of the base point")]
    NotChronological,
    #[error("target is not on the null boundary J+ \\ I+ of the base point")]
    NotOnNullBoundary,
    #[error("argument {0} is outside the domain (-1/4, 1/4) of beta")]
    OutOfDomain(f64),
    #[error("points {index} and {} are not causally related", index + 1)]
    NotCausalChain { index: usize },
}

/// Causal relation of an ordered pair `(q0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CausalRelation {
    /// `q ∈ I⁺(q0)`, reachable by a future timelike curve.
    Chronological,
    /// `q ∈ J⁺(q0) \ I⁺(q0)`, only null curves reach it (includes `q = q0`).
    CausalNull,
    /// `q ∉ J⁺(q0)`.
    Unrelated,
}

impl CausalRelation {
    pub fn is_causal(self) -> bool {
        !matches!(self, CausalRelation::Unrelated)
    }
}

impl std::fmt::Display for CausalRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CausalRelation::Chronological => "Chronological",
            CausalRelation::CausalNull => "CausalNull",
            CausalRelation::Unrelated => "Unrelated",
        };
        f.write_str(s)
    }
}

fn boundary_scale(d: &GroupPoint) -> f64 {
    (d.x * d.x + d.y * d.y + 4.0 * d.z.abs()).max(1.0)
}

/// Classify a displacement already translated to the identity.
pub fn classify_displacement(d: GroupPoint) -> CausalRelation {
    let q = -d.x * d.x + d.y * d.y + 4.0 * d.z.abs();
    let scale = boundary_scale(&d);
    let slack = BOUNDARY_SLACK * scale;
    if d.x > 0.0 && q < -slack {
        CausalRelation::Chronological
    } else if q <= slack && d.x >= -BOUNDARY_SLACK * scale.sqrt() {
        CausalRelation::CausalNull
    } else {
        CausalRelation::Unrelated
    }
}

pub fn classify(q0: GroupPoint, q: GroupPoint) -> CausalRelation {
    classify_displacement(q0.between(q))
}

/// `α(t) = (sinh 2t − 2t) / (8 sinh² t)`; odd, increasing, range `(−1/4, 1/4)`.
pub fn alpha(t: f64) -> f64 {
    let a = t.abs();
    let value = if a < 1e-3 {
        let t2 = a * a;
        a * (1.0 / 6.0 - t2 / 45.0 + t2 * t2 / 315.0)
    } else if a > 20.0 {
        // coth(t)/4 − t/(4 sinh² t), the second term underflows gracefully
        let sh = a.sinh();
        0.25 / a.tanh() - a / (4.0 * sh * sh)
    } else {
        let sh = a.sinh();
        sinh_minus_id(2.0 * a) / (8.0 * sh * sh)
    };
    value.copysign(t)
}

/// `α'(t) = (t coth t − 1) / (2 sinh² t)`.
pub fn alpha_prime(t: f64) -> f64 {
    let a = t.abs();
    if a < 1e-2 {
        let t2 = a * a;
        1.0 / 6.0 - t2 / 15.0 + t2 * t2 / 63.0 - 2.0 * t2 * t2 * t2 / 675.0
    } else if a > 350.0 {
        0.0
    } else {
        let sh = a.sinh();
        (a / a.tanh() - 1.0) / (2.0 * sh * sh)
    }
}

/// Inverse of [`alpha`] on `(−1/4, 1/4)`.
pub fn beta(zeta: f64) -> Result<f64, GeometryError> {
    if !zeta.is_finite() || zeta.abs() >= 0.25 {
        return Err(GeometryError::OutOfDomain(zeta));
    }
    if zeta == 0.0 {
        return Ok(0.0);
    }
    let target = zeta.abs();

    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while alpha(hi) < target {
        lo = hi;
        hi *= 2.0;
    }

    let mut x = (6.0 * target).clamp(lo, hi);
    if x <= lo || x >= hi {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let f = alpha(x) - target;
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = alpha_prime(x);
        let newton = if d > 0.0 { x - f / d } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 1e-16 * x.max(1.0) || hi - lo <= 4.0 * f64::EPSILON * x.max(1.0) {
            break;
        }
    }
    Ok(x.copysign(zeta))
}

/// Time separation of a displacement already translated to the identity.
pub fn tau_displacement(d: GroupPoint) -> f64 {
    if classify_displacement(d) != CausalRelation::Chronological {
        return 0.0;
    }
    let m = d.x * d.x - d.y * d.y;
    let zeta = d.z / m;
    match beta(zeta) {
        Ok(b) => m.sqrt() * id_over_sinh(b),
        // |ζ| rounded onto 1/4: the b → ∞ limit.
        Err(_) => 0.0,
    }
}

/// Time separation `τ(q0, q)`; zero unless `q ∈ I⁺(q0)`.
pub fn tau(q0: GroupPoint, q: GroupPoint) -> f64 {
    tau_displacement(q0.between(q))
}

/// A point of the Minkowski plane, the image of the projection `(x, y, z) ↦ (x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<GroupPoint> for PlanarPoint {
    fn from(q: GroupPoint) -> Self {
        PlanarPoint::new(q.x, q.y)
    }
}

/// Causal relation in the Minkowski plane with time axis `x`.
pub fn classify_planar(u: PlanarPoint, v: PlanarPoint) -> CausalRelation {
    let dx = v.x - u.x;
    let dy = v.y - u.y;
    let q = -dx * dx + dy * dy;
    let scale = (dx * dx + dy * dy).max(1.0);
    let slack = BOUNDARY_SLACK * scale;
    if dx > 0.0 && q < -slack {
        CausalRelation::Chronological
    } else if q <= slack && dx >= -BOUNDARY_SLACK * scale.sqrt() {
        CausalRelation::CausalNull
    } else {
        CausalRelation::Unrelated
    }
}

/// Minkowski time separation `√(Δx² − Δy²)` on the future cone, else 0.
pub fn minkowski_tau(u: PlanarPoint, v: PlanarPoint) -> f64 {
    let dx = v.x - u.x;
    let dy = v.y - u.y;
    if dx >= 0.0 && dx >= dy.abs() {
        (dx * dx - dy * dy).sqrt()
    } else {
        0.0
    }
}

/// Axis-aligned box in exponential coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl AxisBox {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Self {
        Self { lo, hi }
    }

    pub fn unit() -> Self {
        Self::new([0.0; 3], [1.0; 3])
    }

    pub fn contains(&self, q: GroupPoint) -> bool {
        let p = q.to_array();
        (0..3).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|k| (self.hi[k] - self.lo[k]).max(0.0)).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupPoint {
        let mut p = [0.0; 3];
        for k in 0..3 {
            p[k] = if self.hi[k] > self.lo[k] {
                rng.random_range(self.lo[k]..self.hi[k])
            } else {
                self.lo[k]
            };
        }
        GroupPoint::from_array(p)
    }
}

/// Bounding box of the causal diamond `I⁺(q0) ∩ I⁻(q1)`, in coordinates
/// translated so that `q0` sits at the identity:
/// `(0, x1) × (−x1, x1) × (−x1²/4, x1²/4)`.
pub fn causal_diamond_bbox(q0: GroupPoint, q1: GroupPoint) -> Result<AxisBox, GeometryError> {
    let d = q0.between(q1);
    if classify_displacement(d) != CausalRelation::Chronological {
        return Err(GeometryError::NotChronological);
    }
    let x1 = d.x;
    let zmax = 0.25 * x1 * x1;
    Ok(AxisBox::new([0.0, -x1, -zmax], [x1, x1, zmax]))
}

/// Rejection-sample `n` points of `I⁺(q0) ∩ I⁻(q1)` from its bounding box.
pub fn sample_diamond<R: Rng + ?Sized>(
    q0: GroupPoint,
    q1: GroupPoint,
    n: usize,
    rng: &mut R,
) -> Result<Vec<GroupPoint>, GeometryError> {
    let bbox = causal_diamond_bbox(q0, q1)?;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let local = bbox.sample(rng);
        let q = q0.mul(local);
        if classify(q0, q) == CausalRelation::Chronological
            && classify(q, q1) == CausalRelation::Chronological
        {
            out.push(q);
        }
    }
    Ok(out)
}

/// `Σ τ(p_i, p_{i+1})` along a causal chain.
pub fn tau_partition_length(points: &[GroupPoint]) -> Result<f64, GeometryError> {
    let mut total = 0.0;
    for (index, w) in points.windows(2).enumerate() {
        if classify(w[0], w[1]) == CausalRelation::Unrelated {
            return Err(GeometryError::NotCausalChain { index });
        }
        total += tau(w[0], w[1]);
    }
    Ok(total)
}
