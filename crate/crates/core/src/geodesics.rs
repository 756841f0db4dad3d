//! Hamiltonian geodesic flow, exponential and logarithm maps.
//!
//! In frame components the flow reads
//!
//! ```text
//! ḣ_X = −h_Y h_Z,   ḣ_Y = −h_X h_Z,   ḣ_Z = 0,   γ̇ = −h_X X + h_Y Y
//! ```
//!
//! and is integrated in closed form. The conserved quantity used throughout is
//! the timelike energy `E = (h_X² − h_Y²) / 2`, positive exactly on timelike
//! covectors; a geodesic with initial covector `λ` has constant speed `√(2E(λ))`.

use crate::causality::{beta, classify_displacement, CausalRelation, GeometryError, BOUNDARY_SLACK};
use crate::group::{FrameCovector, GroupPoint};
use crate::special::{cosh_m1_over, id_over_sinh, sinh_minus_id_over_sq, sinhc};

/// A point of the cotangent bundle travelling along the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianState {
    pub point: GroupPoint,
    pub cov: FrameCovector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicKind {
    TimelikeNormal,
    NullAbnormal,
}

/// A geodesic segment `t ↦ flow(base, cov0, t)` for `t ∈ [0, duration]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicArc {
    pub base: GroupPoint,
    pub cov0: FrameCovector,
    pub duration: f64,
    pub kind: GeodesicKind,
}

impl GeodesicArc {
    /// A timelike arc; `cov0` must lie in the open cone `h_X < −|h_Y|`.
    pub fn timelike(base: GroupPoint, cov0: FrameCovector, duration: f64) -> Option<Self> {
        (cov0.is_future_timelike() && duration >= 0.0).then_some(Self {
            base,
            cov0,
            duration,
            kind: GeodesicKind::TimelikeNormal,
        })
    }

    pub fn point_at(&self, t: f64) -> GroupPoint {
        flow(self.base, self.cov0, t).point
    }
}

/// Timelike energy `(h_X² − h_Y²) / 2`.
pub fn energy(cov: FrameCovector) -> f64 {
    0.5 * (cov.hx * cov.hx - cov.hy * cov.hy)
}

/// Closed-form Hamiltonian flow from `(q0, λ0)` for time `t`.
pub fn flow(q0: GroupPoint, lambda0: FrameCovector, t: f64) -> HamiltonianState {
    let FrameCovector { hx: u, hy: v, hz: w } = lambda0;
    let s = w * t;
    let (ch, sh) = (s.cosh(), s.sinh());
    let cov = FrameCovector::new(u * ch - v * sh, v * ch - u * sh, w);

    let sc = sinhc(s);
    let cm = cosh_m1_over(s);
    let local = GroupPoint::new(
        t * (v * cm - u * sc),
        t * (v * sc - u * cm),
        0.5 * (u * u - v * v) * t * t * sinh_minus_id_over_sq(s),
    );
    HamiltonianState { point: q0.mul(local), cov }
}

/// `exp_{q0}(λ0)`, the flow at time 1.
pub fn exp_map(q0: GroupPoint, lambda0: FrameCovector) -> GroupPoint {
    flow(q0, lambda0, 1.0).point
}

/// The unique future timelike covector at `q0` with `exp_map(q0, λ) = q`.
///
/// The displacement `(x, y, z) = q0⁻¹ q` fixes `b = β(z / (x² − y²))`, the
/// duration `T = √(x² − y²) b / sinh b` and the rapidity `ψ = artanh(y/x) − b`;
/// the covector is `(−T cosh ψ, T sinh ψ, 2b)`.
pub fn log_map(q0: GroupPoint, q: GroupPoint) -> Result<FrameCovector, GeometryError> {
    let d = q0.between(q);
    if classify_displacement(d) != CausalRelation::Chronological {
        return Err(GeometryError::NotChronological);
    }
    let m = d.x * d.x - d.y * d.y;
    let b = beta(d.z / m).map_err(|_| GeometryError::NotChronological)?;
    let duration = m.sqrt() * id_over_sinh(b);
    let psi = (d.y / d.x).atanh() - b;
    Ok(FrameCovector::new(-duration * psi.cosh(), duration * psi.sinh(), 2.0 * b))
}

/// Lorentzian length of an arc by composite Simpson quadrature of the speed
/// `√(2E(cov(t)))` on `n_samples` nodes.
pub fn geodesic_length(arc: &GeodesicArc, n_samples: usize) -> f64 {
    assert!(n_samples >= 2, "geodesic_length needs at least two samples");
    if arc.kind == GeodesicKind::NullAbnormal || arc.duration == 0.0 {
        return 0.0;
    }
    let speed = |t: f64| {
        let e = energy(flow(arc.base, arc.cov0, t).cov);
        (2.0 * e.max(0.0)).sqrt()
    };
    // Simpson needs an even number of intervals.
    let mut intervals = n_samples - 1;
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let h = arc.duration / intervals as f64;
    let mut sum = speed(0.0) + speed(arc.duration);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * speed(k as f64 * h);
    }
    sum * h / 3.0
}

/// Samples of the length-zero maximiser from `q0` to a point of `J⁺(q0) \ I⁺(q0)`.
///
/// With `(x1, y1, z1) = q0⁻¹ q` the curve is the straight null line
/// `t ↦ (t, ±t, 0)` when `z1 = 0`, and otherwise a null line followed by a second
/// null segment after the switch time `(x1 ∓ y1)/2`. Samples are uniform in
/// `t ∈ [0, x1]`, left-translated by `q0`.
pub fn null_boundary_geodesic(
    q0: GroupPoint,
    q: GroupPoint,
    n_samples: usize,
) -> Result<Vec<GroupPoint>, GeometryError> {
    let d = q0.between(q);
    if classify_displacement(d) != CausalRelation::CausalNull {
        return Err(GeometryError::NotOnNullBoundary);
    }
    let n = n_samples.max(2);
    let (x1, y1, z1) = (d.x, d.y, d.z);
    let scale = (x1 * x1 + y1 * y1).max(1.0);
    let flat = z1.abs() <= BOUNDARY_SLACK * scale;

    let local = |t: f64| -> GroupPoint {
        if flat {
            let sign = if y1 < 0.0 { -1.0 } else { 1.0 };
            GroupPoint::new(t, sign * t, 0.0)
        } else if z1 > 0.0 {
            let s = 0.5 * (x1 - y1);
            if t <= s {
                GroupPoint::new(t, -t, 0.0)
            } else {
                GroupPoint::new(t, t - (x1 - y1), s * (t - s))
            }
        } else {
            let s = 0.5 * (x1 + y1);
            if t <= s {
                GroupPoint::new(t, t, 0.0)
            } else {
                GroupPoint::new(t, x1 + y1 - t, -s * (t - s))
            }
        }
    };

    let mut out: Vec<GroupPoint> = (0..n)
        .map(|k| q0.mul(local(x1 * k as f64 / (n - 1) as f64)))
        .collect();
    // the closed-form endpoint agrees with q up to the boundary slack
    out[0] = q0;
    out[n - 1] = q;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::tau;

    const E: GroupPoint = GroupPoint::IDENTITY;

    fn unit_arc_endpoint() -> GroupPoint {
        let s1 = 1f64.sinh();
        GroupPoint::new(s1, 1f64.cosh() - 1.0, 0.5 * (s1 - 1.0))
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(FrameCovector::new(-1.0, 0.0, 0.0)), 0.5);
        assert_eq!(energy(FrameCovector::new(1.0, 1.0, 0.0)), 0.0);
        for &psi in &[-2.0_f64, 0.3, 1.7] {
            let e = energy(FrameCovector::new(-psi.cosh(), psi.sinh(), 0.4));
            assert!((e - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn flow_examples() {
        let st = flow(E, FrameCovector::new(-1.0, 0.0, 0.0), 2.0);
        assert_eq!(st.point, GroupPoint::new(2.0, 0.0, 0.0));
        assert_eq!(st.cov, FrameCovector::new(-1.0, 0.0, 0.0));

        let p = flow(E, FrameCovector::new(-1.0, 0.0, 1.0), 1.0).point;
        assert!(p.max_abs_diff(&GroupPoint::new(1.175201, 0.543081, 0.087601)) < 1e-6);
        assert!(p.max_abs_diff(&unit_arc_endpoint()) < 1e-15);
    }

    #[test]
    fn flow_is_homogeneous() {
        let q = GroupPoint::new(0.2, -0.4, 1.1);
        let l = FrameCovector::new(-1.3, 0.6, 0.9);
        let a = 0.7;
        let lhs = flow(q, l.scale(a), 1.6).point;
        let rhs = flow(q, l, a * 1.6).point;
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn small_vertical_component_uses_series_smoothly() {
        let l0 = FrameCovector::new(-1.0, 0.3, 0.0);
        let lw = FrameCovector::new(-1.0, 0.3, 1e-9);
        let p0 = flow(E, l0, 2.0).point;
        let pw = flow(E, lw, 2.0).point;
        assert!(p0.max_abs_diff(&pw) < 1e-8);
        assert!((pw.z - (1.0 - 0.09) * 8.0 * 1e-9 / 12.0).abs() < 1e-20);
    }

    #[test]
    fn exp_examples() {
        assert_eq!(exp_map(E, FrameCovector::new(-1.0, 0.0, 0.0)), GroupPoint::new(1.0, 0.0, 0.0));
        for &w in &[0.0, 1.0, -3.5, 40.0] {
            assert_eq!(exp_map(E, FrameCovector::new(0.0, 0.0, w)), E);
        }
    }

    #[test]
    fn exp_is_left_invariant() {
        let q0 = GroupPoint::new(-0.7, 1.2, 0.4);
        let l = FrameCovector::new(-2.0, -0.5, 1.3);
        let a = exp_map(q0, l);
        let b = q0.mul(exp_map(E, l));
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn log_examples() {
        let l = log_map(E, GroupPoint::new(2.0, 0.0, 0.0)).unwrap();
        assert!(l.max_abs_diff(&FrameCovector::new(-2.0, 0.0, 0.0)) < 1e-15);

        let l = log_map(E, unit_arc_endpoint()).unwrap();
        assert!(l.max_abs_diff(&FrameCovector::new(-1.0, 0.0, 1.0)) < 1e-9);

        assert_eq!(log_map(E, GroupPoint::new(1.0, 0.0, 0.3)), Err(GeometryError::NotChronological));
        assert_eq!(log_map(E, GroupPoint::new(2.0, 2.0, 0.0)), Err(GeometryError::NotChronological));
    }

    #[test]
    fn log_then_exp_round_trips_at_a_base_point() {
        let q0 = GroupPoint::new(1.5, -0.5, 2.0);
        let q = q0.mul(GroupPoint::new(1.2, 0.4, -0.2));
        let l = log_map(q0, q).unwrap();
        assert!(exp_map(q0, l).max_abs_diff(&q) < 1e-12);
        assert!((tau(q0, q) - (2.0 * energy(l)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn geodesic_length_examples() {
        let arc = GeodesicArc::timelike(E, FrameCovector::new(-1.0, 0.0, 1.0), 1.0).unwrap();
        assert!((geodesic_length(&arc, 101) - 1.0).abs() < 1e-12);
        let arc = GeodesicArc::timelike(E, FrameCovector::new(-2.0, 0.0, 0.0), 1.0).unwrap();
        assert!((geodesic_length(&arc, 2) - 2.0).abs() < 1e-12);
        let arc = GeodesicArc::timelike(E, FrameCovector::new(-2.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(geodesic_length(&arc, 10), 0.0);
        assert!(GeodesicArc::timelike(E, FrameCovector::new(1.0, 0.0, 0.0), 1.0).is_none());
    }

    #[test]
    fn null_boundary_examples() {
        let pts = null_boundary_geodesic(E, GroupPoint::new(2.0, 2.0, 0.0), 5).unwrap();
        for p in &pts {
            assert!((p.x - p.y).abs() < 1e-15 && p.z == 0.0);
        }

        let q = GroupPoint::new(2.0, 0.0, 1.0);
        let pts = null_boundary_geodesic(E, q, 9).unwrap();
        assert!(pts.last().unwrap().max_abs_diff(&q) <= 1e-12);
        // first segment (t, −t, 0) up to the switch at t = 1
        for p in pts.iter().filter(|p| p.x <= 1.0) {
            assert!((p.y + p.x).abs() < 1e-15 && p.z == 0.0);
        }
        // second segment (t, t − 2, t − 1)
        for p in pts.iter().filter(|p| p.x > 1.0) {
            assert!((p.y - (p.x - 2.0)).abs() < 1e-15);
            assert!((p.z - (p.x - 1.0)).abs() < 1e-15);
        }

        let q0 = GroupPoint::new(0.3, 0.1, -0.2);
        let q = q0.mul(GroupPoint::new(3.0, 1.0, -2.0));
        let pts = null_boundary_geodesic(q0, q, 17).unwrap();
        assert_eq!(pts[0], q0);
        assert!(pts[16].max_abs_diff(&q) <= 1e-12);
        // every consecutive pair is causally related with zero separation
        for w in pts.windows(2) {
            assert!(crate::causality::classify(w[0], w[1]).is_causal());
            assert_eq!(tau(w[0], w[1]), 0.0);
        }

        assert_eq!(
            null_boundary_geodesic(E, GroupPoint::new(2.0, 0.0, 0.0), 5),
            Err(GeometryError::NotOnNullBoundary)
        );
    }
}
