//! `c_p`-concave potentials, Brenier maps and displacement interpolation.
//!
//! A forward potential `φ(q) = min_j (ψ_j − c_p(q, y_j))` is differentiable off
//! a null set of ties, and its gradient determines the transport map
//!
//! ```text
//! T(q) = exp_q(−D_qφ / (√(2E(D_qφ)))^{(p−2)/(p−1)})
//! ```
//!
//! which sends `q` along the maximising geodesic to the target of its active
//! branch. The backward potential `φᶜ(y) = max_i (φ_i + c_p(x_i, y))` drives the
//! inverse map with the opposite sign.

use rayon::prelude::*;
use thiserror::Error;

use crate::causality::{classify, tau, CausalRelation, GeometryError};
use crate::geodesics::{energy, exp_map, flow, log_map};
use crate::group::{coord_to_frame, CoordCovector, FrameCovector, GroupPoint};
use crate::transport::{solve_kantorovich, CostParams, DiscreteMeasure, DualPotentials, TransportError};

/// Branches closer than this to the optimum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Jacobians with smaller determinant are rejected.
pub const SINGULAR_DET: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BrenierError {
    #[error("point {point} is not in the chronological past of target {index}")]
    DomainViolation { point: GroupPoint, index: usize },
    #[error("branches {first} and {second} tie within {margin:e} at {point}")]
    NondifferentiableAt { point: GroupPoint, first: usize, second: usize, margin: f64 },
    #[error("gradient {0} does not point along a timelike direction")]
    NotTimelikeGradient(FrameCovector),
    #[error("Jacobian determinant {det:e} at {point} is numerically singular")]
    SingularJacobian { point: GroupPoint, det: f64 },
    #[error("pair ({source_index}, {target_index}) of the rectangle is not causal")]
    NonCausalRectangle { source_index: usize, target_index: usize },
    #[error("length mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Which side of the transport problem the potential lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialSide {
    /// `min_j (ψ_j − c_p(q, y_j))` on points preceding every anchor.
    Forward,
    /// `max_i (φ_i + c_p(x_i, q))` on points following every anchor.
    Backward,
}

/// A potential given by finitely many anchored cost branches.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiDiscretePotential {
    anchors: Vec<GroupPoint>,
    offsets: Vec<f64>,
    params: CostParams,
    side: PotentialSide,
}

/// Which branch is active at a point and by how much it wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveBranch {
    pub index: usize,
    pub value: f64,
    /// Distance to the runner-up branch, infinite with a single anchor.
    pub margin: f64,
    pub runner_up: Option<usize>,
}

/// Finite-difference gradient with its analytic counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialGradient {
    pub branch: ActiveBranch,
    pub finite_difference: FrameCovector,
    pub analytic: FrameCovector,
}

impl PotentialGradient {
    pub fn discrepancy(&self) -> f64 {
        self.finite_difference.max_abs_diff(&self.analytic)
    }
}

impl SemiDiscretePotential {
    pub fn new(
        anchors: Vec<GroupPoint>,
        offsets: Vec<f64>,
        params: CostParams,
        side: PotentialSide,
    ) -> Result<Self, BrenierError> {
        if anchors.len() != offsets.len() || anchors.is_empty() {
            return Err(BrenierError::ShapeMismatch(format!(
                "{} anchors and {} offsets",
                anchors.len(),
                offsets.len()
            )));
        }
        Ok(Self { anchors, offsets, params, side })
    }

    /// Forward potential with the target atoms of `nu` and the dual `ψ`.
    pub fn forward_from_duals(
        nu: &DiscreteMeasure,
        duals: &DualPotentials,
        params: CostParams,
    ) -> Result<Self, BrenierError> {
        Self::new(nu.atoms().to_vec(), duals.psi.clone(), params, PotentialSide::Forward)
    }

    /// Backward potential with the source atoms of `mu` and the dual `φ`.
    pub fn backward_from_duals(
        mu: &DiscreteMeasure,
        duals: &DualPotentials,
        params: CostParams,
    ) -> Result<Self, BrenierError> {
        Self::new(mu.atoms().to_vec(), duals.phi.clone(), params, PotentialSide::Backward)
    }

    pub fn anchors(&self) -> &[GroupPoint] {
        &self.anchors
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn params(&self) -> CostParams {
        self.params
    }

    pub fn side(&self) -> PotentialSide {
        self.side
    }

    fn ordered(&self, q: GroupPoint, anchor: GroupPoint) -> (GroupPoint, GroupPoint) {
        match self.side {
            PotentialSide::Forward => (q, anchor),
            PotentialSide::Backward => (anchor, q),
        }
    }

    fn branch_value(&self, k: usize, q: GroupPoint) -> f64 {
        let (a, b) = self.ordered(q, self.anchors[k]);
        let c = self.params.cost(tau(a, b));
        match self.side {
            PotentialSide::Forward => self.offsets[k] - c,
            PotentialSide::Backward => self.offsets[k] + c,
        }
    }

    /// Check that `q` is chronologically related to every anchor.
    pub fn check_domain(&self, q: GroupPoint) -> Result<(), BrenierError> {
        for (index, &anchor) in self.anchors.iter().enumerate() {
            let (a, b) = self.ordered(q, anchor);
            if classify(a, b) != CausalRelation::Chronological {
                return Err(BrenierError::DomainViolation { point: q, index });
            }
        }
        Ok(())
    }

    /// The optimal branch at `q` (minimum going forward, maximum going backward).
    pub fn active_branch(&self, q: GroupPoint) -> Result<ActiveBranch, BrenierError> {
        self.check_domain(q)?;
        let sign = match self.side {
            PotentialSide::Forward => 1.0,
            PotentialSide::Backward => -1.0,
        };
        let mut best = (0, f64::INFINITY);
        let mut second: (Option<usize>, f64) = (None, f64::INFINITY);
        for k in 0..self.anchors.len() {
            let v = sign * self.branch_value(k, q);
            if v < best.1 {
                second = (best.1.is_finite().then_some(best.0), best.1);
                best = (k, v);
            } else if v < second.1 {
                second = (Some(k), v);
            }
        }
        Ok(ActiveBranch { index: best.0, value: sign * best.1, margin: second.1 - best.1, runner_up: second.0 })
    }

    pub fn value(&self, q: GroupPoint) -> Result<f64, BrenierError> {
        Ok(self.active_branch(q)?.value)
    }

    /// Differentiable active branch at `q`, or the tie that prevents it.
    pub fn differentiable_branch(&self, q: GroupPoint) -> Result<ActiveBranch, BrenierError> {
        let branch = self.active_branch(q)?;
        if branch.margin <= TIE_TOLERANCE {
            return Err(BrenierError::NondifferentiableAt {
                point: q,
                first: branch.index,
                second: branch.runner_up.unwrap_or(branch.index),
                margin: branch.margin,
            });
        }
        Ok(branch)
    }

    /// Gradient of branch `k` through the maximising geodesic to its anchor.
    pub fn analytic_branch_gradient(&self, k: usize, q: GroupPoint) -> Result<FrameCovector, BrenierError> {
        let anchor = self.anchors[k];
        let p = self.params.p();
        match self.side {
            PotentialSide::Forward => {
                let lambda = log_map(q, anchor)?;
                let t = tau(q, anchor);
                Ok(lambda.scale(-t.powf(p - 2.0)))
            }
            PotentialSide::Backward => {
                let lambda = log_map(anchor, q)?;
                let t = tau(anchor, q);
                let arrival = flow(anchor, lambda, 1.0).cov;
                Ok(arrival.scale(-t.powf(p - 2.0)))
            }
        }
    }

    /// Central-difference gradient of the active branch, cross-checked analytically.
    pub fn gradient(&self, q: GroupPoint, step: f64) -> Result<PotentialGradient, BrenierError> {
        let branch = self.differentiable_branch(q)?;
        let k = branch.index;
        let finite_difference = fd_gradient(|r| self.branch_value(k, r), q, step);
        let analytic = self.analytic_branch_gradient(k, q)?;
        Ok(PotentialGradient { branch, finite_difference, analytic })
    }
}

/// Central-difference coordinate gradient of `f` at `q`, in frame components.
pub fn fd_gradient(f: impl Fn(GroupPoint) -> f64, q: GroupPoint, step: f64) -> FrameCovector {
    let d = |dx: f64, dy: f64, dz: f64| {
        let plus = f(GroupPoint::new(q.x + dx, q.y + dy, q.z + dz));
        let minus = f(GroupPoint::new(q.x - dx, q.y - dy, q.z - dz));
        (plus - minus) / (2.0 * step)
    };
    let coord = CoordCovector::new(d(step, 0.0, 0.0), d(0.0, step, 0.0), d(0.0, 0.0, step));
    coord_to_frame(q, coord)
}

/// `c_p`-transform `max_x (φ(x) + c_p(x, y))` of a table on `sources` at each target.
pub fn cp_transform(
    phi: &[f64],
    sources: &[GroupPoint],
    targets: &[GroupPoint],
    params: CostParams,
) -> Result<Vec<f64>, BrenierError> {
    if phi.len() != sources.len() {
        return Err(BrenierError::ShapeMismatch(format!("{} values for {} atoms", phi.len(), sources.len())));
    }
    targets
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let mut best = f64::NEG_INFINITY;
            for (i, (&x, &v)) in sources.iter().zip(phi).enumerate() {
                let c = params
                    .pair_cost(x, y)
                    .ok_or(BrenierError::NonCausalRectangle { source_index: i, target_index: j })?;
                best = best.max(v + c);
            }
            Ok(best)
        })
        .collect()
}

/// The conjugate transform `min_y (ψ(y) − c_p(x, y))` back onto `sources`.
pub fn cp_transform_back(
    psi: &[f64],
    sources: &[GroupPoint],
    targets: &[GroupPoint],
    params: CostParams,
) -> Result<Vec<f64>, BrenierError> {
    if psi.len() != targets.len() {
        return Err(BrenierError::ShapeMismatch(format!("{} values for {} atoms", psi.len(), targets.len())));
    }
    sources
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut best = f64::INFINITY;
            for (j, (&y, &v)) in targets.iter().zip(psi).enumerate() {
                let c = params
                    .pair_cost(x, y)
                    .ok_or(BrenierError::NonCausalRectangle { source_index: i, target_index: j })?;
                best = best.min(v - c);
            }
            Ok(best)
        })
        .collect()
}

/// One evaluation of a transport map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSample {
    pub source: GroupPoint,
    pub image: GroupPoint,
    /// Potential gradient at the source.
    pub gradient: FrameCovector,
    /// Initial covector of the geodesic from source to image.
    pub direction: FrameCovector,
    /// Lorentzian length of that geodesic.
    pub arclength: f64,
}

fn scale_for(grad: FrameCovector, params: CostParams) -> Result<(f64, f64), BrenierError> {
    let e = energy(grad);
    if !(e > 0.0 && e.is_finite()) {
        return Err(BrenierError::NotTimelikeGradient(grad));
    }
    let root = (2.0 * e).sqrt();
    let scale = root.powf(params.gradient_exponent());
    let arclength = (2.0 * e).powf(params.arclength_exponent());
    Ok((scale, arclength))
}

/// Forward map `exp_q(−grad / scale)`; `−grad` must be future timelike.
pub fn brenier_map(q: GroupPoint, grad: FrameCovector, params: CostParams) -> Result<MapSample, BrenierError> {
    if !(-grad).is_future_timelike() {
        return Err(BrenierError::NotTimelikeGradient(grad));
    }
    let (scale, arclength) = scale_for(grad, params)?;
    let direction = grad.scale(-1.0 / scale);
    Ok(MapSample { source: q, image: exp_map(q, direction), gradient: grad, direction, arclength })
}

/// Backward map `exp_q(+grad / scale)` along a past-directed geodesic; `grad` must be past timelike.
pub fn brenier_map_backward(
    q: GroupPoint,
    grad: FrameCovector,
    params: CostParams,
) -> Result<MapSample, BrenierError> {
    if !grad.is_past_timelike() {
        return Err(BrenierError::NotTimelikeGradient(grad));
    }
    let (scale, arclength) = scale_for(grad, params)?;
    let direction = grad.scale(1.0 / scale);
    Ok(MapSample { source: q, image: exp_map(q, direction), gradient: grad, direction, arclength })
}

/// `T_t(q)`: the point a fraction `t ∈ [0, 1]` along the transport geodesic.
pub fn interpolate(sample: &MapSample, t: f64) -> GroupPoint {
    exp_map(sample.source, sample.direction.scale(t))
}

/// Anything that maps a point to a transport sample.
pub trait TransportField: Sync {
    fn map_point(&self, q: GroupPoint) -> Result<MapSample, BrenierError>;
}

impl TransportField for SemiDiscretePotential {
    fn map_point(&self, q: GroupPoint) -> Result<MapSample, BrenierError> {
        let branch = self.differentiable_branch(q)?;
        let grad = self.analytic_branch_gradient(branch.index, q)?;
        match self.side {
            PotentialSide::Forward => brenier_map(q, grad, self.params),
            PotentialSide::Backward => brenier_map_backward(q, grad, self.params),
        }
    }
}

/// A potential with the same frame gradient at every point.
///
/// Its map is the right translation by `exp_e(−grad / scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantGradient {
    pub gradient: FrameCovector,
    pub params: CostParams,
}

impl ConstantGradient {
    /// The constant-gradient field whose map is right translation by `q0 ∈ I⁺(e)`.
    pub fn right_translation(q0: GroupPoint, params: CostParams) -> Result<Self, BrenierError> {
        let direction = log_map(GroupPoint::IDENTITY, q0)?;
        // −grad / scale = direction forces grad = −τ^{p−2} · direction
        let speed = (2.0 * energy(direction)).sqrt();
        Ok(Self { gradient: direction.scale(-speed.powf(params.p() - 2.0)), params })
    }
}

impl TransportField for ConstantGradient {
    fn map_point(&self, q: GroupPoint) -> Result<MapSample, BrenierError> {
        brenier_map(q, self.gradient, self.params)
    }
}

/// Map samples per source atom, with the atoms that could not be mapped.
#[derive(Debug, Clone, PartialEq)]
pub struct MapReport {
    pub samples: Vec<MapSample>,
    pub skipped: Vec<(usize, BrenierError)>,
}

/// Evaluate a field at every point, in input order.
pub fn map_points(field: &dyn TransportField, points: &[GroupPoint]) -> MapReport {
    let results: Vec<Result<MapSample, BrenierError>> =
        points.par_iter().map(|&q| field.map_point(q)).collect();
    let mut report = MapReport { samples: Vec::with_capacity(points.len()), skipped: Vec::new() };
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => report.samples.push(s),
            Err(e) => report.skipped.push((k, e)),
        }
    }
    report
}

/// Brenier map at each atom of `mu` for the given potential.
pub fn transport_map_from_duals(mu: &DiscreteMeasure, pot: &SemiDiscretePotential) -> MapReport {
    map_points(pot, mu.atoms())
}

/// Semi-discrete potential for uniform samples of a continuous source and a discrete target.
///
/// The continuous measure is represented by `samples`; the dual `ψ` of the
/// empirical problem defines cells whose masses approximate the target weights.
pub fn fit_semi_discrete(
    samples: &[GroupPoint],
    nu: &DiscreteMeasure,
    params: CostParams,
) -> Result<SemiDiscretePotential, BrenierError> {
    let mu = DiscreteMeasure::uniform(samples.to_vec())?;
    let (_, duals) = solve_kantorovich(&mu, nu, params)?;
    SemiDiscretePotential::forward_from_duals(nu, &duals, params)
}

/// Fraction of `points` whose active branch is each anchor.
pub fn cell_masses(pot: &SemiDiscretePotential, points: &[GroupPoint]) -> Result<Vec<f64>, BrenierError> {
    let branches: Vec<usize> = points
        .par_iter()
        .map(|&q| pot.active_branch(q).map(|b| b.index))
        .collect::<Result<_, _>>()?;
    let mut counts = vec![0.0; pot.anchors.len()];
    for b in branches {
        counts[b] += 1.0;
    }
    let n = points.len() as f64;
    Ok(counts.into_iter().map(|c| c / n).collect())
}

/// Largest deviation from the identity after going forward then backward.
///
/// Each forward image is paired with the backward sample whose source is
/// nearest to it; the deviation accounts for both the pairing and the return.
pub fn inverse_roundtrip_check(forward: &[MapSample], backward: &[MapSample]) -> f64 {
    forward
        .iter()
        .map(|f| {
            backward
                .iter()
                .map(|b| b.source.max_abs_diff(&f.image).max(b.image.max_abs_diff(&f.source)))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Summary of `|ρ0(q) − ρt(T_t(q)) det(d_q T_t)|` over sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct MongeAmpereStats {
    pub max_residual: f64,
    pub mean_residual: f64,
    pub min_det: f64,
    pub max_det: f64,
    pub dets: Vec<f64>,
}

impl MongeAmpereStats {
    pub fn all_positive(&self) -> bool {
        self.min_det > 0.0
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of the coordinate Jacobian of `q ↦ T_t(q)` by central differences.
pub fn interpolant_jacobian_det(
    field: &dyn TransportField,
    q: GroupPoint,
    t: f64,
    step: f64,
) -> Result<f64, BrenierError> {
    let at = |r: GroupPoint| field.map_point(r).map(|s| interpolate(&s, t).to_array());
    let mut jac = [[0.0; 3]; 3];
    for k in 0..3 {
        let mut plus = q.to_array();
        let mut minus = q.to_array();
        plus[k] += step;
        minus[k] -= step;
        let (fp, fm) = (at(GroupPoint::from_array(plus))?, at(GroupPoint::from_array(minus))?);
        for row in 0..3 {
            jac[row][k] = (fp[row] - fm[row]) / (2.0 * step);
        }
    }
    Ok(det3(jac))
}

/// Monge–Ampère residuals of the interpolant at time `t`.
pub fn monge_ampere_residual(
    field: &dyn TransportField,
    points: &[GroupPoint],
    t: f64,
    rho0: &(dyn Fn(GroupPoint) -> f64 + Sync),
    rho_t: &(dyn Fn(GroupPoint) -> f64 + Sync),
    step: f64,
) -> Result<MongeAmpereStats, BrenierError> {
    let rows: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&q| {
            let det = interpolant_jacobian_det(field, q, t, step)?;
            if det.abs() < SINGULAR_DET {
                return Err(BrenierError::SingularJacobian { point: q, det });
            }
            let image = interpolate(&field.map_point(q)?, t);
            Ok(((rho0(q) - rho_t(image) * det).abs(), det))
        })
        .collect::<Result<_, _>>()?;
    let n = rows.len().max(1) as f64;
    Ok(MongeAmpereStats {
        max_residual: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        mean_residual: rows.iter().map(|r| r.0).sum::<f64>() / n,
        min_det: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        max_det: rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
        dets: rows.into_iter().map(|r| r.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64, z: f64) -> GroupPoint {
        GroupPoint::new(x, y, z)
    }

    fn half() -> CostParams {
        CostParams::new(0.5).unwrap()
    }

    fn forward(anchors: Vec<GroupPoint>, psi: Vec<f64>) -> SemiDiscretePotential {
        SemiDiscretePotential::new(anchors, psi, half(), PotentialSide::Forward).unwrap()
    }

    #[test]
    fn potential_values() {
        let y = pt(2.0, 0.3, 0.1);
        let q = pt(0.1, 0.0, 0.0);
        let one = forward(vec![y], vec![0.0]);
        assert_abs_diff_eq!(one.value(q).unwrap(), -half().cost(tau(q, y)), epsilon = 1e-15);

        let two = forward(vec![pt(2.0, 0.0, 0.0), pt(3.0, 0.0, 0.0)], vec![0.0, 0.0]);
        assert_abs_diff_eq!(two.value(GroupPoint::IDENTITY).unwrap(), -2.0 * 3f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(two.value(pt(5.0, 0.0, 0.0)), Err(BrenierError::DomainViolation { .. })));
    }

    #[test]
    fn finite_difference_matches_analytic_gradient() {
        let pot = forward(vec![pt(2.0, 0.0, 0.0)], vec![0.0]);
        let g = pot.gradient(GroupPoint::IDENTITY, DEFAULT_STEP).unwrap();
        assert!(g.discrepancy() <= 1e-6, "{}", g.discrepancy());
        // −2√τ has x-derivative −1/√2 at τ = 2
        assert_abs_diff_eq!(g.analytic.hx, 1.0 / 2f64.sqrt(), epsilon = 1e-12);

        let back = SemiDiscretePotential::new(vec![pt(-0.3, 0.1, 0.05)], vec![0.4], half(), PotentialSide::Backward).unwrap();
        let g = back.gradient(pt(1.5, 0.4, 0.2), DEFAULT_STEP).unwrap();
        assert!(g.discrepancy() <= 1e-6, "{}", g.discrepancy());
    }

    #[test]
    fn affine_surrogate_gradient() {
        let g = fd_gradient(|q| q.x, pt(0.7, 0.0, -1.3), DEFAULT_STEP);
        assert!(g.max_abs_diff(&FrameCovector::new(1.0, 0.0, 0.0)) < 1e-10);
    }

    #[test]
    fn symmetric_atoms_tie_on_the_mirror_plane() {
        let pot = forward(vec![pt(2.0, 0.5, 0.0), pt(2.0, -0.5, 0.0)], vec![0.0, 0.0]);
        let err = pot.gradient(GroupPoint::IDENTITY, DEFAULT_STEP).unwrap_err();
        assert!(matches!(err, BrenierError::NondifferentiableAt { .. }));
    }

    #[test]
    fn map_of_a_coordinate_gradient() {
        assert_abs_diff_eq!(half().gradient_exponent(), 3.0, epsilon = 1e-15);
        let q = pt(0.0, 2.0, 5.0);
        let grad = coord_to_frame(q, CoordCovector::new(1.0, 0.0, 0.0));
        assert_eq!(grad, FrameCovector::new(1.0, 0.0, 0.0));
        for p in [0.2, 0.5, 0.9] {
            let s = brenier_map(q, grad, CostParams::new(p).unwrap()).unwrap();
            assert!(s.image.max_abs_diff(&pt(1.0, 2.0, 4.0)) < 1e-14);
            assert_abs_diff_eq!(s.arclength, 1.0, epsilon = 1e-14);
        }
        assert!(matches!(
            brenier_map(q, FrameCovector::new(-1.0, 0.0, 0.0), half()),
            Err(BrenierError::NotTimelikeGradient(_))
        ));
    }

    #[test]
    fn arclength_is_time_separation_to_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let q = pt(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let hy: f64 = rng.random_range(-1.0..1.0);
            let direction = FrameCovector::new(-hy.abs() - rng.random_range(0.05..2.0), hy, rng.random_range(-2.0..2.0));
            let p = CostParams::new(rng.random_range(0.1..0.9)).unwrap();
            let speed = (2.0 * energy(direction)).sqrt();
            let grad = direction.scale(-speed.powf(p.p() - 2.0));
            let s = brenier_map(q, grad, p).unwrap();
            assert!(s.direction.max_abs_diff(&direction) <= 1e-12 * (1.0 + speed));
            assert!((tau(q, s.image) - s.arclength).abs() <= 1e-9 * (1.0 + s.arclength));
        }
    }

    #[test]
    fn interpolation_is_constant_speed() {
        let pot = forward(vec![pt(2.5, 0.7, -0.4)], vec![0.0]);
        let s = pot.map_point(pt(0.1, -0.2, 0.05)).unwrap();
        assert_eq!(interpolate(&s, 0.0), s.source);
        assert!(interpolate(&s, 1.0).max_abs_diff(&s.image) < 1e-15);
        assert!(s.image.max_abs_diff(&pt(2.5, 0.7, -0.4)) < 1e-12);
        let total = tau(s.source, s.image);
        for (a, b) in [(0.0, 0.3), (0.25, 0.75), (0.5, 1.0)] {
            let d = tau(interpolate(&s, a), interpolate(&s, b));
            assert_abs_diff_eq!(d, (b - a) * total, epsilon = 1e-9);
        }
    }

    #[test]
    fn dirac_roundtrip() {
        let x = pt(0.0, 0.0, 0.0);
        let y = pt(2.0, 0.5, 0.1);
        let fwd = forward(vec![y], vec![0.0]).map_point(x).unwrap();
        let bwd = SemiDiscretePotential::new(vec![x], vec![0.0], half(), PotentialSide::Backward)
            .unwrap()
            .map_point(y)
            .unwrap();
        assert!(inverse_roundtrip_check(&[fwd], &[bwd]) < 1e-12);
    }

    #[test]
    fn right_translation_field() {
        let q0 = pt(1.0, 0.5, 0.0);
        let field = ConstantGradient::right_translation(q0, half()).unwrap();
        assert_eq!(field.gradient.hz, 0.0);
        let points = [pt(0.3, -0.2, 0.1), pt(-1.0, 0.4, 2.0)];
        for &q in &points {
            let s = field.map_point(q).unwrap();
            assert!(s.image.max_abs_diff(&(q * q0)) < 1e-12);
        }
        let rho0 = |q: GroupPoint| (-(q.x * q.x + q.y * q.y + q.z * q.z)).exp();
        let rho1 = move |q: GroupPoint| rho0(q * q0.inv());
        let stats = monge_ampere_residual(&field, &points, 1.0, &rho0, &rho1, DEFAULT_STEP).unwrap();
        assert!(stats.max_residual <= 1e-6 && (stats.min_det - 1.0).abs() < 1e-6);
        let at_zero = monge_ampere_residual(&field, &points, 0.0, &rho0, &rho0, DEFAULT_STEP).unwrap();
        assert!(at_zero.max_residual <= 1e-9 && (at_zero.max_det - 1.0).abs() < 1e-9);
    }

    #[test]
    fn transforms() {
        let x = pt(0.0, 0.0, 0.0);
        let ys = [pt(2.0, 0.0, 0.0), pt(1.5, 0.5, 0.2)];
        let t = cp_transform(&[0.0], &[x], &ys, half()).unwrap();
        for (v, &y) in t.iter().zip(&ys) {
            assert_abs_diff_eq!(*v, half().cost(tau(x, y)), epsilon = 1e-15);
        }
        let shifted = cp_transform(&[2.5], &[x], &ys, half()).unwrap();
        assert_abs_diff_eq!(shifted[0] - t[0], 2.5, epsilon = 1e-14);
        let bad = cp_transform(&[0.0], &[x], &[pt(1.0, 0.0, 0.3)], half());
        assert!(matches!(bad, Err(BrenierError::NonCausalRectangle { .. })));

        let xs = [x, pt(0.1, 0.05, 0.0)];
        let phi = [0.0, 0.3];
        let psi = cp_transform(&phi, &xs, &ys, half()).unwrap();
        let back = cp_transform_back(&psi, &xs, &ys, half()).unwrap();
        for (b, f) in back.iter().zip(phi) {
            assert!(*b >= f - 1e-12);
        }
    }
}
