//! Minkowski-plane comparison, lifts of planar maps and right translations.
//!
//! Projecting `(x, y, z) ↦ (x, y)` sends causal pairs to causal pairs of the
//! Minkowski plane with `τ ≤ τ̃`, and equality holds exactly when the group
//! displacement has no `z` component. A planar optimal map therefore lifts to an
//! optimal map on the group, and right translation by `q0` is optimal exactly
//! when `q0 = (x0, y0, 0)` with `x0 > |y0|`.

use std::f64::consts::TAU;

use rand::Rng;
use thiserror::Error;

use crate::causality::{classify, classify_planar, minkowski_tau, PlanarPoint};
use crate::group::GroupPoint;
use crate::transport::{
    solve_basic, solve_with_cost, validate_weights, CostMatrix, CostParams, DiscreteMeasure, DualPotentials, TransportError,
    TransportPlan,
};

/// Optimal/non-optimal threshold on `value − M⁺`.
pub const VERDICT_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinkowskiError {
    #[error("atom {index} does not project onto any planar map sample")]
    ProjectionMismatch { index: usize },
    #[error("invalid planar measure: {0}")]
    InvalidMeasure(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Weighted atoms in the Minkowski plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarMeasure {
    atoms: Vec<PlanarPoint>,
    weights: Vec<f64>,
}

impl PlanarMeasure {
    pub fn new(atoms: Vec<PlanarPoint>, weights: Vec<f64>) -> Result<Self, MinkowskiError> {
        if atoms.len() != weights.len() {
            return Err(MinkowskiError::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        validate_weights(&weights, 1e-12)?;
        Ok(Self { atoms, weights })
    }

    pub fn uniform(atoms: Vec<PlanarPoint>) -> Result<Self, MinkowskiError> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Pushforward by the projection `(x, y, z) ↦ (x, y)`.
    pub fn project(mu: &DiscreteMeasure) -> Self {
        Self { atoms: mu.atoms().iter().map(|&q| PlanarPoint::from(q)).collect(), weights: mu.weights().to_vec() }
    }

    pub fn atoms(&self) -> &[PlanarPoint] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// A planar source atom and its image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarMapSample {
    pub source: PlanarPoint,
    pub image: PlanarPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarSolution {
    pub plan: TransportPlan,
    pub duals: DualPotentials,
    /// `Some` when every source ships all its mass to a single target.
    pub map: Option<Vec<PlanarMapSample>>,
}

/// `τ̃^p / p` on planar causal pairs.
pub fn planar_cost_matrix(mu: &PlanarMeasure, nu: &PlanarMeasure, params: CostParams) -> CostMatrix {
    CostMatrix::from_fn(mu.len(), nu.len(), |i, j| {
        let (u, v) = (mu.atoms[i], nu.atoms[j]);
        classify_planar(u, v).is_causal().then(|| params.cost(minkowski_tau(u, v)))
    })
}

/// Optimal planar coupling for the Minkowski cost.
pub fn solve_minkowski(
    mu: &PlanarMeasure,
    nu: &PlanarMeasure,
    params: CostParams,
) -> Result<PlanarSolution, MinkowskiError> {
    let cost = planar_cost_matrix(mu, nu, params);
    let (plan, duals) = solve_with_cost(&cost, &mu.weights, &nu.weights)?;
    let map = plan.assignment(1e-12).map(|targets| {
        targets
            .into_iter()
            .enumerate()
            .map(|(i, j)| PlanarMapSample { source: mu.atoms[i], image: nu.atoms[j] })
            .collect()
    });
    Ok(PlanarSolution { plan, duals, map })
}

/// `q · exp_e` of the planar displacement: `(T̃1, T̃2, z + (x(T̃2 − y) − (T̃1 − x)y)/2)`.
pub fn lift_point(q: GroupPoint, image: PlanarPoint) -> GroupPoint {
    q.mul(GroupPoint::new(image.x - q.x, image.y - q.y, 0.0))
}

/// A group atom and its lifted image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedSample {
    pub source: GroupPoint,
    pub image: GroupPoint,
}

/// Lift a planar map to every atom of `mu0`, matching atoms by projection.
pub fn lift_map(samples: &[PlanarMapSample], mu0: &DiscreteMeasure) -> Result<Vec<LiftedSample>, MinkowskiError> {
    mu0.atoms()
        .iter()
        .enumerate()
        .map(|(index, &q)| {
            let proj = PlanarPoint::from(q);
            let sample = samples
                .iter()
                .find(|s| (s.source.x - proj.x).abs() <= 1e-12 && (s.source.y - proj.y).abs() <= 1e-12)
                .ok_or(MinkowskiError::ProjectionMismatch { index })?;
            Ok(LiftedSample { source: q, image: lift_point(q, sample.image) })
        })
        .collect()
}

/// `Σ w_i c_p(q_i, T(q_i))`, `−∞` if some pair is not causal.
pub fn map_cost(mu: &DiscreteMeasure, images: &[GroupPoint], params: CostParams) -> f64 {
    mu.iter()
        .zip(images)
        .map(|((q, w), &t)| params.pair_cost(q, t).map_or(f64::NEG_INFINITY, |c| w * c))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Optimal,
    NotOptimal { gap: f64 },
}

impl Verdict {
    pub fn is_optimal(&self) -> bool {
        matches!(self, Verdict::Optimal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RightTranslationReport {
    pub verdict: Verdict,
    /// `z0 = 0 ∧ x0 > |y0|`.
    pub predicate: bool,
    /// Cost of the translation itself.
    pub translation_cost: f64,
    /// Optimal Kantorovich value between `μ0` and its translate.
    pub optimal_value: f64,
}

impl RightTranslationReport {
    pub fn agrees(&self) -> bool {
        self.predicate == self.verdict.is_optimal()
    }
}

/// `z0 = 0 ∧ x0 > |y0|`.
pub fn right_translation_predicate(q0: GroupPoint) -> bool {
    q0.z == 0.0 && q0.x > q0.y.abs()
}

/// Decide numerically whether `q ↦ q · q0` is an optimal map from `μ0`.
pub fn right_translation_verdict(
    mu0: &DiscreteMeasure,
    q0: GroupPoint,
    params: CostParams,
) -> Result<RightTranslationReport, MinkowskiError> {
    if !classify(GroupPoint::IDENTITY, q0).is_causal() {
        return Err(TransportError::NoCausalCoupling.into());
    }
    let nu = mu0.map(|q| q.mul(q0));
    let translation_cost = map_cost(mu0, nu.atoms(), params);
    let cost = crate::transport::cost_matrix(mu0, &nu, params);
    let (plan, _) = solve_basic(&cost, mu0.weights(), nu.weights())?;
    let gap = plan.value() - translation_cost;
    let verdict = if gap <= VERDICT_GAP { Verdict::Optimal } else { Verdict::NotOptimal { gap } };
    Ok(RightTranslationReport {
        verdict,
        predicate: right_translation_predicate(q0),
        translation_cost,
        optimal_value: plan.value(),
    })
}

/// Uniform atoms on a jittered loop `center · (shape · r(cos θ, sin θ), 0)`,
/// traversed counter-clockwise in the parameter for `orientation > 0`.
///
/// Closed loops of atoms enclose area, and area is what the `z` component of a
/// translation trades against: for `z0 ≠ 0` a loop of the matching orientation
/// makes the cyclic shift of targets beat the translation.
pub fn polygon_measure<R: Rng + ?Sized>(
    center: GroupPoint,
    vertices: usize,
    radius: f64,
    shape: [[f64; 2]; 2],
    orientation: f64,
    rng: &mut R,
) -> DiscreteMeasure {
    let sign = if orientation < 0.0 { -1.0 } else { 1.0 };
    let phase = rng.random_range(0.0..TAU);
    let atoms = (0..vertices)
        .map(|k| {
            let jitter = rng.random_range(-0.01..0.01) / vertices as f64;
            let angle = phase + sign * TAU * (k as f64 / vertices as f64 + jitter);
            let r = radius * rng.random_range(0.999..1.001);
            let (u, v) = (r * angle.cos(), r * angle.sin());
            let lift = radius * radius * rng.random_range(-1e-3..1e-3);
            let x = shape[0][0] * u + shape[0][1] * v;
            let y = shape[1][0] * u + shape[1][1] * v;
            center.mul(GroupPoint::new(x, y, lift))
        })
        .collect();
    DiscreteMeasure::uniform(atoms).expect("non-empty polygon")
}

/// Unit-determinant `(−H)^{-1/2}` for the planar Hessian `H` of
/// `(x, y) ↦ c(e, (x, y, z0))` at `q0`, or the identity when `H` is not
/// negative definite.
fn loop_shape(q0: GroupPoint, params: CostParams) -> [[f64; 2]; 2] {
    const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
    let scale = (q0.x * q0.x - q0.y * q0.y).abs().sqrt().max(1e-3);
    let h = 1e-4 * scale;
    let cost = |dx: f64, dy: f64| {
        params
            .pair_cost(GroupPoint::IDENTITY, GroupPoint::new(q0.x + dx, q0.y + dy, q0.z))
            .unwrap_or(f64::NAN)
    };
    let c0 = cost(0.0, 0.0);
    let a = -(cost(h, 0.0) - 2.0 * c0 + cost(-h, 0.0)) / (h * h);
    let d = -(cost(0.0, h) - 2.0 * c0 + cost(0.0, -h)) / (h * h);
    let b = -(cost(h, h) - cost(h, -h) - cost(-h, h) + cost(-h, -h)) / (4.0 * h * h);
    let det = a * d - b * b;
    if !(det.is_finite() && det > 0.0 && a > 0.0) {
        return IDENTITY;
    }
    // closed-form square root of a positive definite 2×2 matrix
    let s = det.sqrt();
    let t = (a + d + 2.0 * s).sqrt();
    let (ra, rb, rd) = ((a + s) / t, b / t, (d + s) / t);
    let root_det = ra * rd - rb * rb;
    let norm = root_det.recip().sqrt();
    let (ia, ib, id) = (rd / root_det / norm, -rb / root_det / norm, ra / root_det / norm);
    [[ia, ib], [ib, id]]
}

/// A source measure suited to testing the translation by `q0`.
///
/// The atoms sit on a small loop stretched along the directions where the
/// planar cost curves least; its orientation follows the sign of `z0`.
pub fn right_translation_instance<R: Rng + ?Sized>(
    q0: GroupPoint,
    vertices: usize,
    params: CostParams,
    rng: &mut R,
) -> DiscreteMeasure {
    let radius = 0.1 * (q0.x * q0.x - q0.y * q0.y).abs().sqrt().max(0.1);
    let orientation = if q0.z == 0.0 { rng.random_range(-1.0..1.0) } else { q0.z };
    let center = GroupPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    polygon_measure(center, vertices.max(3), radius, loop_shape(q0, params), orientation, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{cost_matrix, solve_kantorovich};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pp(x: f64, y: f64) -> PlanarPoint {
        PlanarPoint { x, y }
    }

    #[test]
    fn collinear_instance_matches_group_instance() {
        let p = CostParams::new(0.5).unwrap();
        let mu = PlanarMeasure::uniform(vec![pp(0.0, 0.0), pp(0.2, 0.0)]).unwrap();
        let nu = PlanarMeasure::uniform(vec![pp(2.0, 0.0), pp(3.0, 0.0)]).unwrap();
        let planar = solve_minkowski(&mu, &nu, p).unwrap();
        let lift = |m: &PlanarMeasure| {
            DiscreteMeasure::uniform(m.atoms().iter().map(|a| GroupPoint::new(a.x, a.y, 0.0)).collect()).unwrap()
        };
        let (native, _) = solve_kantorovich(&lift(&mu), &lift(&nu), p).unwrap();
        assert_abs_diff_eq!(planar.plan.value(), native.value(), epsilon = 1e-12);
        assert_eq!(planar.map.unwrap().len(), 2);
    }

    #[test]
    fn trivial_and_infeasible_planar_instances() {
        let p = CostParams::default();
        let one = solve_minkowski(
            &PlanarMeasure::uniform(vec![pp(0.0, 0.0)]).unwrap(),
            &PlanarMeasure::uniform(vec![pp(1.0, 0.4)]).unwrap(),
            p,
        )
        .unwrap();
        assert_eq!(one.map.unwrap()[0].image, pp(1.0, 0.4));
        let spacelike = solve_minkowski(
            &PlanarMeasure::uniform(vec![pp(0.0, 0.0)]).unwrap(),
            &PlanarMeasure::uniform(vec![pp(0.5, 2.0)]).unwrap(),
            p,
        );
        assert_eq!(spacelike.unwrap_err(), MinkowskiError::Transport(TransportError::NoCausalCoupling));
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift_point(GroupPoint::new(0.0, 2.0, 5.0), pp(1.0, 2.0)), GroupPoint::new(1.0, 2.0, 4.0));
        assert_eq!(lift_point(GroupPoint::new(0.5, 0.0, -0.7), pp(1.5, 0.0)).z, -0.7);
        let mu = DiscreteMeasure::dirac(GroupPoint::new(0.3, 0.0, 0.0));
        let err = lift_map(&[PlanarMapSample { source: pp(0.0, 0.0), image: pp(1.0, 0.0) }], &mu).unwrap_err();
        assert_eq!(err, MinkowskiError::ProjectionMismatch { index: 0 });
    }

    #[test]
    fn lifted_cost_equals_planar_cost() {
        let p = CostParams::new(0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let q = GroupPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let dx: f64 = rng.random_range(0.1..2.0);
            let dy = rng.random_range(-0.99..0.99) * dx;
            let image = pp(q.x + dx, q.y + dy);
            let lifted = p.pair_cost(q, lift_point(q, image)).unwrap();
            let planar = p.cost(minkowski_tau(PlanarPoint::from(q), image));
            assert!((lifted - planar).abs() <= 1e-10);
        }
    }

    #[test]
    fn translation_without_vertical_part_is_optimal() {
        let p = CostParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let atoms = (0..5)
            .map(|_| GroupPoint::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
            .collect();
        let mu = DiscreteMeasure::uniform(atoms).unwrap();
        let report = right_translation_verdict(&mu, GroupPoint::new(1.0, 0.5, 0.0), p).unwrap();
        assert!(report.predicate && report.verdict.is_optimal() && report.agrees());
        let single = right_translation_verdict(&DiscreteMeasure::dirac(GroupPoint::new(0.2, 0.1, 0.0)), GroupPoint::new(1.0, 0.0, 0.0), p)
            .unwrap();
        assert!(single.verdict.is_optimal());
    }

    #[test]
    fn translation_with_vertical_part_is_beaten_by_a_loop() {
        let p = CostParams::default();
        let q0 = GroupPoint::new(2.0, 0.5, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mu = right_translation_instance(q0, 48, p, &mut rng);
        let report = right_translation_verdict(&mu, q0, p).unwrap();
        assert!(!report.predicate);
        match report.verdict {
            Verdict::NotOptimal { gap } => assert!(gap > 1e-4, "gap {gap}"),
            Verdict::Optimal => panic!("translation reported optimal"),
        }
    }

    #[test]
    fn non_causal_translation_has_no_coupling() {
        let p = CostParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mu = right_translation_instance(GroupPoint::new(1.0, 0.5, 0.0), 5, p, &mut rng);
        let err = right_translation_verdict(&mu, GroupPoint::new(1.0, 0.5, 0.3), p).unwrap_err();
        assert_eq!(err, MinkowskiError::Transport(TransportError::NoCausalCoupling));
    }

    #[test]
    fn planar_cost_dominates_group_cost() {
        let p = CostParams::default();
        let mu = DiscreteMeasure::uniform(vec![GroupPoint::new(0.0, 0.0, 0.2), GroupPoint::new(0.1, 0.1, -0.1)]).unwrap();
        let nu = DiscreteMeasure::uniform(vec![GroupPoint::new(2.0, 0.3, 0.5), GroupPoint::new(1.8, -0.2, 0.0)]).unwrap();
        let group = cost_matrix(&mu, &nu, p);
        let planar = planar_cost_matrix(&PlanarMeasure::project(&mu), &PlanarMeasure::project(&nu), p);
        for i in 0..2 {
            for j in 0..2 {
                if let Some(c) = group.get(i, j) {
                    assert!(c <= planar.get(i, j).unwrap() + 1e-12);
                }
            }
        }
    }
}
