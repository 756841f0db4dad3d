//! Seeded self-check suites, run from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::brenier::{inverse_roundtrip_check, transport_map_from_duals, SemiDiscretePotential};
use crate::causality::{classify, tau};
use crate::geodesics::{energy, exp_map, flow, log_map};
use crate::group::{FrameCovector, GroupPoint};
use crate::io::sample_chronological_pair;
use crate::minkowski::{right_translation_instance, right_translation_verdict};
use crate::transport::{check_cyclical_monotonicity, cost_matrix, duality_gap, solve_kantorovich, CostParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    /// Observed worst-case deviation.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SuiteResult {
    fn new(name: &'static str, worst: f64, tolerance: f64) -> Self {
        SuiteResult { name, worst, tolerance, passed: worst.is_finite() && worst <= tolerance }
    }
}

fn point(rng: &mut ChaCha8Rng, w: f64) -> GroupPoint {
    GroupPoint::new(rng.random_range(-w..w), rng.random_range(-w..w), rng.random_range(-w..w))
}

fn timelike(rng: &mut ChaCha8Rng) -> FrameCovector {
    let hy: f64 = rng.random_range(-1.5..1.5);
    FrameCovector::new(-hy.abs() - rng.random_range(0.05..1.5), hy, rng.random_range(-2.0..2.0))
}

fn group_laws(rng: &mut ChaCha8Rng) -> f64 {
    (0..1000)
        .map(|_| {
            let (a, b, c) = (point(rng, 3.0), point(rng, 3.0), point(rng, 3.0));
            ((a * b) * c).max_abs_diff(&(a * (b * c))).max((a * a.inv()).max_abs_diff(&GroupPoint::IDENTITY))
        })
        .fold(0.0, f64::max)
}

fn exp_log(rng: &mut ChaCha8Rng) -> f64 {
    (0..1000)
        .map(|_| {
            let q0 = point(rng, 1.0);
            let q = exp_map(q0, timelike(rng));
            log_map(q0, q).map_or(f64::INFINITY, |h| exp_map(q0, h).max_abs_diff(&q))
        })
        .fold(0.0, f64::max)
}

fn energy_and_tau(rng: &mut ChaCha8Rng) -> f64 {
    (0..1000)
        .map(|_| {
            let h = timelike(rng);
            let end = flow(GroupPoint::IDENTITY, h, 1.0);
            let drift = (energy(end.cov) - energy(h)).abs();
            drift.max((tau(GroupPoint::IDENTITY, end.point) - (2.0 * energy(h)).sqrt()).abs())
        })
        .fold(0.0, f64::max)
}

fn reverse_triangle(rng: &mut ChaCha8Rng) -> f64 {
    (0..2000)
        .map(|_| {
            let p = point(rng, 1.0);
            let q = exp_map(p, timelike(rng));
            let r = exp_map(q, timelike(rng));
            if classify(p, r).is_causal() {
                (tau(p, q) + tau(q, r) - tau(p, r)).max(0.0)
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

fn lp_certificates(rng: &mut ChaCha8Rng, params: CostParams) -> f64 {
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let n = rng.random_range(1..=10);
        let m = rng.random_range(1..=10);
        let Ok((mu, nu)) = sample_chronological_pair(n, m, rng.random()) else {
            return f64::INFINITY;
        };
        let Ok((plan, duals)) = solve_kantorovich(&mu, &nu, params) else {
            return f64::INFINITY;
        };
        let cost = cost_matrix(&mu, &nu, params);
        let gap = duality_gap(&plan, &duals, &cost, &mu, &nu).map_or(f64::INFINITY, f64::abs);
        let cycles = check_cyclical_monotonicity(&plan, &cost, 6).worst_violation;
        worst = worst.max(gap).max(cycles).max(plan.marginal_error(mu.weights(), nu.weights()));
    }
    worst
}

fn brenier_roundtrip(rng: &mut ChaCha8Rng, params: CostParams) -> f64 {
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let n = rng.random_range(2..=6);
        let Ok((mu, nu)) = sample_chronological_pair(n, n, rng.random()) else {
            return f64::INFINITY;
        };
        let Ok((_, duals)) = solve_kantorovich(&mu, &nu, params) else {
            return f64::INFINITY;
        };
        let (Ok(fwd), Ok(bwd)) = (
            SemiDiscretePotential::forward_from_duals(&nu, &duals, params),
            SemiDiscretePotential::backward_from_duals(&mu, &duals, params),
        ) else {
            return f64::INFINITY;
        };
        let forward = transport_map_from_duals(&mu, &fwd);
        let backward = transport_map_from_duals(&nu, &bwd);
        if !forward.skipped.is_empty() || !backward.skipped.is_empty() {
            return f64::INFINITY;
        }
        worst = worst.max(inverse_roundtrip_check(&forward.samples, &backward.samples));
    }
    worst
}

/// Count of right-translation instances whose verdict contradicts the predicate.
fn right_translation(rng: &mut ChaCha8Rng, params: CostParams) -> f64 {
    let mut disagreements = 0;
    for k in 0..10 {
        let x0 = rng.random_range(0.5..2.5);
        let y0 = x0 * rng.random_range(-0.8..0.8);
        let z0 = if k % 2 == 0 { 0.0 } else { rng.random_range(0.2..0.8) * (x0 * x0 - y0 * y0) / 4.0 };
        let q0 = GroupPoint::new(x0, y0, z0);
        let mu = right_translation_instance(q0, 48, params, rng);
        match right_translation_verdict(&mu, q0, params) {
            Ok(report) if report.agrees() => {}
            _ => disagreements += 1,
        }
    }
    disagreements as f64
}

/// Run every suite from one seed; results come back in a fixed order.
pub fn run_suites(seed: u64, params: CostParams) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        SuiteResult::new("group laws", group_laws(&mut rng), 1e-12),
        SuiteResult::new("exp/log roundtrip", exp_log(&mut rng), 1e-9),
        SuiteResult::new("energy and time separation", energy_and_tau(&mut rng), 1e-9),
        SuiteResult::new("reverse triangle inequality", reverse_triangle(&mut rng), 1e-10),
        SuiteResult::new("LP certificates", lp_certificates(&mut rng, params), 1e-9),
        SuiteResult::new("Brenier roundtrip", brenier_roundtrip(&mut rng, params), 1e-6),
        SuiteResult::new("right-translation verdicts", right_translation(&mut rng, params), 0.0),
    ]
}
