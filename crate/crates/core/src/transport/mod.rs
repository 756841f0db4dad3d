//! Discrete causal Kantorovich problem.
//!
//! Maximise `Σ c_p(x_i, y_j) π_ij` over couplings of two discrete measures that
//! put mass only on causally related pairs, with `c_p = τ^p / p` for `0 < p < 1`.

mod simplex;

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

use crate::causality::{classify, tau};
use crate::group::GroupPoint;

/// Feasibility tolerance for marginals, dual constraints and the gap.
pub const LP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("cost exponent p = {0} must lie strictly between 0 and 1")]
    InvalidExponent(f64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("no causal coupling exists between the two measures")]
    NoCausalCoupling,
    #[error("dual constraint violated at ({source_index}, {target_index}) by {violation:e}")]
    InfeasibleDuals { source_index: usize, target_index: usize, violation: f64 },
    #[error("instance not supported: {0}")]
    UnsupportedInstance(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// The exponent of the cost `c_p(τ) = τ^p / p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    p: f64,
}

impl CostParams {
    pub fn new(p: f64) -> Result<Self, TransportError> {
        if p > 0.0 && p < 1.0 {
            Ok(Self { p })
        } else {
            Err(TransportError::InvalidExponent(p))
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn cost(&self, tau: f64) -> f64 {
        tau.powf(self.p) / self.p
    }

    /// Cost of a pair, `None` when the pair is not causal.
    pub fn pair_cost(&self, from: GroupPoint, to: GroupPoint) -> Option<f64> {
        classify(from, to).is_causal().then(|| self.cost(tau(from, to)))
    }

    /// `(p − 2) / (p − 1)`, the power of `√(2E)` dividing the potential gradient.
    pub fn gradient_exponent(&self) -> f64 {
        (self.p - 2.0) / (self.p - 1.0)
    }

    /// `1 / (2(p − 1))`, the power of `2E` giving the geodesic arclength.
    pub fn arclength_exponent(&self) -> f64 {
        0.5 / (self.p - 1.0)
    }

    /// `(p · value)^{1/p}`.
    pub fn distance_from_value(&self, value: f64) -> f64 {
        (self.p * value).powf(1.0 / self.p)
    }
}

impl Default for CostParams {
    fn default() -> Self {
        Self { p: 0.5 }
    }
}

/// Neumaier-compensated sum, accurate to a few ulps regardless of length.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub(crate) fn validate_weights(weights: &[f64], tol: f64) -> Result<(), TransportError> {
    if weights.is_empty() {
        return Err(TransportError::InvalidMeasure("no atoms".into()));
    }
    if let Some((k, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
        return Err(TransportError::InvalidMeasure(format!("weight {k} is {w}")));
    }
    let sum = compensated_sum(weights);
    if (sum - 1.0).abs() > tol {
        return Err(TransportError::InvalidMeasure(format!("weights sum to {sum}")));
    }
    Ok(())
}

/// Finitely many weighted atoms on the group.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<GroupPoint>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<GroupPoint>, weights: Vec<f64>) -> Result<Self, TransportError> {
        if atoms.len() != weights.len() {
            return Err(TransportError::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(k) = atoms.iter().position(|a| !a.is_finite()) {
            return Err(TransportError::InvalidMeasure(format!("atom {k} is not finite")));
        }
        validate_weights(&weights, 1e-12)?;
        Ok(Self { atoms, weights })
    }

    pub fn uniform(atoms: Vec<GroupPoint>) -> Result<Self, TransportError> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn dirac(atom: GroupPoint) -> Self {
        Self { atoms: vec![atom], weights: vec![1.0] }
    }

    pub fn atoms(&self) -> &[GroupPoint] {
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

    pub fn iter(&self) -> impl Iterator<Item = (GroupPoint, f64)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    /// Pushforward by a point map, keeping the weights.
    pub fn map(&self, f: impl Fn(GroupPoint) -> GroupPoint) -> Self {
        Self { atoms: self.atoms.iter().map(|&a| f(a)).collect(), weights: self.weights.clone() }
    }

    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|x| (x - w).abs() <= 1e-12)
    }
}

/// Pair costs with a feasibility mask, row-major `n × m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    feasible: Vec<bool>,
}

impl CostMatrix {
    /// Build from a pair function; `None` marks an infeasible pair.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Option<f64> + Sync) -> Self {
        let entries: Vec<Option<f64>> =
            (0..rows * cols).into_par_iter().map(|k| f(k / cols, k % cols)).collect();
        Self {
            rows,
            cols,
            values: entries.iter().map(|e| e.unwrap_or(0.0)).collect(),
            feasible: entries.iter().map(Option::is_some).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = i * self.cols + j;
        self.feasible[k].then_some(self.values[k])
    }

    pub fn is_feasible(&self, i: usize, j: usize) -> bool {
        self.feasible[i * self.cols + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `c_p(x_i, y_j)` on all pairs, infeasible where the pair is not causal.
pub fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, params: CostParams) -> CostMatrix {
    CostMatrix::from_fn(mu.len(), nu.len(), |i, j| params.pair_cost(mu.atoms[i], nu.atoms[j]))
}

/// A coupling matrix together with its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    masses: Vec<f64>,
    value: f64,
}

impl TransportPlan {
    /// Wrap a mass matrix and evaluate it against `cost`.
    pub fn from_masses(cost: &CostMatrix, masses: Vec<f64>) -> Result<Self, TransportError> {
        if masses.len() != cost.rows * cost.cols {
            return Err(TransportError::ShapeMismatch(format!(
                "{} masses for a {}×{} cost matrix",
                masses.len(),
                cost.rows,
                cost.cols
            )));
        }
        let mut value = 0.0;
        for (k, &m) in masses.iter().enumerate() {
            if m > 0.0 {
                if !cost.feasible[k] {
                    return Err(TransportError::NoCausalCoupling);
                }
                value += m * cost.values[k];
            }
        }
        Ok(Self { rows: cost.rows, cols: cost.cols, masses, value })
    }

    /// The coupling that sends source `i` to target `perm[i]` with weight `1/n`.
    pub fn from_permutation(cost: &CostMatrix, perm: &[usize]) -> Result<Self, TransportError> {
        let n = perm.len();
        let mut masses = vec![0.0; cost.rows * cost.cols];
        for (i, &j) in perm.iter().enumerate() {
            masses[i * cost.cols + j] = 1.0 / n as f64;
        }
        Self::from_masses(cost, masses)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.masses[i * self.cols + j]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Pairs carrying more than `tol` mass, in row-major order.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize)> {
        (0..self.rows)
            .cartesian_product(0..self.cols)
            .filter(|&(i, j)| self.mass(i, j) > tol)
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.mass(i, j)).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.mass(i, j)).sum()).collect()
    }

    /// Worst marginal deviation against the given weights.
    pub fn marginal_error(&self, supply: &[f64], demand: &[f64]) -> f64 {
        let rows = self.row_sums().iter().zip(supply).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let cols = self.col_sums().iter().zip(demand).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rows.max(cols)
    }

    /// The target of each source when every row has exactly one supported entry.
    pub fn assignment(&self, tol: f64) -> Option<Vec<usize>> {
        (0..self.rows)
            .map(|i| (0..self.cols).filter(|&j| self.mass(i, j) > tol).exactly_one().ok())
            .collect()
    }
}

/// Potentials with `ψ_j − φ_i ≥ c_ij` on feasible pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl DualPotentials {
    /// Shift both potentials by the same constant.
    pub fn shifted(&self, k: f64) -> Self {
        Self {
            phi: self.phi.iter().map(|v| v + k).collect(),
            psi: self.psi.iter().map(|v| v + k).collect(),
        }
    }

    /// `Σ ψ_j ν_j − Σ φ_i μ_i`.
    pub fn objective(&self, supply: &[f64], demand: &[f64]) -> f64 {
        let pos: f64 = self.psi.iter().zip(demand).map(|(a, b)| a * b).sum();
        let neg: f64 = self.phi.iter().zip(supply).map(|(a, b)| a * b).sum();
        pos - neg
    }

    /// Largest violation of a dual constraint, with its pair.
    pub fn worst_violation(&self, cost: &CostMatrix) -> Option<(usize, usize, f64)> {
        (0..cost.rows)
            .cartesian_product(0..cost.cols)
            .filter_map(|(i, j)| cost.get(i, j).map(|c| (i, j, c - (self.psi[j] - self.phi[i]))))
            .max_by(|a, b| a.2.total_cmp(&b.2))
    }
}

/// Solve the restricted transportation LP on an explicit cost matrix.
pub fn solve_with_cost(
    cost: &CostMatrix,
    supply: &[f64],
    demand: &[f64],
) -> Result<(TransportPlan, DualPotentials), TransportError> {
    let (plan, tree_duals) = solve_basic(cost, supply, demand)?;
    let support = plan.support(0.0);
    let duals = interior_duals(cost, &support).unwrap_or(tree_duals);
    Ok((plan, duals))
}

/// Optimal plan with the potentials of the final simplex basis.
///
/// These duals are optimal but may be tight on pairs outside the support.
pub fn solve_basic(
    cost: &CostMatrix,
    supply: &[f64],
    demand: &[f64],
) -> Result<(TransportPlan, DualPotentials), TransportError> {
    if supply.len() != cost.rows || demand.len() != cost.cols {
        return Err(TransportError::ShapeMismatch(format!(
            "{}×{} weights for a {}×{} cost matrix",
            supply.len(),
            demand.len(),
            cost.rows,
            cost.cols
        )));
    }
    let sol = simplex::solve_transportation(supply, demand, |i, j| cost.get(i, j));
    if sol.artificial_flow > LP_TOLERANCE {
        return Err(TransportError::NoCausalCoupling);
    }
    let plan = TransportPlan::from_masses(cost, sol.masses)?;
    Ok((plan, DualPotentials { phi: sol.phi, psi: sol.psi }))
}

/// Optimal causal coupling of `mu` and `nu` with complementary potentials.
///
/// The potentials are strictly complementary where possible: equality holds on
/// the support and every other feasible pair has a positive slack, so each
/// source atom is tight with exactly the targets it ships mass to.
pub fn solve_kantorovich(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    params: CostParams,
) -> Result<(TransportPlan, DualPotentials), TransportError> {
    let cost = cost_matrix(mu, nu, params);
    solve_with_cost(&cost, &mu.weights, &nu.weights)
}

/// `ℓ_p(μ, ν)`, or `−∞` when no causal coupling exists.
pub fn lorentz_wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, params: CostParams) -> f64 {
    match solve_kantorovich(mu, nu, params) {
        Ok((plan, _)) => params.distance_from_value(plan.value),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Difference-constraint system: `potential[to] ≤ potential[from] + weight`.
fn shortest_potentials(nodes: usize, edges: &[(usize, usize, f64)]) -> Option<Vec<f64>> {
    let mut dist = vec![0.0; nodes];
    for _ in 0..=nodes {
        let mut changed = false;
        for &(from, to, w) in edges {
            let cand = dist[from] + w;
            if cand < dist[to] - 1e-13 * (1.0 + cand.abs()) {
                dist[to] = cand;
                changed = true;
            }
        }
        if !changed {
            return Some(dist);
        }
    }
    None
}

/// Duals with equality on `support` and the largest uniform slack elsewhere.
fn interior_duals(cost: &CostMatrix, support: &[(usize, usize)]) -> Option<DualPotentials> {
    let (n, m) = (cost.rows, cost.cols);
    let mut on_support = vec![false; n * m];
    for &(i, j) in support {
        on_support[i * m + j] = true;
    }
    // node i is φ_i, node n + j is ψ_j
    let system = |margin: f64| {
        let mut edges = Vec::with_capacity(n * m + support.len());
        for i in 0..n {
            for j in 0..m {
                if let Some(c) = cost.get(i, j) {
                    let slack = if on_support[i * m + j] { 0.0 } else { margin };
                    // φ_i ≤ ψ_j − c − slack
                    edges.push((n + j, i, -c - slack));
                    if on_support[i * m + j] {
                        // ψ_j ≤ φ_i + c
                        edges.push((i, n + j, c));
                    }
                }
            }
        }
        shortest_potentials(n + m, &edges)
    };

    let cap = 1.0 + cost.max_abs();
    let mut lo = 0.0;
    let mut hi = cap;
    if system(hi).is_some() {
        lo = hi;
    } else {
        system(0.0)?;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if system(mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    if lo <= 0.0 {
        return None;
    }
    let dist = system(0.5 * lo)?;
    Some(DualPotentials { phi: dist[..n].to_vec(), psi: dist[n..].to_vec() })
}

/// `(Σ ψ ν − Σ φ μ) − value`, after checking dual feasibility.
pub fn duality_gap(
    plan: &TransportPlan,
    duals: &DualPotentials,
    cost: &CostMatrix,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<f64, TransportError> {
    if let Some((i, j, v)) = duals.worst_violation(cost) {
        if v > LP_TOLERANCE {
            return Err(TransportError::InfeasibleDuals { source_index: i, target_index: j, violation: v });
        }
    }
    Ok(duals.objective(&mu.weights, &nu.weights) - plan.value)
}

/// How cycles were searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleSearch {
    /// Every simple cycle up to the length bound.
    Exhaustive,
    /// Maximum over closed walks up to the length bound; dominates every simple cycle.
    ClosedWalks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub support_size: usize,
    pub max_cycle: usize,
    pub search: CycleSearch,
    /// Largest gain from cyclically reassigning support pairs, 0 when none is positive.
    pub worst_violation: f64,
    /// Support pairs of the worst simple cycle found by exhaustive search.
    pub worst_cycle: Option<Vec<(usize, usize)>>,
    /// Whether all source/target combinations of the support are causal.
    pub rectangle_causal: bool,
}

impl MonotonicityReport {
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.worst_violation <= tol
    }

    /// The check is advisory when the rectangle spanned by the support is not causal.
    pub fn is_advisory(&self) -> bool {
        !self.rectangle_causal
    }
}

const EXHAUSTIVE_LIMIT: usize = 12;

/// Search cycles `(x_1, y_1) … (x_k, y_k)` of support pairs for a positive
/// `Σ c(x_{l+1}, y_l) − Σ c(x_l, y_l)`.
pub fn check_cyclical_monotonicity(
    plan: &TransportPlan,
    cost: &CostMatrix,
    max_cycle: usize,
) -> MonotonicityReport {
    let support = plan.support(LP_TOLERANCE);
    let s = support.len();
    let rectangle_causal = support
        .iter()
        .cartesian_product(support.iter())
        .all(|(&(i, _), &(_, j))| cost.is_feasible(i, j));
    // gain[k][l]: pair k hands its target to the source of pair l
    let gain: Vec<Vec<Option<f64>>> = support
        .iter()
        .map(|&(ik, jk)| {
            let base = cost.get(ik, jk).unwrap_or(0.0);
            support.iter().map(|&(il, _)| cost.get(il, jk).map(|c| c - base)).collect()
        })
        .collect();

    let mut report = MonotonicityReport {
        support_size: s,
        max_cycle,
        search: CycleSearch::Exhaustive,
        worst_violation: 0.0,
        worst_cycle: None,
        rectangle_causal,
    };
    if s < 2 || max_cycle < 2 {
        return report;
    }

    if s <= EXHAUSTIVE_LIMIT {
        let mut best = 0.0;
        let mut best_cycle: Option<Vec<usize>> = None;
        let mut path = Vec::with_capacity(max_cycle);
        let mut used = vec![false; s];
        for start in 0..s {
            path.clear();
            path.push(start);
            used[start] = true;
            extend_cycles(&gain, start, 0.0, max_cycle, &mut path, &mut used, &mut best, &mut best_cycle);
            used[start] = false;
        }
        report.worst_violation = best;
        report.worst_cycle = best_cycle.map(|c| c.into_iter().map(|k| support[k]).collect());
    } else {
        report.search = CycleSearch::ClosedWalks;
        let mut best = 0.0_f64;
        for start in 0..s {
            let mut reach: Vec<Option<f64>> = gain[start].clone();
            reach[start] = None;
            for _ in 2..=max_cycle {
                let mut next = vec![None; s];
                for (k, rk) in reach.iter().enumerate() {
                    let Some(rk) = *rk else { continue };
                    for (l, g) in gain[k].iter().enumerate() {
                        if let Some(g) = g {
                            let v = rk + g;
                            if next[l].is_none_or(|old: f64| v > old) {
                                next[l] = Some(v);
                            }
                        }
                    }
                }
                if let Some(v) = next[start] {
                    best = best.max(v);
                }
                reach = next;
            }
        }
        report.worst_violation = best;
    }
    report
}

#[allow(clippy::too_many_arguments)]
fn extend_cycles(
    gain: &[Vec<Option<f64>>],
    start: usize,
    acc: f64,
    max_len: usize,
    path: &mut Vec<usize>,
    used: &mut [bool],
    best: &mut f64,
    best_cycle: &mut Option<Vec<usize>>,
) {
    let last = *path.last().expect("path starts non-empty");
    if path.len() >= 2 {
        if let Some(g) = gain[last][start] {
            if acc + g > *best {
                *best = acc + g;
                *best_cycle = Some(path.clone());
            }
        }
    }
    if path.len() == max_len {
        return;
    }
    // the smallest index of a cycle is its start, so rotations are visited once
    for next in start + 1..gain.len() {
        if used[next] {
            continue;
        }
        let Some(g) = gain[last][next] else { continue };
        used[next] = true;
        path.push(next);
        extend_cycles(gain, start, acc + g, max_len, path, used, best, best_cycle);
        path.pop();
        used[next] = false;
    }
}

/// Best permutation coupling by enumeration, for uniform measures of equal size ≤ 8.
pub fn brute_force_plan(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    params: CostParams,
) -> Result<TransportPlan, TransportError> {
    let n = mu.len();
    if n != nu.len() || n > 8 {
        return Err(TransportError::UnsupportedInstance(format!(
            "enumeration needs equal sizes up to 8, got {}×{}",
            n,
            nu.len()
        )));
    }
    if !mu.is_uniform() || !nu.is_uniform() {
        return Err(TransportError::UnsupportedInstance("enumeration needs uniform weights".into()));
    }
    let cost = cost_matrix(mu, nu, params);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let total: Option<f64> = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
        if let Some(total) = total {
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                best = Some((total, perm));
            }
        }
    }
    let (_, perm) = best.ok_or(TransportError::NoCausalCoupling)?;
    TransportPlan::from_permutation(&cost, &perm)
}
