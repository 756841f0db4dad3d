//! Oracles shared by the integration tests. Everything here is written
//! independently of the library's closed forms.
#![allow(dead_code)]

use rand::Rng;
use sublorentz::{FrameCovector, GroupPoint};

/// Right-hand side of the Hamiltonian system in coordinates plus frame covector.
fn rhs(s: [f64; 6]) -> [f64; 6] {
    let [x, y, _z, hx, hy, hz] = s;
    // velocity −h_X X + h_Y Y with X = ∂x − (y/2)∂z, Y = ∂y + (x/2)∂z
    let (vx, vy) = (-hx, hy);
    [vx, vy, -0.5 * y * vx + 0.5 * x * vy, -hy * hz, -hx * hz, 0.0]
}

/// Classical fourth-order Runge–Kutta integration of the flow.
pub fn rk4_flow(q0: GroupPoint, h0: FrameCovector, t: f64, steps: usize) -> (GroupPoint, FrameCovector) {
    let mut s = [q0.x, q0.y, q0.z, h0.hx, h0.hy, h0.hz];
    let dt = t / steps as f64;
    let add = |a: [f64; 6], b: [f64; 6], k: f64| std::array::from_fn::<f64, 6, _>(|i| a[i] + k * b[i]);
    for _ in 0..steps {
        let k1 = rhs(s);
        let k2 = rhs(add(s, k1, 0.5 * dt));
        let k3 = rhs(add(s, k2, 0.5 * dt));
        let k4 = rhs(add(s, k3, dt));
        s = std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    (GroupPoint::new(s[0], s[1], s[2]), FrameCovector::new(s[3], s[4], s[5]))
}

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// Best total over all permutations (Heap's algorithm), `None` if every permutation uses an infeasible pair.
pub fn best_permutation(n: usize, cost: impl Fn(usize, usize) -> Option<f64>) -> Option<f64> {
    let mut perm: Vec<usize> = (0..n).collect();
    let score = |p: &[usize]| -> Option<f64> { p.iter().enumerate().map(|(i, &j)| cost(i, j)).sum() };
    let mut best = score(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if let Some(s) = score(&perm) {
                best = Some(best.map_or(s, |b: f64| b.max(s)));
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

pub fn random_point<R: Rng>(rng: &mut R, half_width: f64) -> GroupPoint {
    GroupPoint::new(
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
    )
}

/// Future timelike frame covector with `|h_Z| ≤ hz_max`.
pub fn random_timelike<R: Rng>(rng: &mut R, hz_max: f64) -> FrameCovector {
    let hy: f64 = rng.random_range(-1.5..1.5);
    let hx = -hy.abs() - rng.random_range(0.05..1.5);
    FrameCovector::new(hx, hy, rng.random_range(-hz_max..hz_max))
}

/// A displacement in the open cone `I⁺(e)`, by rejection from a box.
pub fn random_chronological_displacement<R: Rng>(rng: &mut R, scale: f64) -> GroupPoint {
    loop {
        let d = GroupPoint::new(
            rng.random_range(0.0..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale * scale / 4.0..scale * scale / 4.0),
        );
        if -d.x * d.x + d.y * d.y + 4.0 * d.z.abs() < -1e-6 * scale * scale {
            return d;
        }
    }
}
