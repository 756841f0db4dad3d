//! Cancellation-free hyperbolic helpers shared by the flow and the α function.

/// Below this magnitude the ratios switch to their 3-term Taylor series.
pub(crate) const SERIES_THRESHOLD: f64 = 1e-4;

/// `sinh(u) − u` without cancellation near zero.
pub(crate) fn sinh_minus_id(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return u.sinh() - u;
    }
    // u³/3! + u⁵/5! + ... converges fast on |u| < 1.
    let u2 = u * u;
    let mut term = u * u2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    loop {
        term *= u2 / ((k + 1.0) * (k + 2.0));
        k += 2.0;
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
    }
}

/// `sinh(s) / s`, equal to 1 at 0.
pub(crate) fn sinhc(s: f64) -> f64 {
    if s.abs() < SERIES_THRESHOLD {
        let s2 = s * s;
        1.0 + s2 / 6.0 + s2 * s2 / 120.0
    } else {
        s.sinh() / s
    }
}

/// `(cosh(s) − 1) / s`, equal to 0 at 0.
pub(crate) fn cosh_m1_over(s: f64) -> f64 {
    if s.abs() < SERIES_THRESHOLD {
        let s2 = s * s;
        s / 2.0 + s * s2 / 24.0 + s * s2 * s2 / 720.0
    } else {
        let h = (0.5 * s).sinh();
        2.0 * h * h / s
    }
}

/// `(sinh(s) − s) / s²`, equal to 0 at 0.
pub(crate) fn sinh_minus_id_over_sq(s: f64) -> f64 {
    if s.abs() < SERIES_THRESHOLD {
        let s2 = s * s;
        s / 6.0 + s * s2 / 120.0 + s * s2 * s2 / 5040.0
    } else {
        sinh_minus_id(s) / (s * s)
    }
}

/// `b / sinh(b)`, equal to 1 at 0 and tending to 0 as |b| grows.
pub(crate) fn id_over_sinh(b: f64) -> f64 {
    if b.abs() < SERIES_THRESHOLD {
        let b2 = b * b;
        1.0 - b2 / 6.0 + 7.0 * b2 * b2 / 360.0
    } else if b.abs() > 700.0 {
        0.0
    } else {
        b / b.sinh()
    }
}
