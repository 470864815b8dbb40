//! Modified Bessel functions of the first kind, orders 0 and 1.
//!
//! Power series below `SERIES_LIMIT` (all terms positive, no cancellation),
//! Hankel asymptotic expansion above it. The `*_scaled` variants return
//! `exp(-|x|) I_n(x)` and stay finite for any argument.

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 30.0;

fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    // first term (x/2)^n / n!
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + order as f64));
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

fn asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// `exp(-|x|) I_0(x)`.
pub fn i0_scaled(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(0, ax) * (-ax).exp()
    } else {
        asymptotic_scaled(0, ax)
    }
}

/// `exp(-|x|) I_1(x)`.
pub fn i1_scaled(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { series(1, ax) * (-ax).exp() } else { asymptotic_scaled(1, ax) };
    v.copysign(x)
}

pub fn i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(0, ax)
    } else {
        asymptotic_scaled(0, ax) * ax.exp()
    }
}

pub fn i1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { series(1, ax) } else { asymptotic_scaled(1, ax) * ax.exp() };
    v.copysign(x)
}

/// `I_1(x) / I_0(x)`, finite for all `x`.
pub fn i1_over_i0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    i1_scaled(x) / i0_scaled(x)
}
