//! Trapezoidal quadrature of the single-particle Gibbs weight on the circle.
//!
//! For a field `(a1, a2) = (alpha_1 y_1, alpha_2 y_2)` the weight is
//! `w(q) = exp[2 (a1 cos q + a2 cos 2q)]`. The integrand is smooth and
//! periodic, so equally spaced nodes converge geometrically. Everything is
//! accumulated relative to the exact maximum of the exponent and reported as
//! a logarithm, so large fields cannot overflow.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_NODES: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_LEVELS: usize = 8;

/// Gibbs averages of `c1 = cos q` and `c2 = cos 2q` under the weight, plus
/// `ln` of its integral over `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub log_integral: f64,
    pub mean_c1: f64,
    pub mean_c2: f64,
    pub var_c1: f64,
    pub cov_c12: f64,
    pub var_c2: f64,
    pub nodes: usize,
}

impl Moments {
    pub fn integral(&self) -> f64 {
        self.log_integral.exp()
    }

    pub fn mean(&self) -> (f64, f64) {
        (self.mean_c1, self.mean_c2)
    }

    /// Covariance matrix of `(cos q, cos 2q)`.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        [[self.var_c1, self.cov_c12], [self.cov_c12, self.var_c2]]
    }
}

/// Exact maximum over `q` of `a1 cos q + a2 cos 2q`.
pub fn exponent_max(a1: f64, a2: f64) -> f64 {
    let mut best = (a1 + a2).max(a2 - a1);
    if a2 < 0.0 {
        let c = -a1 / (4.0 * a2);
        if c.abs() <= 1.0 {
            best = best.max(-a1 * a1 / (8.0 * a2) - a2);
        }
    }
    best
}

#[derive(Debug)]
pub struct Quadrature {
    base: usize,
    tol: f64,
    // level l holds (cos q, cos 2q) at base * 2^l nodes
    tables: [OnceLock<Vec<(f64, f64)>>; MAX_LEVELS],
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::new(DEFAULT_NODES, DEFAULT_TOL).expect("default quadrature is valid")
    }
}

impl Clone for Quadrature {
    fn clone(&self) -> Self {
        Quadrature::new(self.base, self.tol).expect("cloned settings were valid")
    }
}

/// Process-wide instance with the default settings.
pub fn default_quadrature() -> &'static Quadrature {
    static DEFAULT: OnceLock<Quadrature> = OnceLock::new();
    DEFAULT.get_or_init(Quadrature::default)
}

impl Quadrature {
    pub fn new(base_nodes: usize, tol: f64) -> Result<Self> {
        if base_nodes < 16 {
            return invalid(format!("need at least 16 quadrature nodes, got {base_nodes}"));
        }
        if !(tol > 0.0) {
            return invalid("quadrature tolerance must be positive");
        }
        Ok(Quadrature { base: base_nodes, tol, tables: Default::default() })
    }

    pub fn base_nodes(&self) -> usize {
        self.base
    }

    fn table(&self, level: usize) -> &[(f64, f64)] {
        self.tables[level].get_or_init(|| {
            let n = self.base << level;
            (0..n)
                .map(|j| {
                    let q = TAU * j as f64 / n as f64;
                    let c = q.cos();
                    (c, 2.0 * c * c - 1.0)
                })
                .collect()
        })
    }

    /// Moments on exactly `base * 2^level` nodes, together with the estimate
    /// from the even-indexed subset (half the nodes).
    fn nested(&self, level: usize, a1: f64, a2: f64) -> (Moments, Moments) {
        let shift = 2.0 * exponent_max(a1, a2);
        let mut even = Acc::default();
        let mut odd = Acc::default();
        for (j, &(c1, c2)) in self.table(level).iter().enumerate() {
            let w = (2.0 * (a1 * c1 + a2 * c2) - shift).exp();
            if j % 2 == 0 {
                even.add(w, c1, c2);
            } else {
                odd.add(w, c1, c2);
            }
        }
        let n = self.base << level;
        let coarse = even.finish(n / 2, shift);
        even.merge(&odd);
        (even.finish(n, shift), coarse)
    }

    /// Moments on a fixed node count (`base * 2^level`), without the
    /// convergence check.
    pub fn moments_fixed(&self, level: usize, a1: f64, a2: f64) -> Moments {
        let level = level.min(MAX_LEVELS - 1);
        let shift = 2.0 * exponent_max(a1, a2);
        let mut acc = Acc::default();
        for &(c1, c2) in self.table(level) {
            acc.add((2.0 * (a1 * c1 + a2 * c2) - shift).exp(), c1, c2);
        }
        acc.finish(self.base << level, shift)
    }

    /// `ln` of the integral only, on the base node count.
    pub fn log_integral_fast(&self, a1: f64, a2: f64) -> f64 {
        let shift = 2.0 * exponent_max(a1, a2);
        let s: f64 = self.table(0).iter().map(|&(c1, c2)| (2.0 * (a1 * c1 + a2 * c2) - shift).exp()).sum();
        (s * TAU / self.base as f64).ln() + shift
    }

    /// Moments with node doubling until successive estimates of the integral
    /// and both means agree to the configured tolerance.
    pub fn moments(&self, a1: f64, a2: f64) -> Result<Moments> {
        for level in 1..MAX_LEVELS {
            let (fine, coarse) = self.nested(level, a1, a2);
            let agree = (fine.log_integral - coarse.log_integral).abs() <= self.tol
                && (fine.mean_c1 - coarse.mean_c1).abs() <= self.tol
                && (fine.mean_c2 - coarse.mean_c2).abs() <= self.tol;
            if agree {
                return Ok(fine);
            }
        }
        Err(Error::Quadrature(self.base << (MAX_LEVELS - 1)))
    }
}

#[derive(Default)]
struct Acc {
    s0: f64,
    s1: f64,
    s2: f64,
    s11: f64,
    s12: f64,
    s22: f64,
}

impl Acc {
    #[inline]
    fn add(&mut self, w: f64, c1: f64, c2: f64) {
        self.s0 += w;
        self.s1 += w * c1;
        self.s2 += w * c2;
        self.s11 += w * c1 * c1;
        self.s12 += w * c1 * c2;
        self.s22 += w * c2 * c2;
    }

    fn merge(&mut self, o: &Acc) {
        self.s0 += o.s0;
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s11 += o.s11;
        self.s12 += o.s12;
        self.s22 += o.s22;
    }

    fn finish(&self, n: usize, shift: f64) -> Moments {
        let m1 = self.s1 / self.s0;
        let m2 = self.s2 / self.s0;
        Moments {
            log_integral: (self.s0 * 2.0 * PI / n as f64).ln() + shift,
            mean_c1: m1,
            mean_c2: m2,
            var_c1: (self.s11 / self.s0 - m1 * m1).max(0.0),
            cov_c12: self.s12 / self.s0 - m1 * m2,
            var_c2: (self.s22 / self.s0 - m2 * m2).max(0.0),
            nodes: n,
        }
    }
}

/// `I(y1, y2) = int_0^{2pi} exp[2(alpha_1 y1 cos q + alpha_2 y2 cos 2q)] dq`
/// on `n_nodes` equally spaced nodes. Overflows to infinity only when the
/// integral itself is not representable; use [`log_partition_integral`] then.
pub fn partition_integral(y1: f64, y2: f64, alpha_1: f64, alpha_2: f64, n_nodes: usize) -> Result<f64> {
    Ok(log_partition_integral(y1, y2, alpha_1, alpha_2, n_nodes)?.exp())
}

pub fn log_partition_integral(y1: f64, y2: f64, alpha_1: f64, alpha_2: f64, n_nodes: usize) -> Result<f64> {
    Ok(partition_moments(y1, y2, alpha_1, alpha_2, n_nodes)?.log_integral)
}

/// Integral and first/second moments from the same node evaluations.
pub fn partition_moments(y1: f64, y2: f64, alpha_1: f64, alpha_2: f64, n_nodes: usize) -> Result<Moments> {
    if n_nodes < 16 {
        return invalid(format!("need at least 16 quadrature nodes, got {n_nodes}"));
    }
    let q = Quadrature::new(n_nodes, DEFAULT_TOL)?;
    Ok(q.moments_fixed(0, alpha_1 * y1, alpha_2 * y2))
}
