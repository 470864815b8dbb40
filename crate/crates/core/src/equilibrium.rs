//! Canonical free energy of the two-harmonic mean-field model and its
//! stationary points.
//!
//! After integrating out momenta and decoupling the squared order parameters
//! with auxiliary fields `y = (y1, y2)`, the free energy per particle is
//!
//! ```text
//! F(y) = ln(pi hbar omega_r beta) / (2 beta) + g(y) / beta
//! g(y) = alpha_1 y1^2 + alpha_2 y2^2 - ln I(y)
//! ```
//!
//! with `I` the single-particle integral in [`crate::quadrature`]. Stationary
//! points satisfy `y_n = <cos n q>_y` and the canonical state is the global
//! minimum of `g`.
//!
//! Stability is judged on the congruent matrix
//! `2 Id - 4 sqrt(A) C sqrt(A)` (with `A = diag(alpha)` and `C` the Gibbs
//! covariance of `(cos q, cos 2q)`), which has the same inertia as the plain
//! Hessian `2A - 4ACA` when both couplings are positive and stays
//! informative when one of them vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{default_quadrature, Moments, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub alpha_1: f64,
    pub alpha_2: f64,
}

impl Couplings {
    pub fn new(alpha_1: f64, alpha_2: f64) -> Self {
        Couplings { alpha_1, alpha_2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_1 >= 0.0 && self.alpha_2 >= 0.0) || !self.alpha_1.is_finite() || !self.alpha_2.is_finite() {
            return invalid(format!("couplings must be finite and non-negative, got ({}, {})", self.alpha_1, self.alpha_2));
        }
        Ok(())
    }

    fn fields(&self, y: [f64; 2]) -> (f64, f64) {
        (self.alpha_1 * y[0], self.alpha_2 * y[1])
    }
}

/// Constants entering the `y`-independent part of the free energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thermo {
    pub beta: f64,
    pub omega_r: f64,
    pub hbar: f64,
}

impl Default for Thermo {
    fn default() -> Self {
        Thermo { beta: 1.0, omega_r: 0.5, hbar: 1.0 }
    }
}

impl Thermo {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.omega_r > 0.0 && self.hbar > 0.0) {
            return invalid("beta, omega_r and hbar must be positive");
        }
        Ok(())
    }

    /// Momentum contribution `ln(pi hbar omega_r beta) / (2 beta)`.
    pub fn kinetic_offset(&self) -> f64 {
        (std::f64::consts::PI * self.hbar * self.omega_r * self.beta).ln() / (2.0 * self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Minimum,
    Saddle,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub y_1: f64,
    pub y_2: f64,
    pub g_value: f64,
    pub stability: Stability,
    pub residual_norm: f64,
}

impl FixedPoint {
    pub fn y(&self) -> [f64; 2] {
        [self.y_1, self.y_2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Paramagnetic,
    Nematic,
    Ferromagnetic,
}

impl Phase {
    pub fn from_order(y_1: f64, y_2: f64, zero_tol: f64) -> Phase {
        if y_1.abs() >= zero_tol {
            Phase::Ferromagnetic
        } else if y_2.abs() >= zero_tol {
            Phase::Nematic
        } else {
            Phase::Paramagnetic
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Paramagnetic => "paramagnetic",
            Phase::Nematic => "nematic",
            Phase::Ferromagnetic => "ferromagnetic",
        }
    }

    pub fn label(&self) -> u8 {
        *self as u8
    }
}

impl std::str::FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Phase> {
        match s {
            "paramagnetic" => Ok(Phase::Paramagnetic),
            "nematic" => Ok(Phase::Nematic),
            "ferromagnetic" => Ok(Phase::Ferromagnetic),
            other => invalid(format!("unknown phase '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub alpha_1: f64,
    pub alpha_2: f64,
    pub phase: Phase,
    pub global_min: FixedPoint,
    pub free_energy: f64,
    pub all_minima: Vec<FixedPoint>,
    /// Another minimum is degenerate with the reported one.
    pub coexistence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub damping: f64,
    pub max_iter: usize,
    /// Residual (max norm) required to accept a fixed point.
    pub tol: f64,
    /// Fixed points closer than this are merged.
    pub dedup_distance: f64,
    /// Points per axis of the safety-net scan of `g` over `[-1, 1]^2`.
    pub grid_scan: usize,
    /// `|y|` below this counts as a vanishing order parameter.
    pub zero_tol: f64,
    /// Minima whose `g` differ by less than this are degenerate.
    pub degeneracy_tol: f64,
    /// Eigenvalue magnitude treated as zero when labelling stability.
    pub eigen_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            damping: 0.5,
            max_iter: 10_000,
            tol: 1e-10,
            dedup_distance: 1e-6,
            grid_scan: 41,
            zero_tol: 1e-4,
            degeneracy_tol: 1e-10,
            eigen_tol: 1e-12,
        }
    }
}

pub const DEFAULT_SEEDS: [[f64; 2]; 6] = [[0.0, 0.0], [0.9, 0.9], [-0.9, 0.9], [0.0, 0.9], [0.0, -0.9], [0.5, -0.5]];

/// `alpha_1 y1^2 + alpha_2 y2^2 - ln I(y)`.
pub fn inner_free_energy(y: [f64; 2], alpha: Couplings) -> Result<f64> {
    inner_free_energy_with(default_quadrature(), y, alpha)
}

pub fn inner_free_energy_with(quad: &Quadrature, y: [f64; 2], alpha: Couplings) -> Result<f64> {
    let (a1, a2) = alpha.fields(y);
    let m = quad.moments(a1, a2)?;
    Ok(g_from_moments(y, alpha, &m))
}

fn g_from_moments(y: [f64; 2], alpha: Couplings, m: &Moments) -> f64 {
    alpha.alpha_1 * y[0] * y[0] + alpha.alpha_2 * y[1] * y[1] - m.log_integral
}

/// Free energy per particle at auxiliary fields `(y1, y2)`, before the
/// infimum over `y` is taken.
pub fn free_energy(y_1: f64, y_2: f64, alpha: Couplings, thermo: Thermo) -> Result<f64> {
    thermo.validate()?;
    let g = inner_free_energy([y_1, y_2], alpha)?;
    Ok(thermo.kinetic_offset() + g / thermo.beta)
}

/// `(y1 - <cos q>_y, y2 - <cos 2q>_y)`.
pub fn self_consistency_residual(y: [f64; 2], alpha: Couplings) -> Result<[f64; 2]> {
    let (a1, a2) = alpha.fields(y);
    let m = default_quadrature().moments(a1, a2)?;
    Ok([y[0] - m.mean_c1, y[1] - m.mean_c2])
}

fn max_abs(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

fn eig_sym(h: [[f64; 2]; 2]) -> [f64; 2] {
    let tr = 0.5 * (h[0][0] + h[1][1]);
    let d = (0.5 * (h[0][0] - h[1][1])).hypot(h[0][1]);
    [tr - d, tr + d]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Second derivatives of `g` with respect to `y`.
    pub hessian: [[f64; 2]; 2],
    /// `2 Id - 4 sqrt(A) C sqrt(A)`, used for the stability label.
    pub reduced_hessian: [[f64; 2]; 2],
    /// Ascending eigenvalues of `reduced_hessian`.
    pub eigenvalues: [f64; 2],
    pub stability: Stability,
    /// `alpha_1 < 1 && alpha_2 < 1`, reported when the point is the origin.
    pub paramagnetic_closed_form: Option<bool>,
    /// `alpha_1 < 1/(1+y2) && 1 < alpha_2 < 1/(1-y2^2)`, reported for
    /// `y1 = 0, y2 != 0`.
    pub nematic_closed_form: Option<bool>,
}

fn stability_from_moments(y: [f64; 2], alpha: Couplings, m: &Moments, opts: &SolverOptions) -> StabilityReport {
    let a = [alpha.alpha_1, alpha.alpha_2];
    let s = [a[0].sqrt(), a[1].sqrt()];
    let c = m.covariance();
    let mut hessian = [[0.0; 2]; 2];
    let mut reduced = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            hessian[i][j] = 2.0 * a[i] * delta - 4.0 * a[i] * a[j] * c[i][j];
            reduced[i][j] = 2.0 * delta - 4.0 * s[i] * s[j] * c[i][j];
        }
    }
    let eigenvalues = eig_sym(reduced);
    let stability = if eigenvalues[0] > -opts.eigen_tol {
        Stability::Minimum
    } else if eigenvalues[1] < opts.eigen_tol {
        Stability::Maximum
    } else {
        Stability::Saddle
    };
    let origin = y[0].abs() < opts.zero_tol && y[1].abs() < opts.zero_tol;
    let nematic = y[0].abs() < opts.zero_tol && !origin;
    StabilityReport {
        hessian,
        reduced_hessian: reduced,
        eigenvalues,
        stability,
        paramagnetic_closed_form: origin.then(|| alpha.alpha_1 < 1.0 && alpha.alpha_2 < 1.0),
        nematic_closed_form: nematic.then(|| {
            let t = y[1];
            alpha.alpha_1 < 1.0 / (1.0 + t) && 1.0 < alpha.alpha_2 && alpha.alpha_2 < 1.0 / (1.0 - t * t)
        }),
    }
}

/// Hessian of `g` at a fixed point, evaluated from Gibbs covariances, and
/// the resulting stability label.
pub fn hessian_classify(point: [f64; 2], alpha: Couplings, opts: &SolverOptions) -> Result<StabilityReport> {
    alpha.validate()?;
    let (a1, a2) = alpha.fields(point);
    let m = default_quadrature().moments(a1, a2)?;
    let residual = max_abs([point[0] - m.mean_c1, point[1] - m.mean_c2]);
    if !(residual <= opts.tol) {
        return Err(Error::NotAFixedPoint { y1: point[0], y2: point[1], residual });
    }
    Ok(stability_from_moments(point, alpha, &m, opts))
}

/// Damped iteration `y <- (1-lambda) y + lambda <cos n q>_y`, switching to
/// Newton on the residual once close. Returns the converged point and its
/// moments.
pub fn polish_fixed_point(
    quad: &Quadrature,
    alpha: Couplings,
    seed: [f64; 2],
    opts: &SolverOptions,
) -> Result<([f64; 2], Moments)> {
    let mut y = [seed[0].clamp(-1.0, 1.0), seed[1].clamp(-1.0, 1.0)];
    let lambda = opts.damping;
    for it in 0..opts.max_iter {
        let (a1, a2) = alpha.fields(y);
        let m = quad.moments(a1, a2)?;
        let r = [y[0] - m.mean_c1, y[1] - m.mean_c2];
        let rn = max_abs(r);
        if rn <= opts.tol * 1e-2 {
            return Ok((y, m));
        }
        if rn < 1e-6 || (rn < 1e-3 && it % 25 == 24) {
            if let Some(found) = newton(quad, alpha, y, opts)? {
                return Ok(found);
            }
        }
        y = [(1.0 - lambda) * y[0] + lambda * m.mean_c1, (1.0 - lambda) * y[1] + lambda * m.mean_c2];
    }
    let (a1, a2) = alpha.fields(y);
    let m = quad.moments(a1, a2)?;
    if max_abs([y[0] - m.mean_c1, y[1] - m.mean_c2]) <= opts.tol {
        return Ok((y, m));
    }
    Err(Error::NonConvergence(seed[0], seed[1]))
}

fn newton(quad: &Quadrature, alpha: Couplings, start: [f64; 2], opts: &SolverOptions) -> Result<Option<([f64; 2], Moments)>> {
    let a = [alpha.alpha_1, alpha.alpha_2];
    let mut y = start;
    let (a1, a2) = alpha.fields(y);
    let mut m = quad.moments(a1, a2)?;
    let mut r = [y[0] - m.mean_c1, y[1] - m.mean_c2];
    for _ in 0..60 {
        let rn = max_abs(r);
        if rn <= 1e-14 {
            break;
        }
        // d<cos n q>/dy_k = 2 alpha_k Cov(c_n, c_k)
        let c = m.covariance();
        let j = [
            [1.0 - 2.0 * a[0] * c[0][0], -2.0 * a[1] * c[0][1]],
            [-2.0 * a[0] * c[1][0], 1.0 - 2.0 * a[1] * c[1][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let step = [-(j[1][1] * r[0] - j[0][1] * r[1]) / det, -(-j[1][0] * r[0] + j[0][0] * r[1]) / det];
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = [(y[0] + t * step[0]).clamp(-1.0, 1.0), (y[1] + t * step[1]).clamp(-1.0, 1.0)];
            let (a1, a2) = alpha.fields(cand);
            let mc = quad.moments(a1, a2)?;
            let rc = [cand[0] - mc.mean_c1, cand[1] - mc.mean_c2];
            if max_abs(rc) < rn {
                y = cand;
                m = mc;
                r = rc;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((max_abs(r) <= opts.tol).then_some((y, m)))
}

/// Finds the stationary points of `g` reachable from `seeds`, deduplicated
/// and labelled by stability. Seeds that fail to converge are dropped with a
/// warning.
pub fn solve_fixed_points(alpha: Couplings, seeds: &[[f64; 2]], opts: &SolverOptions) -> Result<Vec<FixedPoint>> {
    Ok(solve_fixed_points_with(default_quadrature(), alpha, seeds, opts)?.0)
}

/// As [`solve_fixed_points`], also returning the number of dropped seeds.
pub fn solve_fixed_points_with(
    quad: &Quadrature,
    alpha: Couplings,
    seeds: &[[f64; 2]],
    opts: &SolverOptions,
) -> Result<(Vec<FixedPoint>, usize)> {
    alpha.validate()?;
    if seeds.is_empty() {
        return invalid("at least one seed is required");
    }
    let mut points: Vec<FixedPoint> = Vec::new();
    let mut dropped = 0;
    for &seed in seeds {
        let (y, m) = match polish_fixed_point(quad, alpha, seed, opts) {
            Ok(found) => found,
            Err(Error::NonConvergence(s1, s2)) => {
                log::warn!("alpha = ({}, {}): seed ({s1}, {s2}) did not converge", alpha.alpha_1, alpha.alpha_2);
                dropped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if points.iter().any(|p| (p.y_1 - y[0]).hypot(p.y_2 - y[1]) <= opts.dedup_distance) {
            continue;
        }
        let report = stability_from_moments(y, alpha, &m, opts);
        points.push(FixedPoint {
            y_1: y[0],
            y_2: y[1],
            g_value: g_from_moments(y, alpha, &m),
            stability: report.stability,
            residual_norm: max_abs([y[0] - m.mean_c1, y[1] - m.mean_c2]),
        });
    }
    Ok((points, dropped))
}

/// Lowest point of `g` on a regular grid over `y1 in [0, 1]`, `y2 in [-1, 1]`
/// (the `y1 < 0` half is its mirror image).
pub fn grid_scan_minimum(quad: &Quadrature, alpha: Couplings, points_per_axis: usize) -> [f64; 2] {
    let n = points_per_axis.max(3);
    let half = n / 2;
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..=half {
        let y1 = i as f64 / half as f64;
        for j in 0..n {
            let y2 = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            let g = alpha.alpha_1 * y1 * y1 + alpha.alpha_2 * y2 * y2
                - quad.log_integral_fast(alpha.alpha_1 * y1, alpha.alpha_2 * y2);
            if g < best.0 {
                best = (g, [y1, y2]);
            }
        }
    }
    best.1
}

/// Largest non-negative root of `x = I_1(2 alpha_2 x) / I_0(2 alpha_2 x)`,
/// the nematic order parameter. Zero for `alpha_2 <= 1`.
pub fn nematic_bessel_solve(alpha_2: f64) -> f64 {
    if !(alpha_2 > 1.0) {
        return 0.0;
    }
    // h(x) = R(2 alpha_2 x) - x is concave on x > 0 with h'(0) = alpha_2 - 1 > 0,
    // so bisection on the sign of h from (0, 1] finds the unique positive root.
    let h = |x: f64| crate::bessel::i1_over_i0(2.0 * alpha_2 * x) - x;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Nematic stability threshold `1 / (1 + Theta_2)` along the branch with the
/// given sign of `Theta_2`.
pub fn nematic_alpha1_threshold(alpha_2: f64, positive_branch: bool) -> f64 {
    let t = nematic_bessel_solve(alpha_2);
    1.0 / (1.0 + if positive_branch { t } else { -t })
}

/// Global minimum of the free energy and its phase label.
pub fn classify_phase(alpha: Couplings, thermo: Thermo, opts: &SolverOptions) -> Result<PhasePoint> {
    classify_phase_with(default_quadrature(), alpha, thermo, opts, &[])
}

/// As [`classify_phase`], with extra seeds tried before the defaults.
pub fn classify_phase_with(
    quad: &Quadrature,
    alpha: Couplings,
    thermo: Thermo,
    opts: &SolverOptions,
    extra_seeds: &[[f64; 2]],
) -> Result<PhasePoint> {
    thermo.validate()?;
    alpha.validate()?;
    let mut seeds: Vec<[f64; 2]> = extra_seeds.to_vec();
    seeds.extend_from_slice(&DEFAULT_SEEDS);
    if opts.grid_scan > 0 {
        seeds.push(grid_scan_minimum(quad, alpha, opts.grid_scan));
    }
    let (points, _) = solve_fixed_points_with(quad, alpha, &seeds, opts)?;
    select_global(alpha, thermo, points, opts)
}

fn select_global(alpha: Couplings, thermo: Thermo, points: Vec<FixedPoint>, opts: &SolverOptions) -> Result<PhasePoint> {
    let minima: Vec<FixedPoint> = points.into_iter().filter(|p| p.stability == Stability::Minimum).collect();
    let best = minima
        .iter()
        .map(|p| p.g_value)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::NoMinimum(alpha.alpha_1, alpha.alpha_2));
    }
    let degenerate: Vec<&FixedPoint> = minima.iter().filter(|p| p.g_value - best <= opts.degeneracy_tol).collect();
    // prefer y1 >= 0, then y2 >= 0, then the lowest g
    let rank = |p: &FixedPoint| (p.y_1 < -opts.zero_tol, p.y_2 < -opts.zero_tol);
    let global = **degenerate
        .iter()
        .min_by(|a, b| rank(a).cmp(&rank(b)).then(a.g_value.total_cmp(&b.g_value)))
        .expect("non-empty");
    let mut all_minima = minima.clone();
    all_minima.sort_by(|a, b| a.g_value.total_cmp(&b.g_value).then(b.y_1.total_cmp(&a.y_1)).then(b.y_2.total_cmp(&a.y_2)));
    Ok(PhasePoint {
        alpha_1: alpha.alpha_1,
        alpha_2: alpha.alpha_2,
        phase: Phase::from_order(global.y_1, global.y_2, opts.zero_tol),
        global_min: global,
        free_energy: thermo.kinetic_offset() + global.g_value / thermo.beta,
        all_minima,
        coexistence: degenerate.len() > 1,
    })
}

/// Mean energy per particle of the canonical state,
/// `1/(2 beta) - (alpha_1 Theta_1^2 + alpha_2 Theta_2^2) / beta`.
pub fn canonical_energy_per_particle(beta: f64, alpha: Couplings, theta_1: f64, theta_2: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return invalid(format!("beta must be positive, got {beta}"));
    }
    Ok(0.5 / beta - (alpha.alpha_1 * theta_1 * theta_1 + alpha.alpha_2 * theta_2 * theta_2) / beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn free_energy_at_origin() {
        let f = free_energy(0.0, 0.0, Couplings::new(0.7, 1.2), Thermo::default()).unwrap();
        assert_relative_eq!(f, (PI / 2.0).ln() / 2.0 - TAU.ln(), max_relative = 1e-14);
    }

    #[test]
    fn origin_is_always_fixed() {
        for &(a1, a2) in &[(0.0, 0.0), (0.5, 3.0), (2.0, 2.0)] {
            let r = self_consistency_residual([0.0, 0.0], Couplings::new(a1, a2)).unwrap();
            assert!(max_abs(r) < 1e-15, "{r:?}");
        }
    }

    #[test]
    fn first_residual_vanishes_without_dipole_coupling() {
        for y2 in [-0.8, -0.2, 0.3, 0.9] {
            let r = self_consistency_residual([0.0, y2], Couplings::new(0.0, 1.7)).unwrap();
            assert!(r[0].abs() < 1e-15);
        }
    }

    #[test]
    fn paramagnetic_closed_form() {
        let o = opts();
        let r = hessian_classify([0.0, 0.0], Couplings::new(0.9, 0.9), &o).unwrap();
        assert_eq!(r.stability, Stability::Minimum);
        assert_eq!(r.paramagnetic_closed_form, Some(true));
        let r = hessian_classify([0.0, 0.0], Couplings::new(1.1, 0.5), &o).unwrap();
        assert_ne!(r.stability, Stability::Minimum);
        assert_eq!(r.paramagnetic_closed_form, Some(false));
    }

    #[test]
    fn not_a_fixed_point_rejected() {
        let e = hessian_classify([0.3, 0.1], Couplings::new(0.5, 0.5), &opts()).unwrap_err();
        assert!(matches!(e, Error::NotAFixedPoint { .. }));
    }

    #[test]
    fn nematic_solve_examples() {
        assert_eq!(nematic_bessel_solve(0.5), 0.0);
        assert_eq!(nematic_bessel_solve(1.0), 0.0);
        let t = nematic_bessel_solve(50.0);
        assert!(t > 0.98 && t < 1.0);
    }

    #[test]
    fn canonical_energy_examples() {
        let a = Couplings::new(0.3, 0.8);
        assert_relative_eq!(canonical_energy_per_particle(2.0, a, 0.0, 0.0).unwrap(), 0.25);
        assert_relative_eq!(canonical_energy_per_particle(1.0, a, 1.0, 1.0).unwrap(), 0.5 - 1.1);
        assert!(canonical_energy_per_particle(0.0, a, 0.0, 0.0).is_err());
    }

    #[test]
    fn weak_coupling_has_single_minimum() {
        let pts = solve_fixed_points(Couplings::new(0.5, 0.5), &DEFAULT_SEEDS, &opts()).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].y_1.abs() < 1e-12 && pts[0].y_2.abs() < 1e-12);
        assert_eq!(pts[0].stability, Stability::Minimum);
    }

    #[test]
    fn phase_labels() {
        let o = opts();
        let t = Thermo::default();
        assert_eq!(classify_phase(Couplings::new(0.5, 0.5), t, &o).unwrap().phase, Phase::Paramagnetic);
        let n = classify_phase(Couplings::new(0.5, 2.0), t, &o).unwrap();
        assert_eq!(n.phase, Phase::Nematic);
        assert!(n.global_min.y_2 > 0.0);
        assert!(n.coexistence, "the two nematic branches are degenerate");
        let f = classify_phase(Couplings::new(2.0, 0.5), t, &o).unwrap();
        assert_eq!(f.phase, Phase::Ferromagnetic);
        assert!(f.global_min.y_1 > 0.0);
    }

    #[test]
    fn phase_from_order_uses_tolerance() {
        assert_eq!(Phase::from_order(5e-5, 5e-5, 1e-4), Phase::Paramagnetic);
        assert_eq!(Phase::from_order(5e-5, 0.3, 1e-4), Phase::Nematic);
        assert_eq!(Phase::from_order(-0.2, 0.3, 1e-4), Phase::Ferromagnetic);
        assert_eq!("nematic".parse::<Phase>().unwrap(), Phase::Nematic);
    }
}
