//! Physical cavity parameters and the effective long-range model they map to.
//!
//! Two standing-wave modes are pumped by coherent scattering of transverse
//! lasers. After eliminating the cavity fields the atoms feel a mean-field
//! Hamiltonian with couplings `gamma_n = alpha_n / beta`, plus friction and
//! momentum diffusion whose ratio fixes the stationary temperature `1/beta`.
//!
//! Default units are dimensionless with `hbar = m = k = 1`, so the recoil
//! frequency is `1/2` and the projected wavenumbers are `k1 = 1/2`, `k2 = 1`.
//! Every formula keeps the constants explicit, so other unit systems work as
//! long as the inputs are consistent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when checking that both modes imply the same
/// temperature.
pub const DEFAULT_STATIONARITY_TOL: f64 = 1e-9;

/// Tag carried through serialization so readers know which unit system the
/// numbers are in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Dimensionless,
    Si,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    pub delta_1: f64,
    pub delta_2: f64,
    pub kappa_1: f64,
    pub kappa_2: f64,
    pub s_1: f64,
    pub s_2: f64,
    pub n_atoms: usize,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default)]
    pub units: Units,
}

fn one() -> f64 {
    1.0
}

fn default_phi() -> f64 {
    PI / 3.0
}

impl CavityParams {
    /// Dimensionless parameters with identical modes apart from the scattering
    /// amplitudes.
    pub fn symmetric(delta: f64, kappa: f64, s_1: f64, s_2: f64, n_atoms: usize) -> Self {
        CavityParams {
            delta_1: delta,
            delta_2: delta,
            kappa_1: kappa,
            kappa_2: kappa,
            s_1,
            s_2,
            n_atoms,
            k: 1.0,
            phi: default_phi(),
            hbar: 1.0,
            mass: 1.0,
            units: Units::Dimensionless,
        }
    }

    /// Dimensionless parameters that realise the couplings `(alpha_1, alpha_2)`
    /// at inverse temperature `beta`, using `delta_n = -kappa_n` so that the
    /// cross-diffusion terms vanish identically.
    pub fn from_couplings(alpha_1: f64, alpha_2: f64, beta: f64, n_atoms: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return invalid(format!("beta must be positive, got {beta}"));
        }
        if !(alpha_1 >= 0.0 && alpha_2 >= 0.0) {
            return invalid("couplings must be non-negative");
        }
        if n_atoms == 0 {
            return invalid("n_atoms must be at least 1");
        }
        // beta = 2 / (hbar kappa) at delta = -kappa; alpha = N S^2 / kappa^2
        let kappa = 2.0 / beta;
        let n = n_atoms as f64;
        let s = |alpha: f64| kappa * (alpha / n).sqrt();
        Ok(CavityParams::symmetric(-kappa, kappa, s(alpha_1), s(alpha_2), n_atoms))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.delta_1,
            self.delta_2,
            self.kappa_1,
            self.kappa_2,
            self.s_1,
            self.s_2,
            self.k,
            self.phi,
            self.hbar,
            self.mass,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return invalid("cavity parameters must be finite");
        }
        if !(self.kappa_1 > 0.0 && self.kappa_2 > 0.0) {
            return invalid("cavity loss rates must be positive");
        }
        if self.s_1 < 0.0 || self.s_2 < 0.0 {
            return invalid("scattering amplitudes must be non-negative");
        }
        if self.n_atoms == 0 {
            return invalid("n_atoms must be at least 1");
        }
        if !(self.k > 0.0 && self.hbar > 0.0 && self.mass > 0.0) {
            return invalid("k, hbar and mass must be positive");
        }
        // The order parameters cos(kx/2), cos(kx) assume k1 = k2 / 2.
        if (self.phi.cos() - 0.5).abs() > 1e-12 {
            return invalid(format!(
                "only the pi/3 geometry (k1 = k/2) is supported, got phi = {}",
                self.phi
            ));
        }
        Ok(())
    }

    /// Recoil frequency `hbar k^2 / (2 m)`.
    pub fn omega_r(&self) -> f64 {
        self.hbar * self.k * self.k / (2.0 * self.mass)
    }

    /// Projected wavenumbers `(k cos(phi), k)`.
    pub fn projected_wavenumbers(&self) -> (f64, f64) {
        (self.k * self.phi.cos(), self.k)
    }

    fn mode(&self, n: usize) -> (f64, f64, f64) {
        match n {
            1 => (self.delta_1, self.kappa_1, self.s_1),
            _ => (self.delta_2, self.kappa_2, self.s_2),
        }
    }

    /// Inverse temperature implied by mode `n` alone.
    pub fn mode_beta(&self, n: usize) -> f64 {
        let (delta, kappa, _) = self.mode(n);
        -4.0 * delta / (self.hbar * (delta * delta + kappa * kappa))
    }
}

/// Dimensionless couplings and transport coefficients of the effective model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveModel {
    pub alpha_1: f64,
    pub alpha_2: f64,
    pub beta: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
    pub d_1: f64,
    pub d_2: f64,
    pub g_1: f64,
    pub g_2: f64,
    pub eta_1: f64,
    pub eta_2: f64,
    pub omega_r: f64,
    pub k1: f64,
    pub k2: f64,
    pub n_atoms: usize,
    pub hbar: f64,
    pub mass: f64,
    #[serde(default)]
    pub units: Units,
}

impl EffectiveModel {
    /// Shorthand for `map_cavity_to_effective(CavityParams::from_couplings(..))`.
    pub fn from_couplings(alpha_1: f64, alpha_2: f64, beta: f64, n_atoms: usize) -> Result<Self> {
        map_cavity_to_effective(&CavityParams::from_couplings(alpha_1, alpha_2, beta, n_atoms)?)
    }

    pub fn alpha(&self) -> (f64, f64) {
        (self.alpha_1, self.alpha_2)
    }

    pub fn gamma(&self) -> (f64, f64) {
        (self.gamma_1, self.gamma_2)
    }

    /// Hamiltonian-only copy: friction, diffusion and cross-diffusion zeroed.
    pub fn without_dissipation(&self) -> Self {
        EffectiveModel { d_1: 0.0, d_2: 0.0, g_1: 0.0, g_2: 0.0, eta_1: 0.0, eta_2: 0.0, ..self.clone() }
    }

    /// Inverse temperature fixed by the friction/diffusion ratio of mode `n`.
    pub fn fluctuation_dissipation_beta(&self, n: usize) -> Option<f64> {
        let (d, g) = match n {
            1 => (self.d_1, self.g_1),
            _ => (self.d_2, self.g_2),
        };
        (d > 0.0).then(|| -self.mass * g / d)
    }
}

/// Checks that both detunings are negative and that the two modes imply the
/// same temperature to relative tolerance `tol`.
pub fn validate_stationarity_condition(cavity: &CavityParams, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return invalid(format!("tolerance must be non-negative, got {tol}"));
    }
    if !(cavity.delta_1 < 0.0 && cavity.delta_2 < 0.0) {
        return Ok(false);
    }
    let r1 = cavity.delta_1 / (cavity.delta_1.powi(2) + cavity.kappa_1.powi(2));
    let r2 = cavity.delta_2 / (cavity.delta_2.powi(2) + cavity.kappa_2.powi(2));
    Ok((r1 - r2).abs() <= tol * r2.abs())
}

/// Maps cavity parameters onto the effective model.
///
/// A mode with zero scattering amplitude is not pumped and places no
/// constraint on the stationary state; if only one mode is pumped its own
/// temperature is used. Otherwise both detunings must be negative and agree
/// on the temperature within [`DEFAULT_STATIONARITY_TOL`].
pub fn map_cavity_to_effective(cavity: &CavityParams) -> Result<EffectiveModel> {
    map_cavity_to_effective_with_tol(cavity, DEFAULT_STATIONARITY_TOL)
}

pub fn map_cavity_to_effective_with_tol(cavity: &CavityParams, tol: f64) -> Result<EffectiveModel> {
    cavity.validate()?;
    let pumped_1 = cavity.s_1 > 0.0;
    let pumped_2 = cavity.s_2 > 0.0;
    let beta = match (pumped_1, pumped_2) {
        (true, false) => {
            if !(cavity.delta_1 < 0.0) {
                return Err(Error::StationarityViolation(format!(
                    "delta_1 = {} must be negative",
                    cavity.delta_1
                )));
            }
            cavity.mode_beta(1)
        }
        (false, true) => {
            if !(cavity.delta_2 < 0.0) {
                return Err(Error::StationarityViolation(format!(
                    "delta_2 = {} must be negative",
                    cavity.delta_2
                )));
            }
            cavity.mode_beta(2)
        }
        _ => {
            if !validate_stationarity_condition(cavity, tol)? {
                return Err(Error::StationarityViolation(format!(
                    "detunings ({}, {}) must be negative and give equal temperatures ({} vs {})",
                    cavity.delta_1,
                    cavity.delta_2,
                    cavity.mode_beta(1),
                    cavity.mode_beta(2)
                )));
            }
            cavity.mode_beta(2)
        }
    };

    let n = cavity.n_atoms as f64;
    let (k1, k2) = cavity.projected_wavenumbers();
    let hbar = cavity.hbar;
    let m = cavity.mass;
    let coeffs = |n_mode: usize, kn: f64| {
        let (delta, kappa, s) = cavity.mode(n_mode);
        let lor = delta * delta + kappa * kappa;
        let s2 = s * s;
        let alpha = 4.0 * n * s2 * delta * delta / (lor * lor);
        let d = (hbar * kn).powi(2) * s2 * kappa / lor;
        let g = hbar * kn * kn / m * s2 * 4.0 * delta * kappa / (lor * lor);
        let eta = (hbar * kn).powi(2) / m * s2 * (kappa * kappa - delta * delta) / (lor * lor);
        (alpha, d, g, eta)
    };
    let (alpha_1, d_1, g_1, eta_1) = coeffs(1, k1);
    let (alpha_2, d_2, g_2, eta_2) = coeffs(2, k2);

    Ok(EffectiveModel {
        alpha_1,
        alpha_2,
        beta,
        gamma_1: alpha_1 / beta,
        gamma_2: alpha_2 / beta,
        d_1,
        d_2,
        g_1,
        g_2,
        eta_1,
        eta_2,
        omega_r: cavity.omega_r(),
        k1,
        k2,
        n_atoms: cavity.n_atoms,
        hbar,
        mass: m,
        units: cavity.units,
    })
}

/// Ratio of Doppler broadening to the cavity response rate, per mode. The
/// cavity-eliminated description needs both values well below one.
pub fn semiclassical_epsilon(cavity: &CavityParams, delta_p: f64) -> Result<(f64, f64)> {
    if !(delta_p > 0.0) {
        return invalid(format!("momentum width must be positive, got {delta_p}"));
    }
    let doppler = cavity.k * delta_p / cavity.mass;
    let eps = |kappa: f64, delta: f64| doppler / kappa.hypot(delta);
    Ok((eps(cavity.kappa_1, cavity.delta_1), eps(cavity.kappa_2, cavity.delta_2)))
}

/// Reading of the couplings as the single competition parameter of the
/// generalized HMF model.
///
/// The identification `alpha_1/beta -> Delta`, `alpha_2/beta -> 1 - Delta`
/// only closes if energies are measured in units of `(alpha_1+alpha_2)/beta`;
/// `delta` is that normalised ratio and `coupling_sum` the scale that was
/// divided out. `dimensionally_ambiguous` is always set to make the
/// convention explicit to consumers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhmfTranslation {
    pub delta: f64,
    pub coupling_sum: f64,
    pub dimensionally_ambiguous: bool,
}

pub fn ghmf_translation(alpha_1: f64, alpha_2: f64) -> Result<GhmfTranslation> {
    let sum = alpha_1 + alpha_2;
    if !(alpha_1 >= 0.0 && alpha_2 >= 0.0 && sum > 0.0) {
        return invalid("couplings must be non-negative and not both zero");
    }
    Ok(GhmfTranslation { delta: alpha_1 / sum, coupling_sum: sum, dimensionally_ambiguous: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_detuning_is_stationary() {
        let c = CavityParams::symmetric(-2.0, 2.0, 0.1, 0.1, 100);
        assert!(validate_stationarity_condition(&c, 1e-9).unwrap());
    }

    #[test]
    fn positive_detuning_is_not_stationary() {
        let mut c = CavityParams::symmetric(-1.0, 1.0, 0.1, 0.1, 100);
        c.delta_2 = 1.0;
        assert!(!validate_stationarity_condition(&c, 1e-9).unwrap());
        assert!(matches!(map_cavity_to_effective(&c), Err(Error::StationarityViolation(_))));
    }

    #[test]
    fn negative_tolerance_rejected() {
        let c = CavityParams::symmetric(-1.0, 1.0, 0.1, 0.1, 100);
        assert!(validate_stationarity_condition(&c, -1.0).is_err());
    }

    #[test]
    fn quadratic_root_satisfies_condition() {
        // delta_2 from the quadratic delta_1 x^2 - (delta_1^2 + kappa_1^2) x + kappa_2^2 delta_1 = 0,
        // located by bisection rather than the closed form.
        let (d1, k1, k2) = (-1.3, 0.7, 0.6);
        let f = |x: f64| d1 * x * x - (d1 * d1 + k1 * k1) * x + k2 * k2 * d1;
        // f(0) < 0 < f(-k2): one negative root lies in (-k2, 0).
        let (mut lo, mut hi) = (-k2, -1e-12);
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut c = CavityParams::symmetric(d1, k1, 0.1, 0.1, 10);
        c.kappa_2 = k2;
        c.delta_2 = 0.5 * (lo + hi);
        assert!(validate_stationarity_condition(&c, 1e-9).unwrap());
        let m = map_cavity_to_effective(&c).unwrap();
        assert_relative_eq!(m.beta, c.mode_beta(1), max_relative = 1e-12);
    }

    #[test]
    fn resonant_detuning_substitution() {
        let (kappa, s, n) = (1.5, 0.2, 40);
        let c = CavityParams::symmetric(-kappa, kappa, s, s, n);
        let m = map_cavity_to_effective(&c).unwrap();
        let expected_alpha = n as f64 * s * s / (kappa * kappa);
        assert_relative_eq!(m.alpha_1, expected_alpha, max_relative = 1e-14);
        assert_relative_eq!(m.alpha_2, expected_alpha, max_relative = 1e-14);
        assert_relative_eq!(m.beta, 2.0 / kappa, max_relative = 1e-14);
        assert_eq!(m.eta_1, 0.0);
        assert_eq!(m.eta_2, 0.0);
        assert_relative_eq!(m.gamma_1, m.alpha_1 / m.beta, max_relative = 1e-14);
        assert_relative_eq!(m.omega_r, 0.5);
        assert_relative_eq!(m.k1, 0.5, max_relative = 1e-15);
        assert_eq!(m.k2, 1.0);
    }

    #[test]
    fn zero_scattering_zeroes_coefficients() {
        let c = CavityParams::symmetric(-1.0, 1.0, 0.0, 0.3, 10);
        let m = map_cavity_to_effective(&c).unwrap();
        assert_eq!((m.alpha_1, m.d_1, m.g_1, m.eta_1), (0.0, 0.0, 0.0, 0.0));
        assert!(m.alpha_2 > 0.0);
    }

    #[test]
    fn single_pumped_mode_ignores_other_detuning() {
        let mut c = CavityParams::symmetric(-1.0, 1.0, 0.0, 0.3, 10);
        c.delta_1 = 5.0;
        let m = map_cavity_to_effective(&c).unwrap();
        assert_relative_eq!(m.beta, c.mode_beta(2));
    }

    #[test]
    fn from_couplings_round_trip() {
        let m = EffectiveModel::from_couplings(0.5, 2.0, 1.0, 200).unwrap();
        assert_relative_eq!(m.alpha_1, 0.5, max_relative = 1e-14);
        assert_relative_eq!(m.alpha_2, 2.0, max_relative = 1e-14);
        assert_relative_eq!(m.beta, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn eta_sign_changes_at_unit_ratio() {
        for (delta, sign) in [(-0.5, 1.0), (-2.0, -1.0)] {
            let c = CavityParams::symmetric(delta, 1.0, 0.1, 0.1, 10);
            let m = map_cavity_to_effective(&c).unwrap();
            assert_eq!(m.eta_1.signum(), sign);
            assert_eq!(m.eta_2.signum(), sign);
        }
    }

    #[test]
    fn epsilon_examples() {
        let c = CavityParams::symmetric(-1.0, 1.0, 0.1, 0.1, 10);
        let (e1, e2) = semiclassical_epsilon(&c, 1.0).unwrap();
        assert_relative_eq!(e1, 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(e2, 1.0 / 2f64.sqrt(), max_relative = 1e-15);

        let c2 = CavityParams::symmetric(-2.0, 2.0, 0.1, 0.1, 10);
        let (h1, _) = semiclassical_epsilon(&c2, 1.0).unwrap();
        assert_relative_eq!(h1, e1 / 2.0, max_relative = 1e-15);

        let (z1, z2) = semiclassical_epsilon(&c, 1e-300).unwrap();
        assert!(z1 < 1e-299 && z2 < 1e-299);
        assert!(semiclassical_epsilon(&c, 0.0).is_err());
        assert!(semiclassical_epsilon(&c, -1.0).is_err());
    }

    #[test]
    fn invalid_geometry_rejected() {
        let mut c = CavityParams::symmetric(-1.0, 1.0, 0.1, 0.1, 10);
        c.phi = 0.3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn ghmf_translation_reads_ratio() {
        let t = ghmf_translation(0.5, 1.5).unwrap();
        assert_relative_eq!(t.delta, 0.25);
        assert_relative_eq!(t.coupling_sum, 2.0);
        assert!(t.dimensionally_ambiguous);
        assert!(ghmf_translation(0.0, 0.0).is_err());
    }
}
