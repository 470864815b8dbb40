//! Particle ensembles and the observables built from them.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::{CavityParams, EffectiveModel};

/// Reduces a phase onto `[0, 2pi)`.
#[inline]
pub fn wrap_phase(q: f64) -> f64 {
    let r = q.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Positions stored as phases `q = k x / 2` on the periodic cell, with their
/// conjugate momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl EnsembleState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return invalid(format!("{} phases but {} momenta", q.len(), p.len()));
        }
        if q.is_empty() {
            return invalid("ensemble must contain at least one particle");
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return invalid("phases and momenta must be finite");
        }
        Ok(EnsembleState { q: q.into_iter().map(wrap_phase).collect(), p, t: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn kinetic_energy(&self, mass: f64) -> f64 {
        self.p.iter().map(|p| p * p).sum::<f64>() / (2.0 * mass)
    }

    /// `<p^2>/m`, the kinetic temperature in units where `k_B = 1`.
    pub fn kinetic_temperature(&self, mass: f64) -> f64 {
        2.0 * self.kinetic_energy(mass) / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct OrderPair {
    pub theta_1: f64,
    pub theta_2: f64,
}

impl OrderPair {
    pub fn new(theta_1: f64, theta_2: f64) -> Self {
        OrderPair { theta_1, theta_2 }
    }
}

/// `(mean cos q, mean cos 2q)` over the ensemble.
pub fn order_parameters(state: &EnsembleState) -> OrderPair {
    order_parameters_of(&state.q)
}

pub fn order_parameters_of(q: &[f64]) -> OrderPair {
    let (mut c1, mut c2) = (0.0, 0.0);
    for &qi in q {
        let (s, c) = qi.sin_cos();
        c1 += c;
        // cos 2q = 1 - 2 sin^2 q
        c2 += 1.0 - 2.0 * s * s;
    }
    let n = q.len() as f64;
    OrderPair { theta_1: c1 / n, theta_2: c2 / n }
}

/// Mean-field Hamiltonian `sum p^2/2m - N (gamma_1 Theta_1^2 + gamma_2 Theta_2^2)`.
pub fn mean_field_energy(state: &EnsembleState, model: &EffectiveModel) -> f64 {
    let theta = order_parameters(state);
    let n = state.len() as f64;
    state.kinetic_energy(model.mass)
        - n * (model.gamma_1 * theta.theta_1.powi(2) + model.gamma_2 * theta.theta_2.powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityFields {
    pub e_1: Complex64,
    pub e_2: Complex64,
}

/// Stationary intracavity amplitudes `N S_n Theta_n / (Delta_n + i kappa_n)`.
pub fn cavity_field_amplitudes(cavity: &CavityParams, theta: OrderPair) -> CavityFields {
    let n = cavity.n_atoms as f64;
    let field = |s: f64, th: f64, delta: f64, kappa: f64| {
        Complex64::new(n * s * th, 0.0) / Complex64::new(delta, kappa)
    };
    CavityFields {
        e_1: field(cavity.s_1, theta.theta_1, cavity.delta_1, cavity.kappa_1),
        e_2: field(cavity.s_2, theta.theta_2, cavity.delta_2, cavity.kappa_2),
    }
}
