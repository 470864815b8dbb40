//! Stationary states of laser-driven atoms coupled to two standing-wave
//! cavity modes.
//!
//! The crate maps cavity parameters onto a two-harmonic mean-field model,
//! computes its canonical phase diagram by free-energy minimisation, and
//! checks the result against direct N-particle Langevin and microcanonical
//! simulations.

pub mod bessel;
pub mod equilibrium;
pub mod error;
pub mod langevin;
pub mod md;
pub mod observables;
pub mod params;
pub mod phase_diagram;
pub mod quadrature;
pub mod stats;

pub use error::{Error, Result};
