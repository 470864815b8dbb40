//! Stochastic N-particle dynamics whose Fokker-Planck equation has the
//! Boltzmann state `exp(-beta H)` as its stationary solution.
//!
//! Each step splits into a symplectic update under the mean-field
//! Hamiltonian and a dissipative update. The friction and diffusion act on
//! one collective direction per cavity mode, `u_n = (sin k_n x_i)_i`, so the
//! dissipative part is an Ornstein-Uhlenbeck process in the scalar
//! `c_n = u_n . p` and can be integrated exactly with one shared Gaussian per
//! mode and step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::observables::{wrap_phase, EnsembleState, OrderPair};
use crate::params::EffectiveModel;
use crate::stats::{skewness_kurtosis, Estimate, Histogram};

pub const DEFAULT_DT: f64 = 0.005;
pub const STABILITY_WARNING: f64 = 0.1;
const INIT_STREAM: u64 = u64::MAX;

/// Symplectic core of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Velocity Verlet (kick-drift-kick), second order.
    Leapfrog,
    /// Yoshida's fourth-order composition of three velocity Verlet steps.
    #[default]
    Yoshida4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Uniform random phases, zero momenta.
    Cold,
    /// Phases alternating between 0 and pi with Gaussian jitter of width
    /// 0.01, zero momenta.
    ColdNematic,
    /// Uniform random phases, Maxwell momenta at `beta_0`.
    Thermal { beta_0: f64 },
    Explicit { q: Vec<f64>, p: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinConfig {
    pub model: EffectiveModel,
    pub n_atoms: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub n_steps: u64,
    pub seed: u64,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    pub init: InitialCondition,
    #[serde(default)]
    pub include_eta_term: bool,
    #[serde(default)]
    pub scheme: Scheme,
    /// Largest admissible `|p|`; defaults to `1e3 sqrt(m / beta)`.
    #[serde(default)]
    pub momentum_bound: Option<f64>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    /// First step whose momenta enter the pooled histogram; defaults to
    /// half the run.
    #[serde(default)]
    pub histogram_from: Option<u64>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_record_every() -> u64 {
    100
}
fn default_bins() -> usize {
    64
}

impl LangevinConfig {
    pub fn new(model: EffectiveModel, n_steps: u64, seed: u64, init: InitialCondition) -> Self {
        LangevinConfig {
            n_atoms: model.n_atoms,
            model,
            dt: DEFAULT_DT,
            n_steps,
            seed,
            record_every: default_record_every(),
            init,
            include_eta_term: false,
            scheme: Scheme::default(),
            momentum_bound: None,
            histogram_bins: default_bins(),
            histogram_from: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if self.n_atoms == 0 {
            return invalid("need at least one atom");
        }
        if self.n_atoms != self.model.n_atoms {
            return invalid(format!(
                "config has {} atoms but the model was mapped for {}",
                self.n_atoms, self.model.n_atoms
            ));
        }
        if self.record_every == 0 {
            return invalid("record_every must be at least 1");
        }
        if !(self.model.beta > 0.0 && self.model.mass > 0.0) {
            return invalid("model needs positive beta and mass");
        }
        if let InitialCondition::Thermal { beta_0 } = self.init {
            if !(beta_0 > 0.0) {
                return invalid(format!("initial beta must be positive, got {beta_0}"));
            }
        }
        if let InitialCondition::Explicit { q, .. } = &self.init {
            if q.len() != self.n_atoms {
                return invalid(format!("explicit state has {} atoms, expected {}", q.len(), self.n_atoms));
            }
        }
        if let Some(b) = self.momentum_bound {
            if !(b > 0.0) {
                return invalid("momentum bound must be positive");
            }
        }
        let s = self.stability_number();
        if s > STABILITY_WARNING {
            log::warn!("dt |Gamma| N = {s:.3} exceeds {STABILITY_WARNING}; consider a smaller time step");
        }
        Ok(())
    }

    /// `dt max_n |Gamma_n| N`.
    pub fn stability_number(&self) -> f64 {
        self.dt * self.model.g_1.abs().max(self.model.g_2.abs()) * self.n_atoms as f64
    }

    pub fn momentum_limit(&self) -> f64 {
        self.momentum_bound.unwrap_or_else(|| 1e3 * (self.model.mass / self.model.beta).sqrt())
    }
}

/// Phase-space state together with the trigonometric tables and forces at
/// the current positions, so each force evaluation costs one `sin_cos` per
/// particle.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub model: EffectiveModel,
    pub state: EnsembleState,
    s1: Vec<f64>,
    s2: Vec<f64>,
    force: Vec<f64>,
    theta: OrderPair,
}

impl Dynamics {
    pub fn new(state: EnsembleState, model: &EffectiveModel) -> Self {
        let n = state.len();
        let mut d = Dynamics {
            model: model.clone(),
            state,
            s1: vec![0.0; n],
            s2: vec![0.0; n],
            force: vec![0.0; n],
            theta: OrderPair::default(),
        };
        d.refresh();
        d
    }

    fn refresh(&mut self) {
        let n = self.state.len() as f64;
        let (mut c1, mut c2) = (0.0, 0.0);
        for (i, &q) in self.state.q.iter().enumerate() {
            let (s, c) = q.sin_cos();
            self.s1[i] = s;
            self.s2[i] = 2.0 * s * c;
            c1 += c;
            c2 += 1.0 - 2.0 * s * s;
        }
        self.theta = OrderPair::new(c1 / n, c2 / n);
        let m = &self.model;
        let a1 = -2.0 * m.gamma_1 * m.k1 * self.theta.theta_1;
        let a2 = -2.0 * m.gamma_2 * m.k2 * self.theta.theta_2;
        for i in 0..self.force.len() {
            self.force[i] = a1 * self.s1[i] + a2 * self.s2[i];
        }
    }

    pub fn theta(&self) -> OrderPair {
        self.theta
    }

    pub fn force(&self) -> &[f64] {
        &self.force
    }

    pub fn energy(&self) -> f64 {
        let m = &self.model;
        self.state.kinetic_energy(m.mass)
            - self.state.len() as f64 * (m.gamma_1 * self.theta.theta_1.powi(2) + m.gamma_2 * self.theta.theta_2.powi(2))
    }

    fn verlet(&mut self, dt: f64) {
        let h = 0.5 * dt;
        let v = self.model.k1 / self.model.mass * dt;
        for (p, f) in self.state.p.iter_mut().zip(&self.force) {
            *p += h * f;
        }
        for (q, p) in self.state.q.iter_mut().zip(&self.state.p) {
            *q = wrap_phase(*q + v * p);
        }
        self.refresh();
        for (p, f) in self.state.p.iter_mut().zip(&self.force) {
            *p += h * f;
        }
    }

    /// Advances the Hamiltonian flow by `dt`.
    pub fn hamiltonian_step(&mut self, dt: f64, scheme: Scheme) {
        match scheme {
            Scheme::Leapfrog => self.verlet(dt),
            Scheme::Yoshida4 => {
                let c = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - c);
                let w0 = -c * w1;
                self.verlet(w1 * dt);
                self.verlet(w0 * dt);
                self.verlet(w1 * dt);
            }
        }
        self.state.t += dt;
    }

    /// Exact friction and diffusion update over `dt` at frozen positions.
    /// `noise` holds one standard Gaussian per mode.
    pub fn dissipative_step(&mut self, dt: f64, noise: [f64; 2], include_eta: bool) {
        let m = &self.model;
        if include_eta {
            // local-equilibrium closure of the cross-diffusion term:
            // dp_j = -beta eta_n s_j sum_i s_i F_i dt
            for (eta, s) in [(m.eta_1, &self.s1), (m.eta_2, &self.s2)] {
                if eta == 0.0 {
                    continue;
                }
                let proj: f64 = s.iter().zip(&self.force).map(|(a, b)| a * b).sum();
                let k = -m.beta * eta * proj * dt;
                for (p, si) in self.state.p.iter_mut().zip(s) {
                    *p += k * si;
                }
            }
        }
        for (gamma, diff, s, xi) in [(m.g_1, m.d_1, &self.s1, noise[0]), (m.g_2, m.d_2, &self.s2, noise[1])] {
            if gamma == 0.0 && diff == 0.0 {
                continue;
            }
            let u2: f64 = s.iter().map(|v| v * v).sum();
            if u2 == 0.0 {
                continue;
            }
            let c: f64 = s.iter().zip(&self.state.p).map(|(a, b)| a * b).sum();
            let lam = gamma * u2;
            // int_0^dt exp(2 lam s) ds
            let spread = if lam == 0.0 { dt } else { (2.0 * lam * dt).exp_m1() / (2.0 * lam) };
            let c_new = c * (lam * dt).exp() + (2.0 * diff * spread).sqrt() * u2 * xi;
            let k = (c_new - c) / u2;
            for (p, si) in self.state.p.iter_mut().zip(s) {
                *p += k * si;
            }
        }
    }

    pub fn max_abs_momentum(&self) -> f64 {
        self.state.p.iter().fold(0.0f64, |a, p| if p.is_finite() { a.max(p.abs()) } else { f64::INFINITY })
    }
}

/// Counter-based noise: the Gaussian for mode `n` at step `k` depends only
/// on `(seed, k, n)`.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    base: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        NoiseSource { base: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut r = self.base.clone();
        r.set_stream(id);
        r.set_word_pos(0);
        r
    }

    pub fn gaussians(&self, step: u64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (mode, slot) in out.iter_mut().enumerate() {
            let mut r = self.stream(2 * step + mode as u64);
            *slot = StandardNormal.sample(&mut r);
        }
        out
    }
}

/// Conservative force and friction drift on every particle.
pub fn langevin_drift(state: &EnsembleState, model: &EffectiveModel) -> (Vec<f64>, Vec<f64>) {
    let d = Dynamics::new(state.clone(), model);
    let c1: f64 = d.s1.iter().zip(&state.p).map(|(a, b)| a * b).sum();
    let c2: f64 = d.s2.iter().zip(&state.p).map(|(a, b)| a * b).sum();
    let friction = d.s1.iter().zip(&d.s2).map(|(a, b)| model.g_1 * a * c1 + model.g_2 * b * c2).collect();
    (d.force, friction)
}

pub fn initial_state(config: &LangevinConfig) -> Result<EnsembleState> {
    initial_state_for(&config.init, config.n_atoms, config.model.mass, config.seed)
}

pub fn initial_state_for(init: &InitialCondition, n: usize, mass: f64, seed: u64) -> Result<EnsembleState> {
    let mut rng = NoiseSource::new(seed).stream(INIT_STREAM);
    let uniform = Uniform::new(0.0, std::f64::consts::TAU).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    match init {
        InitialCondition::Cold => EnsembleState::new((0..n).map(|_| uniform.sample(&mut rng)).collect(), vec![0.0; n]),
        InitialCondition::ColdNematic => {
            let q = (0..n)
                .map(|i| {
                    let jitter: f64 = StandardNormal.sample(&mut rng);
                    (if i % 2 == 0 { 0.0 } else { std::f64::consts::PI }) + 0.01 * jitter
                })
                .collect();
            EnsembleState::new(q, vec![0.0; n])
        }
        InitialCondition::Thermal { beta_0 } => {
            let q = (0..n).map(|_| uniform.sample(&mut rng)).collect();
            let sd = (mass / beta_0).sqrt();
            let p = (0..n).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); sd * z }).collect();
            EnsembleState::new(q, p)
        }
        InitialCondition::Explicit { q, p } => {
            if q.len() != n {
                return invalid(format!("explicit state has {} atoms, expected {n}", q.len()));
            }
            EnsembleState::new(q.clone(), p.clone())
        }
    }
}

/// One full step: symplectic update, then the exact dissipative update with
/// the noise of step `step_index`.
pub fn step_langevin(state: &EnsembleState, config: &LangevinConfig, step_index: u64) -> Result<EnsembleState> {
    let mut d = Dynamics::new(state.clone(), &config.model);
    advance(&mut d, config, &NoiseSource::new(config.seed), step_index)?;
    Ok(d.state)
}

fn advance(d: &mut Dynamics, config: &LangevinConfig, noise: &NoiseSource, step: u64) -> Result<()> {
    d.hamiltonian_step(config.dt, config.scheme);
    d.dissipative_step(config.dt, noise.gaussians(step), config.include_eta_term);
    let pmax = d.max_abs_momentum();
    if !(pmax <= config.momentum_limit()) {
        return Err(Error::NumericalBlowup { step, momentum: pmax });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub steps: Vec<u64>,
    pub times: Vec<f64>,
    pub theta_1: Vec<f64>,
    pub theta_2: Vec<f64>,
    /// `<p^2>/m` over the particles.
    pub kinetic_temperature: Vec<f64>,
    pub energy: Vec<f64>,
    /// Bias-corrected skewness and excess kurtosis of the momenta at each
    /// recorded time.
    pub momentum_skewness: Vec<f64>,
    pub momentum_kurtosis: Vec<f64>,
    /// Momenta pooled over recorded times from `histogram_from` on.
    pub momentum_histogram: Histogram,
    pub final_state: EnsembleState,
    pub checksum: String,
}

impl TrajectoryRecord {
    pub fn empty(final_state: EnsembleState, histogram: Histogram) -> Self {
        let checksum = state_checksum(&final_state);
        TrajectoryRecord {
            steps: vec![],
            times: vec![],
            theta_1: vec![],
            theta_2: vec![],
            kinetic_temperature: vec![],
            energy: vec![],
            momentum_skewness: vec![],
            momentum_kurtosis: vec![],
            momentum_histogram: histogram,
            final_state,
            checksum,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, step: u64, d: &Dynamics) {
        let th = d.theta();
        self.steps.push(step);
        self.times.push(d.state.t);
        self.theta_1.push(th.theta_1);
        self.theta_2.push(th.theta_2);
        self.kinetic_temperature.push(d.state.kinetic_temperature(d.model.mass));
        self.energy.push(d.energy());
        let (s, k) = skewness_kurtosis(&d.state.p);
        self.momentum_skewness.push(s);
        self.momentum_kurtosis.push(k);
    }
}

/// SHA-256 over the little-endian bytes of all phases, then all momenta.
pub fn state_checksum(state: &EnsembleState) -> String {
    let mut h = Sha256::new();
    for v in state.q.iter().chain(&state.p) {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_trajectory(config: &LangevinConfig) -> Result<TrajectoryRecord> {
    config.validate()?;
    let noise = NoiseSource::new(config.seed);
    let mut d = Dynamics::new(initial_state(config)?, &config.model);
    let width = 6.0 * (config.model.mass / config.model.beta).sqrt();
    let mut rec = TrajectoryRecord::empty(d.state.clone(), Histogram::new(-width, width, config.histogram_bins));
    let hist_from = config.histogram_from.unwrap_or(config.n_steps / 2);
    let sample = |rec: &mut TrajectoryRecord, step: u64, d: &Dynamics| {
        rec.push(step, d);
        if step >= hist_from {
            rec.momentum_histogram.extend(&d.state.p);
        }
    };
    sample(&mut rec, 0, &d);
    for step in 1..=config.n_steps {
        advance(&mut d, config, &noise, step)?;
        if step % config.record_every == 0 {
            sample(&mut rec, step, &d);
        }
    }
    rec.checksum = state_checksum(&d.state);
    rec.final_state = d.state;
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnosis {
    Stationary,
    /// The momenta never fluctuate: no diffusion is acting.
    ZeroDiffusion,
    TemperatureMismatch,
    NonGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub samples: usize,
    pub temperature: Estimate,
    pub expected_temperature: f64,
    pub skewness: Estimate,
    pub kurtosis: Estimate,
    pub theta_1: Estimate,
    pub theta_2: Estimate,
    pub temperature_ok: bool,
    pub gaussian_ok: bool,
    pub diagnosis: Diagnosis,
    pub pass: bool,
}

pub const MIN_STATIONARY_SAMPLES: usize = 100;

/// Tests the recorded samples from index `burn_in` on against the Boltzmann
/// state at `beta_expected`: temperature within three standard errors,
/// momentum skewness and excess kurtosis within four.
pub fn stationarity_diagnostics(record: &TrajectoryRecord, beta_expected: f64, burn_in: usize) -> Result<StationarityReport> {
    if !(beta_expected > 0.0) {
        return invalid("expected beta must be positive");
    }
    let have = record.len().saturating_sub(burn_in);
    if have < MIN_STATIONARY_SAMPLES {
        return Err(Error::InsufficientSamples { have, need: MIN_STATIONARY_SAMPLES });
    }
    let tail = |v: &[f64]| Estimate::of(&v[burn_in..]);
    let temperature = tail(&record.kinetic_temperature)?;
    let skewness = tail(&record.momentum_skewness)?;
    let kurtosis = tail(&record.momentum_kurtosis)?;
    let expected = 1.0 / beta_expected;
    let temperature_ok = temperature.within(expected, 3.0);
    let gaussian_ok = skewness.within(0.0, 4.0) && kurtosis.within(0.0, 4.0);
    let frozen = {
        let t = &record.kinetic_temperature[burn_in..];
        t.iter().all(|&v| v == t[0])
    };
    let diagnosis = if frozen {
        Diagnosis::ZeroDiffusion
    } else if !temperature_ok {
        Diagnosis::TemperatureMismatch
    } else if !gaussian_ok {
        Diagnosis::NonGaussian
    } else {
        Diagnosis::Stationary
    };
    Ok(StationarityReport {
        samples: have,
        temperature,
        expected_temperature: expected,
        skewness,
        kurtosis,
        theta_1: tail(&record.theta_1)?,
        theta_2: tail(&record.theta_2)?,
        temperature_ok,
        gaussian_ok,
        pass: diagnosis == Diagnosis::Stationary,
        diagnosis,
    })
}
