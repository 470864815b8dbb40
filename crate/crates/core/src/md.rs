//! Hamiltonian dynamics at fixed energy: microcanonical averages, caloric
//! curves and comparison with the canonical ensemble.
//!
//! The energy scale is fixed by a reference inverse temperature,
//! `gamma_n = alpha_n / beta_ref`, so both ensembles share the coupling axes.

use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{canonical_energy_per_particle, classify_phase, Couplings, Phase, SolverOptions, Thermo};
use crate::error::{invalid, Error, Result};
use crate::langevin::{state_checksum, Dynamics, NoiseSource, Scheme};
use crate::observables::{mean_field_energy, EnsembleState};
use crate::params::EffectiveModel;
use crate::quadrature::exponent_max;
use crate::stats::{integrated_autocorrelation_time, Estimate};

pub const DEFAULT_MD_DT: f64 = 0.002;
const INIT_STREAM: u64 = u64::MAX - 1;
const MAX_REDRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "samples", rename_all = "snake_case")]
pub enum BurnIn {
    /// Twenty integrated autocorrelation times of `Theta_2`, measured on the
    /// second half of the record and capped at half of it.
    Auto,
    /// A fixed number of recorded samples.
    Samples(usize),
}

impl Default for BurnIn {
    fn default() -> Self {
        BurnIn::Auto
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MDConfig {
    pub alpha: Couplings,
    #[serde(default = "one")]
    pub beta_ref: f64,
    pub n_atoms: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub n_steps: u64,
    pub energy_per_particle: f64,
    pub seed: u64,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub burn_in: BurnIn,
    /// Largest admissible `|p|`; defaults to `1e3 sqrt(m max(1/beta_ref, |eps|))`.
    #[serde(default)]
    pub momentum_bound: Option<f64>,
    /// Independent trajectories averaged per energy. Trapped particles
    /// rarely cross between wells, so one trajectory does not sample the
    /// well populations.
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

fn one() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    DEFAULT_MD_DT
}
fn default_record_every() -> u64 {
    10
}
fn default_replicas() -> usize {
    1
}

impl MDConfig {
    pub fn new(alpha: Couplings, n_atoms: usize, n_steps: u64, energy_per_particle: f64, seed: u64) -> Self {
        MDConfig {
            alpha,
            beta_ref: 1.0,
            n_atoms,
            dt: DEFAULT_MD_DT,
            n_steps,
            energy_per_particle,
            seed,
            record_every: default_record_every(),
            scheme: Scheme::default(),
            burn_in: BurnIn::Auto,
            momentum_bound: None,
            replicas: 1,
        }
    }

    /// Lowest reachable energy per particle, `-(alpha_1 + alpha_2)/beta_ref`.
    pub fn energy_floor(&self) -> f64 {
        -(self.alpha.alpha_1 + self.alpha.alpha_2) / self.beta_ref
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.beta_ref > 0.0 && self.beta_ref.is_finite()) {
            return invalid("reference beta must be positive");
        }
        if self.n_atoms == 0 {
            return invalid("need at least one atom");
        }
        if self.record_every == 0 {
            return invalid("record_every must be at least 1");
        }
        if self.replicas == 0 {
            return invalid("need at least one replica");
        }
        if !self.energy_per_particle.is_finite() {
            return invalid("energy per particle must be finite");
        }
        let floor = self.energy_floor();
        if self.energy_per_particle < floor - floor_slack(floor) {
            return Err(Error::Infeasible { epsilon: self.energy_per_particle, floor });
        }
        Ok(())
    }

    /// Hamiltonian-only model with `gamma_n = alpha_n / beta_ref`.
    pub fn model(&self) -> Result<EffectiveModel> {
        Ok(EffectiveModel::from_couplings(self.alpha.alpha_1, self.alpha.alpha_2, self.beta_ref, self.n_atoms)?
            .without_dissipation())
    }

    fn momentum_limit(&self) -> f64 {
        self.momentum_bound
            .unwrap_or_else(|| 1e3 * (1.0 / self.beta_ref).max(self.energy_per_particle.abs()).sqrt())
    }
}

fn floor_slack(floor: f64) -> f64 {
    1e-12 * floor.abs().max(1.0)
}

/// Canonical energy per particle at inverse temperature `b` for fixed
/// `gamma`, together with the order parameters used.
fn canonical_energy_at(alpha: Couplings, beta_ref: f64, b: f64, opts: &SolverOptions) -> Result<(f64, [f64; 2])> {
    let scaled = Couplings::new(alpha.alpha_1 * b / beta_ref, alpha.alpha_2 * b / beta_ref);
    let p = classify_phase(scaled, Thermo { beta: b, ..Thermo::default() }, opts)?;
    let y = p.global_min.y();
    Ok((canonical_energy_per_particle(b, scaled, y[0], y[1])?, y))
}

/// Inverse temperature whose canonical energy matches `epsilon`, by
/// bisection in `ln beta`. Across a first-order jump it returns the
/// transition temperature.
pub fn auxiliary_beta(alpha: Couplings, beta_ref: f64, epsilon: f64) -> Result<(f64, [f64; 2])> {
    let opts = SolverOptions::default();
    let (mut lo, mut hi) = ((1e-6f64).ln(), (1e6f64).ln());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (e, _) = canonical_energy_at(alpha, beta_ref, mid.exp(), &opts)?;
        // energy falls as beta grows
        if e > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    let b = (0.5 * (lo + hi)).exp();
    let (_, y) = canonical_energy_at(alpha, beta_ref, b, &opts)?;
    Ok((b, y))
}

/// Draws a state with `mean_field_energy / N = epsilon`: phases i.i.d. from
/// the mean-field single-particle density at an auxiliary temperature,
/// Maxwell momenta at that temperature, then one uniform momentum rescale.
pub fn sample_microcanonical_init(config: &MDConfig) -> Result<EnsembleState> {
    config.validate()?;
    let n = config.n_atoms;
    let eps = config.energy_per_particle;
    let floor = config.energy_floor();
    if (eps - floor).abs() <= floor_slack(floor) {
        return EnsembleState::new(vec![0.0; n], vec![0.0; n]);
    }
    let model = config.model()?;
    let (mut b, y) = auxiliary_beta(config.alpha, config.beta_ref, eps)?;
    let mut rng = NoiseSource::new(config.seed).stream(INIT_STREAM);
    let uniform = Uniform::new(0.0, std::f64::consts::TAU).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let unit = Uniform::new(0.0, 1.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for _ in 0..MAX_REDRAWS {
        let a1 = config.alpha.alpha_1 * b / config.beta_ref * y[0];
        let a2 = config.alpha.alpha_2 * b / config.beta_ref * y[1];
        let top = exponent_max(a1, a2);
        let q: Vec<f64> = (0..n)
            .map(|_| loop {
                let q: f64 = uniform.sample(&mut rng);
                let w = (2.0 * (a1 * q.cos() + a2 * (2.0 * q).cos() - top)).exp();
                if unit.sample(&mut rng) < w {
                    break q;
                }
            })
            .collect();
        let sd = (model.mass / b).sqrt();
        let mut p: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sd * z
            })
            .collect();
        let trial = EnsembleState::new(q, vec![0.0; n])?;
        let potential = mean_field_energy(&trial, &model);
        let kinetic = n as f64 * eps - potential;
        if kinetic < 0.0 {
            // the positions are too disordered for this energy
            b *= 2.0;
            continue;
        }
        let current: f64 = p.iter().map(|v| v * v).sum::<f64>() / (2.0 * model.mass);
        if current == 0.0 {
            continue;
        }
        let scale = (kinetic / current).sqrt();
        p.iter_mut().for_each(|v| *v *= scale);
        return EnsembleState::new(trial.q, p);
    }
    Err(Error::RescaleFailure(format!("no admissible positions for epsilon = {eps} after {MAX_REDRAWS} draws")))
}

/// One symplectic step of the Hamiltonian flow.
pub fn step_md(state: &EnsembleState, config: &MDConfig) -> Result<EnsembleState> {
    let mut d = Dynamics::new(state.clone(), &config.model()?);
    d.hamiltonian_step(config.dt, config.scheme);
    guard(&d, config, 1)?;
    Ok(d.state)
}

fn guard(d: &Dynamics, config: &MDConfig, step: u64) -> Result<()> {
    let pmax = d.max_abs_momentum();
    if !(pmax <= config.momentum_limit()) {
        return Err(Error::NumericalBlowup { step, momentum: pmax });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdRecord {
    pub times: Vec<f64>,
    pub theta_1: Vec<f64>,
    pub theta_2: Vec<f64>,
    pub kinetic_temperature: Vec<f64>,
    pub energy: Vec<f64>,
    /// Largest `|E(t) - E(0)|` over every step, relative to
    /// `max(|E(0)|, K(0))`.
    pub max_relative_energy_error: f64,
    pub final_state: EnsembleState,
    pub checksum: String,
}

/// Integrates from `state` and records observables every `record_every`
/// steps, including the initial state.
pub fn run_md_from(state: EnsembleState, config: &MDConfig) -> Result<MdRecord> {
    config.validate()?;
    let model = config.model()?;
    let mut d = Dynamics::new(state, &model);
    let e0 = d.energy();
    let scale = e0.abs().max(d.state.kinetic_energy(model.mass)).max(f64::MIN_POSITIVE);
    let mut rec = MdRecord {
        times: vec![],
        theta_1: vec![],
        theta_2: vec![],
        kinetic_temperature: vec![],
        energy: vec![],
        max_relative_energy_error: 0.0,
        final_state: d.state.clone(),
        checksum: String::new(),
    };
    let push = |rec: &mut MdRecord, d: &Dynamics| {
        let th = d.theta();
        rec.times.push(d.state.t);
        rec.theta_1.push(th.theta_1);
        rec.theta_2.push(th.theta_2);
        rec.kinetic_temperature.push(d.state.kinetic_temperature(model.mass));
        rec.energy.push(d.energy());
    };
    push(&mut rec, &d);
    for step in 1..=config.n_steps {
        d.hamiltonian_step(config.dt, config.scheme);
        guard(&d, config, step)?;
        let err = (d.energy() - e0).abs() / scale;
        rec.max_relative_energy_error = rec.max_relative_energy_error.max(err);
        if step % config.record_every == 0 {
            push(&mut rec, &d);
        }
    }
    rec.checksum = state_checksum(&d.state);
    rec.final_state = d.state;
    Ok(rec)
}

pub fn run_md(config: &MDConfig) -> Result<MdRecord> {
    run_md_from(sample_microcanonical_init(config)?, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaloricPoint {
    pub epsilon: f64,
    pub kinetic_temperature: f64,
    pub kinetic_temperature_err: f64,
    pub theta_1_avg: f64,
    pub theta_1_err: f64,
    pub theta_2_avg: f64,
    pub theta_2_err: f64,
    /// Mean over replicas of `|<Theta_1>|`, the magnitude in a state that
    /// breaks the `q -> q + pi` symmetry with a random sign.
    pub theta_1_abs_avg: f64,
    pub theta_1_abs_err: f64,
    pub burn_in_samples: usize,
    pub samples: usize,
    pub replicas: usize,
    pub max_relative_energy_error: f64,
    /// Set when this point failed; the numeric fields are then NaN.
    pub error: Option<String>,
}

impl CaloricPoint {
    fn failed(epsilon: f64, e: &Error) -> Self {
        CaloricPoint {
            epsilon,
            kinetic_temperature: f64::NAN,
            kinetic_temperature_err: f64::NAN,
            theta_1_avg: f64::NAN,
            theta_1_err: f64::NAN,
            theta_2_avg: f64::NAN,
            theta_2_err: f64::NAN,
            theta_1_abs_avg: f64::NAN,
            theta_1_abs_err: f64::NAN,
            burn_in_samples: 0,
            samples: 0,
            replicas: 0,
            max_relative_energy_error: f64::NAN,
            error: Some(e.to_string()),
        }
    }
}

pub fn burn_in_samples(record: &MdRecord, rule: BurnIn) -> usize {
    let n = record.theta_2.len();
    match rule {
        BurnIn::Samples(k) => k.min(n.saturating_sub(2)),
        BurnIn::Auto => {
            let tau = integrated_autocorrelation_time(&record.theta_2[n / 2..]);
            ((20.0 * tau).ceil() as usize).min(n / 2)
        }
    }
}

/// Time averages after burn-in.
pub fn summarize(epsilon: f64, record: &MdRecord, rule: BurnIn) -> Result<CaloricPoint> {
    let burn = burn_in_samples(record, rule);
    let t = Estimate::of(&record.kinetic_temperature[burn..])?;
    let t1 = Estimate::of(&record.theta_1[burn..])?;
    let t2 = Estimate::of(&record.theta_2[burn..])?;
    Ok(CaloricPoint {
        epsilon,
        kinetic_temperature: t.mean,
        kinetic_temperature_err: t.std_error,
        theta_1_avg: t1.mean,
        theta_1_err: t1.std_error,
        theta_2_avg: t2.mean,
        theta_2_err: t2.std_error,
        theta_1_abs_avg: t1.mean.abs(),
        theta_1_abs_err: t1.std_error,
        burn_in_samples: burn,
        samples: t.samples,
        replicas: 1,
        max_relative_energy_error: record.max_relative_energy_error,
        error: None,
    })
}

fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1))
}

/// Grand mean over replicas. The error is the larger of the spread between
/// replica means and the pooled within-replica error.
fn combine(epsilon: f64, parts: &[CaloricPoint]) -> CaloricPoint {
    let r = parts.len();
    if r == 1 {
        return parts[0].clone();
    }
    let rf = r as f64;
    let pick = |f: &dyn Fn(&CaloricPoint) -> (f64, f64)| {
        let vals: Vec<(f64, f64)> = parts.iter().map(f).collect();
        let m = vals.iter().map(|v| v.0).sum::<f64>() / rf;
        let spread = (vals.iter().map(|v| (v.0 - m).powi(2)).sum::<f64>() / (rf - 1.0) / rf).sqrt();
        let pooled = vals.iter().map(|v| v.1 * v.1).sum::<f64>().sqrt() / rf;
        (m, spread.max(pooled))
    };
    let (t, te) = pick(&|p| (p.kinetic_temperature, p.kinetic_temperature_err));
    let (t1, t1e) = pick(&|p| (p.theta_1_avg, p.theta_1_err));
    let (t2, t2e) = pick(&|p| (p.theta_2_avg, p.theta_2_err));
    let (a1, a1e) = pick(&|p| (p.theta_1_avg.abs(), p.theta_1_err));
    CaloricPoint {
        epsilon,
        kinetic_temperature: t,
        kinetic_temperature_err: te,
        theta_1_avg: t1,
        theta_1_err: t1e,
        theta_2_avg: t2,
        theta_2_err: t2e,
        theta_1_abs_avg: a1,
        theta_1_abs_err: a1e,
        burn_in_samples: parts.iter().map(|p| p.burn_in_samples).max().unwrap_or(0),
        samples: parts.iter().map(|p| p.samples).sum(),
        replicas: r,
        max_relative_energy_error: parts.iter().map(|p| p.max_relative_energy_error).fold(0.0, f64::max),
        error: None,
    }
}

/// Runs `config.replicas` independent trajectories at the configured energy
/// and averages them. Replica `k` uses a seed derived from `(seed, k)`.
pub fn microcanonical_point(config: &MDConfig) -> Result<CaloricPoint> {
    config.validate()?;
    let parts = (0..config.replicas)
        .into_par_iter()
        .map(|k| {
            let seed = if config.replicas == 1 { config.seed } else { point_seed(config.seed, k) };
            let cfg = MDConfig { seed, ..config.clone() };
            run_md(&cfg).and_then(|r| summarize(cfg.energy_per_particle, &r, cfg.burn_in))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(config.energy_per_particle, &parts))
}

/// One microcanonical run per energy, in parallel over `workers` threads.
/// A failing point is reported in place and the curve continues.
pub fn caloric_curve(epsilons: &[f64], config: &MDConfig, workers: usize) -> Result<Vec<CaloricPoint>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        epsilons
            .par_iter()
            .enumerate()
            .map(|(i, &eps)| {
                let cfg = MDConfig { energy_per_particle: eps, seed: point_seed(config.seed, i), ..config.clone() };
                match microcanonical_point(&cfg) {
                    Ok(p) => p,
                    Err(e) => {
                        log::warn!("caloric point epsilon = {eps} failed: {e}");
                        CaloricPoint::failed(eps, &e)
                    }
                }
            })
            .collect()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    Disagree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub alpha: Couplings,
    pub beta: f64,
    pub canonical_phase: Phase,
    pub canonical_theta: [f64; 2],
    pub canonical_free_energy: f64,
    pub epsilon: f64,
    pub microcanonical: CaloricPoint,
    pub microcanonical_phase: Phase,
    /// `|Theta_n(md) - Theta_n(canonical)|`, with `|<Theta_1>|` compared
    /// when the canonical state breaks the `q -> q + pi` symmetry.
    pub discrepancy: [f64; 2],
    pub discrepancy_sigma: [f64; 2],
    pub temperature_sigma: f64,
    pub verdict: Verdict,
}

pub const VERDICT_SIGMAS: f64 = 5.0;
pub const VERDICT_MIN_ABS: f64 = 0.05;

/// Canonical prediction at `(alpha, beta)`, the matching energy, and a
/// microcanonical run at that energy. `config` supplies size, time step,
/// length and seed; its couplings, reference beta and energy are replaced.
pub fn ensemble_compare(alpha: Couplings, beta: f64, config: &MDConfig) -> Result<EnsembleReport> {
    let thermo = Thermo { beta, ..Thermo::default() };
    let canon = classify_phase(alpha, thermo, &SolverOptions::default())?;
    let theta = canon.global_min.y();
    let epsilon = canonical_energy_per_particle(beta, alpha, theta[0], theta[1])?;
    let cfg = MDConfig { alpha, beta_ref: beta, energy_per_particle: epsilon, ..config.clone() };
    let md = microcanonical_point(&cfg)?;
    let broken = theta[0].abs() > SolverOptions::default().zero_tol;
    let (md_t1, md_t1_err) = if broken { (md.theta_1_abs_avg, md.theta_1_abs_err) } else { (md.theta_1_avg, md.theta_1_err) };
    let discrepancy = [(md_t1 - theta[0].abs()).abs(), (md.theta_2_avg - theta[1]).abs()];
    let sig = |d: f64, se: f64| if d == 0.0 { 0.0 } else { d / se };
    let discrepancy_sigma = [sig(discrepancy[0], md_t1_err), sig(discrepancy[1], md.theta_2_err)];
    let disagree = (0..2).any(|k| discrepancy_sigma[k] > VERDICT_SIGMAS && discrepancy[k] > VERDICT_MIN_ABS);
    let significant = |v: f64, se: f64| v.abs() > VERDICT_MIN_ABS.max(VERDICT_SIGMAS * se);
    let microcanonical_phase = if significant(md_t1, md_t1_err) {
        Phase::Ferromagnetic
    } else if significant(md.theta_2_avg, md.theta_2_err) {
        Phase::Nematic
    } else {
        Phase::Paramagnetic
    };
    Ok(EnsembleReport {
        alpha,
        beta,
        canonical_phase: canon.phase,
        canonical_theta: theta,
        canonical_free_energy: canon.free_energy,
        epsilon,
        temperature_sigma: sig((md.kinetic_temperature - 1.0 / beta).abs(), md.kinetic_temperature_err),
        microcanonical: md,
        microcanonical_phase,
        discrepancy,
        discrepancy_sigma,
        verdict: if disagree { Verdict::Disagree } else { Verdict::Agree },
    })
}
