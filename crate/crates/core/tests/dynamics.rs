use std::f64::consts::{FRAC_PI_2, TAU};

use ghmf_core::equilibrium::Couplings;
use ghmf_core::langevin::{
    run_trajectory, stationarity_diagnostics, Diagnosis, Dynamics, InitialCondition, LangevinConfig, Scheme,
    TrajectoryRecord,
};
use ghmf_core::md::{run_md, sample_microcanonical_init, MDConfig};
use ghmf_core::observables::{wrap_phase, EnsembleState};
use ghmf_core::params::EffectiveModel;
use ghmf_core::stats::{Estimate, Histogram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn thermal_state(n: usize, seed: u64) -> EnsembleState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    let p = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    EnsembleState::new(q, p).unwrap()
}

fn phase_gap(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    d.min(TAU - d)
}

#[test]
fn hamiltonian_flow_is_time_reversible() {
    let m = EffectiveModel::from_couplings(0.5, 2.0, 1.0, 50).unwrap().without_dissipation();
    for scheme in [Scheme::Leapfrog, Scheme::Yoshida4] {
        let start = thermal_state(50, 4);
        let mut d = Dynamics::new(start.clone(), &m);
        for _ in 0..1000 {
            d.hamiltonian_step(0.01, scheme);
        }
        let mut back = d.state.clone();
        back.p.iter_mut().for_each(|p| *p = -*p);
        let mut d = Dynamics::new(back, &m);
        for _ in 0..1000 {
            d.hamiltonian_step(0.01, scheme);
        }
        for i in 0..50 {
            assert!(phase_gap(d.state.q[i], start.q[i]) <= 1e-10, "{scheme:?} q[{i}]");
            assert!((-d.state.p[i] - start.p[i]).abs() <= 1e-10, "{scheme:?} p[{i}]");
        }
    }
}

#[test]
fn energy_is_conserved() {
    let m = EffectiveModel::from_couplings(0.5, 2.0, 1.0, 200).unwrap().without_dissipation();
    let mut d = Dynamics::new(thermal_state(200, 5), &m);
    let e0 = d.energy();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        d.hamiltonian_step(0.005, Scheme::Yoshida4);
        worst = worst.max((d.energy() - e0).abs());
    }
    assert!(worst / e0.abs() < 1e-8, "relative drift {}", worst / e0.abs());
}

#[test]
fn free_flight_without_couplings() {
    let m = EffectiveModel::from_couplings(0.0, 0.0, 1.0, 10).unwrap().without_dissipation();
    let start = thermal_state(10, 6);
    let mut d = Dynamics::new(start.clone(), &m);
    for _ in 0..500 {
        d.hamiltonian_step(0.02, Scheme::Yoshida4);
    }
    for i in 0..10 {
        assert_eq!(d.state.p[i], start.p[i]);
        let want = wrap_phase(start.q[i] + m.k1 * start.p[i] / m.mass * 10.0);
        assert!(phase_gap(d.state.q[i], want) < 1e-10);
    }
}

/// One particle at `q = pi/2` feels only mode 1 with `sin q = 1`, so the
/// dissipative update is an Ornstein-Uhlenbeck step with rate `g_1` and
/// diffusion `d_1`.
#[test]
fn dissipative_step_is_exact_ornstein_uhlenbeck() {
    let m = EffectiveModel::from_couplings(0.8, 0.0, 2.0, 1).unwrap();
    assert_eq!((m.g_2, m.d_2), (0.0, 0.0));
    let (lam, diff, dt) = (m.g_1, m.d_1, 0.3);
    let state = |p: f64| EnsembleState::new(vec![FRAC_PI_2], vec![p]).unwrap();

    for (p0, xi) in [(1.5, 0.0), (-0.7, 1.0), (0.2, -2.5)] {
        let mut d = Dynamics::new(state(p0), &m);
        d.dissipative_step(dt, [xi, 0.0], false);
        let want = p0 * (lam * dt).exp() + (diff * ((2.0 * lam * dt).exp() - 1.0) / lam).sqrt() * xi;
        assert!((d.state.p[0] - want).abs() < 1e-14, "{} vs {want}", d.state.p[0]);
    }

    // stationary variance of the chain is D / |lambda| = m / beta
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut d = Dynamics::new(state(0.0), &m);
    let mut samples = Vec::new();
    for k in 0..200_000 {
        d.dissipative_step(dt, [StandardNormal.sample(&mut rng), 0.0], false);
        if k >= 1000 {
            samples.push(d.state.p[0] * d.state.p[0]);
        }
    }
    let est = Estimate::of(&samples).unwrap();
    assert!(est.within(m.mass / m.beta, 4.0), "{est:?}");
}

#[test]
fn microcanonical_ideal_gas() {
    let cfg = MDConfig::new(Couplings::new(0.0, 0.0), 300, 2000, 0.7, 3);
    let s = sample_microcanonical_init(&cfg).unwrap();
    assert!((s.kinetic_temperature(1.0) - 1.4).abs() < 1e-12);
    let rec = run_md(&cfg).unwrap();
    assert!(rec.kinetic_temperature.iter().all(|t| (t - 1.4).abs() < 1e-12));
}

fn synthetic_record(n: usize, seed: u64, temperature: f64, skew_shift: f64) -> TrajectoryRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = EnsembleState::new(vec![0.0], vec![0.0]).unwrap();
    let mut rec = TrajectoryRecord::empty(s, Histogram::new(-1.0, 1.0, 4));
    for k in 0..n {
        let z = |r: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(r) };
        rec.steps.push(k as u64);
        rec.times.push(k as f64);
        rec.kinetic_temperature.push(temperature + 0.01 * z(&mut rng));
        rec.momentum_skewness.push(skew_shift + 0.1 * z(&mut rng));
        rec.momentum_kurtosis.push(0.2 * z(&mut rng));
        rec.theta_1.push(0.01 * z(&mut rng));
        rec.theta_2.push(0.5 + 0.01 * z(&mut rng));
        rec.energy.push(0.0);
    }
    rec
}

#[test]
fn diagnostics_on_synthetic_series() {
    let ok = stationarity_diagnostics(&synthetic_record(2000, 1, 1.0, 0.0), 1.0, 0).unwrap();
    assert!(ok.pass, "{ok:?}");
    let hot = stationarity_diagnostics(&synthetic_record(2000, 2, 1.1, 0.0), 1.0, 0).unwrap();
    assert_eq!(hot.diagnosis, Diagnosis::TemperatureMismatch);
    let skewed = stationarity_diagnostics(&synthetic_record(2000, 3, 1.0, 0.3), 1.0, 0).unwrap();
    assert_eq!(skewed.diagnosis, Diagnosis::NonGaussian);
}

#[test]
fn frozen_momenta_are_flagged() {
    let m = EffectiveModel::from_couplings(0.0, 0.0, 1.0, 20).unwrap().without_dissipation();
    let mut cfg = LangevinConfig::new(m, 2000, 1, InitialCondition::Thermal { beta_0: 1.0 });
    cfg.record_every = 10;
    let rec = run_trajectory(&cfg).unwrap();
    let r = stationarity_diagnostics(&rec, 1.0, 0).unwrap();
    assert_eq!(r.diagnosis, Diagnosis::ZeroDiffusion);
    assert!(!r.pass);
}

#[test]
fn trajectories_repeat_bit_for_bit() {
    let m = EffectiveModel::from_couplings(0.5, 2.0, 1.0, 40).unwrap();
    let mut cfg = LangevinConfig::new(m, 3000, 9, InitialCondition::Cold);
    cfg.dt = 0.02;
    let a = run_trajectory(&cfg).unwrap();
    let b = run_trajectory(&cfg).unwrap();
    assert_eq!(a, b);
    cfg.seed = 10;
    assert_ne!(run_trajectory(&cfg).unwrap().checksum, a.checksum);
}
