//! Checks against independent evaluations written out in the test itself:
//! Bessel power series, brute-force quadrature, pair sums and finite
//! differences.

use std::f64::consts::{PI, TAU};

use ghmf_core::equilibrium::{
    classify_phase, free_energy, hessian_classify, inner_free_energy, solve_fixed_points, Couplings, Phase,
    SolverOptions, Stability, Thermo, DEFAULT_SEEDS,
};
use ghmf_core::langevin::{langevin_drift, Dynamics};
use ghmf_core::observables::{mean_field_energy, EnsembleState};
use ghmf_core::params::EffectiveModel;
use ghmf_core::quadrature::partition_integral;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `I_0(x)` from its power series `sum (x/2)^{2k} / (k!)^2`.
fn i0_series(x: f64) -> f64 {
    let h = 0.25 * x * x;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..200 {
        term *= h / (k * k) as f64;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// `ln int exp[2(a1 cos q + a2 cos 2q)] dq` by a plain midpoint sum.
fn log_i_brute(a1: f64, a2: f64, nodes: usize) -> f64 {
    let top = (a1.abs() + a2.abs()) * 2.0;
    let s: f64 = (0..nodes)
        .map(|k| {
            let q = TAU * (k as f64 + 0.5) / nodes as f64;
            (2.0 * (a1 * q.cos() + a2 * (2.0 * q).cos()) - top).exp()
        })
        .sum();
    (s * TAU / nodes as f64).ln() + top
}

fn g_brute(y: [f64; 2], a: Couplings) -> f64 {
    a.alpha_1 * y[0] * y[0] + a.alpha_2 * y[1] * y[1] - log_i_brute(a.alpha_1 * y[0], a.alpha_2 * y[1], 512)
}

#[test]
fn quadrature_matches_bessel_series() {
    for i in 0..=30 {
        let a1 = 3.0 * i as f64 / 30.0;
        for j in 0..=40 {
            let y1 = -1.0 + 2.0 * j as f64 / 40.0;
            let got = partition_integral(y1, 0.0, a1, 0.7, 256).unwrap();
            let want = TAU * i0_series(2.0 * a1 * y1);
            assert!(((got - want) / want).abs() <= 1e-10, "a1={a1} y1={y1}: {got} vs {want}");
        }
    }
}

#[test]
fn global_minimum_agrees_with_dense_scan() {
    let opts = SolverOptions::default();
    let n = 101;
    for &(a1, a2) in &[(0.3, 0.3), (0.5, 2.0), (1.5, 0.3), (0.3, 1.5), (1.3, 1.3), (2.2, 2.2)] {
        let a = Couplings::new(a1, a2);
        let p = classify_phase(a, Thermo::default(), &opts).unwrap();
        let mut best = (f64::INFINITY, [0.0; 2]);
        for i in 0..n {
            for j in 0..n {
                let y = [-1.0 + 2.0 * i as f64 / (n - 1) as f64, -1.0 + 2.0 * j as f64 / (n - 1) as f64];
                let g = g_brute(y, a);
                if g < best.0 {
                    best = (g, y);
                }
            }
        }
        // the solver's minimum may lie between grid nodes, never above them
        assert!(p.global_min.g_value <= best.0 + 1e-12, "{a1},{a2}: {} > {}", p.global_min.g_value, best.0);
        assert!((p.global_min.g_value - g_brute(p.global_min.y(), a)).abs() < 1e-10);
        let scan_phase = Phase::from_order(best.1[0], best.1[1], 1e-4);
        assert_eq!(scan_phase, p.phase, "{a1},{a2}: scan minimum at {:?}", best.1);
        assert!((best.1[0].abs() - p.global_min.y_1.abs()).abs() < 0.03);
        // with y1 = 0, g is even in y2 as well and the solver reports y2 >= 0
        let y2 = if p.phase == Phase::Nematic { best.1[1].abs() } else { best.1[1] };
        assert!((y2 - p.global_min.y_2).abs() < 0.03, "{a1},{a2}: scan {:?} solver {:?}", best, p.global_min);
    }
}

#[test]
fn fixed_points_are_stationary_and_hessian_matches_differences() {
    let opts = SolverOptions::default();
    let thermo = Thermo { beta: 1.3, ..Thermo::default() };
    let h = 1e-5;
    for &(a1, a2) in &[(0.5, 2.0), (1.2, 0.5), (0.9, 1.4), (2.0, 2.0), (0.4, 0.4)] {
        let a = Couplings::new(a1, a2);
        let points = solve_fixed_points(a, &DEFAULT_SEEDS, &opts).unwrap();
        assert!(!points.is_empty());
        for p in points {
            let f = |y1: f64, y2: f64| free_energy(y1, y2, a, thermo).unwrap();
            let g1 = (f(p.y_1 + h, p.y_2) - f(p.y_1 - h, p.y_2)) / (2.0 * h);
            let g2 = (f(p.y_1, p.y_2 + h) - f(p.y_1, p.y_2 - h)) / (2.0 * h);
            assert!(g1.abs() <= 1e-6 && g2.abs() <= 1e-6, "gradient ({g1}, {g2}) at {:?}", p.y());

            let report = hessian_classify(p.y(), a, &opts).unwrap();
            let k = 1e-4;
            let g = |y1: f64, y2: f64| inner_free_energy([y1, y2], a).unwrap();
            let (y1, y2) = (p.y_1, p.y_2);
            let h11 = (g(y1 + k, y2) - 2.0 * g(y1, y2) + g(y1 - k, y2)) / (k * k);
            let h22 = (g(y1, y2 + k) - 2.0 * g(y1, y2) + g(y1, y2 - k)) / (k * k);
            let h12 = (g(y1 + k, y2 + k) - g(y1 + k, y2 - k) - g(y1 - k, y2 + k) + g(y1 - k, y2 - k)) / (4.0 * k * k);
            for (got, want) in [(report.hessian[0][0], h11), (report.hessian[1][1], h22), (report.hessian[0][1], h12)] {
                assert!((got - want).abs() < 1e-5 * (1.0 + want.abs()), "{got} vs {want}");
            }
            // a minimum has a positive definite finite-difference Hessian
            let det = h11 * h22 - h12 * h12;
            let fd_min = h11 > 0.0 && det > 0.0;
            if det.abs() > 1e-4 {
                assert_eq!(fd_min, p.stability == Stability::Minimum, "at {:?}", p.y());
            }
        }
    }
}

fn random_state(n: usize, seed: u64) -> EnsembleState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    let p = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    EnsembleState::new(q, p).unwrap()
}

fn pair_energy(s: &EnsembleState, m: &EffectiveModel) -> f64 {
    let n = s.len();
    let mut v = 0.0;
    for i in 0..n {
        for j in 0..n {
            v += m.gamma_1 * s.q[i].cos() * s.q[j].cos() + m.gamma_2 * (2.0 * s.q[i]).cos() * (2.0 * s.q[j]).cos();
        }
    }
    s.p.iter().map(|p| p * p / (2.0 * m.mass)).sum::<f64>() - v / n as f64
}

#[test]
fn mean_field_sums_match_pair_sums() {
    for n in [1usize, 2, 5, 12] {
        let m = EffectiveModel::from_couplings(0.7, 1.3, 1.5, n).unwrap();
        let s = random_state(n, n as u64);
        let e = pair_energy(&s, &m);
        let scale = e.abs().max(1.0);
        assert!((mean_field_energy(&s, &m) - e).abs() <= 1e-12 * scale);
        assert!((Dynamics::new(s.clone(), &m).energy() - e).abs() <= 1e-12 * scale);

        let (force, friction) = langevin_drift(&s, &m);
        for i in 0..n {
            let (mut f, mut fr) = (0.0, 0.0);
            for j in 0..n {
                f -= 2.0 / n as f64
                    * (m.gamma_1 * m.k1 * s.q[i].sin() * s.q[j].cos()
                        + m.gamma_2 * m.k2 * (2.0 * s.q[i]).sin() * (2.0 * s.q[j]).cos());
                fr += (m.g_1 * s.q[i].sin() * s.q[j].sin() + m.g_2 * (2.0 * s.q[i]).sin() * (2.0 * s.q[j]).sin()) * s.p[j];
            }
            assert!((force[i] - f).abs() <= 1e-12 * f.abs().max(1.0), "force {i}: {} vs {f}", force[i]);
            assert!((friction[i] - fr).abs() <= 1e-12 * fr.abs().max(1.0));

            // the force is minus the gradient in x, with q = k1 x
            let hx = 1e-6;
            let shifted = |d: f64| {
                let mut t = s.clone();
                t.q[i] += m.k1 * d;
                pair_energy(&t, &m)
            };
            let fd = -(shifted(hx) - shifted(-hx)) / (2.0 * hx);
            assert!((force[i] - fd).abs() < 1e-7, "{} vs {fd}", force[i]);
        }
    }
}

#[test]
fn symmetric_fixed_points_mirror() {
    // g is even in y1, so (y1, y2) and (-y1, y2) carry the same g
    let a = Couplings::new(1.2, 0.5);
    let g = |y: [f64; 2]| inner_free_energy(y, a).unwrap();
    for y in [[0.3, 0.1], [0.72, 0.42], [0.9, -0.2]] {
        assert!((g(y) - g([-y[0], y[1]])).abs() < 1e-14);
    }
    assert!((g([0.0, 0.0]) + (2.0 * PI).ln()).abs() < 1e-14);
}
