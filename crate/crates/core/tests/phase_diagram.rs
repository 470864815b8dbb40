use ghmf_core::equilibrium::{nematic_bessel_solve, Phase, SolverOptions};
use ghmf_core::phase_diagram::{analytic_overlays, sweep_grid, Axis, GridSpec, TransitionOrder};

fn column(alpha_1: f64, lo: f64, hi: f64, n: usize) -> GridSpec {
    GridSpec { alpha_1_range: [alpha_1, alpha_1 + 0.01], alpha_2_range: [lo, hi], n_1: 2, n_2: n, ..GridSpec::default() }
}

#[test]
fn theta_2_is_continuous_through_the_nematic_threshold() {
    let d = sweep_grid(&column(0.2, 0.5, 1.5, 41), 1, &SolverOptions::default()).unwrap();
    for j in 0..41 {
        let p = d.point(0, j);
        let want = nematic_bessel_solve(p.alpha_2);
        // g is quartic at the critical point itself, so the root is soft there
        let tol = if (p.alpha_2 - 1.0).abs() < 1e-9 { 1e-3 } else { 1e-8 };
        assert!((p.global_min.y_2 - want).abs() < tol, "alpha_2 = {}: {} vs {want}", p.alpha_2, p.global_min.y_2);
        assert_eq!(p.phase, if p.alpha_2 > 1.0 { Phase::Nematic } else { Phase::Paramagnetic });
    }
    let steps: Vec<f64> = (1..41).map(|j| (d.point(0, j).global_min.y_2 - d.point(0, j - 1).global_min.y_2).abs()).collect();
    // the largest step is that of the square-root onset over one cell, not a jump
    let h: f64 = 1.0 / 40.0;
    assert!(steps.iter().cloned().fold(0.0, f64::max) < 2.0 * (3.0 * h).sqrt());
}

#[test]
fn paramagnetic_to_nematic_is_second_order() {
    let d = sweep_grid(&column(0.2, 0.5, 1.5, 21), 1, &SolverOptions::default()).unwrap();
    let along: Vec<_> = d.crossings.iter().filter(|c| c.axis == Axis::Alpha2).collect();
    assert!(!along.is_empty());
    for c in along {
        assert_eq!(c.phases, [Phase::Paramagnetic, Phase::Nematic]);
        assert_eq!(c.order, TransitionOrder::SecondOrder, "{c:?}");
        assert!(!c.hysteresis);
        assert!((c.location[1] - 1.0).abs() <= 0.05);
    }
}

#[test]
fn sweep_is_identical_for_any_worker_count() {
    let spec = GridSpec { alpha_1_range: [0.5, 1.2], alpha_2_range: [0.5, 1.5], n_1: 8, n_2: 8, ..GridSpec::default() };
    let opts = SolverOptions::default();
    let reference = serde_json::to_string(&sweep_grid(&spec, 1, &opts).unwrap()).unwrap();
    for workers in [4, 16] {
        assert_eq!(serde_json::to_string(&sweep_grid(&spec, workers, &opts).unwrap()).unwrap(), reference);
    }
}

#[test]
fn overlay_limits() {
    let o = analytic_overlays(&[0.5, 1.0, 50.0]).unwrap();
    assert_eq!(o.alpha_1_c[0], 1.0);
    assert_eq!(o.alpha_1_c[1], 1.0);
    assert!((o.alpha_1_c[2] - 0.5).abs() < 0.02);
    assert!(o.alpha_1_c_negative[2] > 1.0);
}
