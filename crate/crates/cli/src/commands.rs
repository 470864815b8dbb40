use ghmf_core::equilibrium::{
    classify_phase_with, free_energy, hessian_classify, solve_fixed_points, Couplings, FixedPoint, PhasePoint,
    SolverOptions, StabilityReport, Thermo, DEFAULT_SEEDS,
};
use ghmf_core::langevin::{run_trajectory, stationarity_diagnostics, StationarityReport, MIN_STATIONARY_SAMPLES};
use ghmf_core::md::{caloric_curve, ensemble_compare, run_md, summarize, CaloricPoint};
use ghmf_core::params::{map_cavity_to_effective_with_tol, validate_stationarity_condition, EffectiveModel};
use ghmf_core::phase_diagram::sweep_grid;
use ghmf_core::quadrature::default_quadrature;
use serde::Serialize;

use crate::config::*;
use crate::output::{fmt_f64, Run};
use crate::CliError;

fn f(x: f64) -> String {
    fmt_f64(x)
}

pub fn map_params(cfg: &MapParamsConfig, run: &mut Run) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a EffectiveModel,
        stationary: bool,
        mode_beta: [f64; 2],
    }
    let model = map_cavity_to_effective_with_tol(&cfg.cavity, cfg.stationarity_tol)?;
    let stationary = validate_stationarity_condition(&cfg.cavity, cfg.stationarity_tol)?;
    let out = Out { model: &model, stationary, mode_beta: [cfg.cavity.mode_beta(1), cfg.cavity.mode_beta(2)] };
    run.json("effective_model.json", "ghmf-effective-model/1", &out)
}

fn linspace(r: [f64; 2], n: usize, i: usize) -> f64 {
    if i + 1 == n {
        r[1]
    } else {
        r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
    }
}

pub fn free_energy_surface(cfg: &FreeEnergyConfig, run: &mut Run) -> Result<(), CliError> {
    let alpha = Couplings::new(cfg.alpha_1, cfg.alpha_2);
    let thermo = Thermo { beta: cfg.beta, omega_r: cfg.omega_r, hbar: cfg.hbar };
    alpha.validate()?;
    thermo.validate()?;
    let ok = |r: [f64; 2]| r.iter().all(|v| v.is_finite()) && r[0] <= r[1];
    if cfg.n_y < 2 || !ok(cfg.y_1_range) || !ok(cfg.y_2_range) {
        return Err(CliError::Config("need n_y >= 2 and finite, ordered y ranges".into()));
    }
    let mut rows = Vec::with_capacity(cfg.n_y * cfg.n_y);
    for i in 0..cfg.n_y {
        let y1 = linspace(cfg.y_1_range, cfg.n_y, i);
        for j in 0..cfg.n_y {
            let y2 = linspace(cfg.y_2_range, cfg.n_y, j);
            rows.push(vec![f(y1), f(y2), f(free_energy(y1, y2, alpha, thermo)?)]);
        }
    }
    run.csv("free_energy.csv", "ghmf-free-energy/1", &["y_1", "y_2", "free_energy"], &rows)
}

pub fn fixed_points(cfg: &FixedPointsConfig, run: &mut Run) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Entry {
        point: FixedPoint,
        free_energy: f64,
        stability: StabilityReport,
    }
    #[derive(Serialize)]
    struct Out {
        classification: PhasePoint,
        fixed_points: Vec<Entry>,
    }
    let alpha = Couplings::new(cfg.alpha_1, cfg.alpha_2);
    let thermo = Thermo { beta: cfg.beta, omega_r: cfg.omega_r, hbar: cfg.hbar };
    let opts = SolverOptions::default();
    let mut seeds = cfg.seeds.clone();
    seeds.extend_from_slice(&DEFAULT_SEEDS);
    let classification = classify_phase_with(default_quadrature(), alpha, thermo, &opts, &cfg.seeds)?;
    let mut entries = Vec::new();
    for p in solve_fixed_points(alpha, &seeds, &opts)? {
        entries.push(Entry {
            free_energy: free_energy(p.y_1, p.y_2, alpha, thermo)?,
            stability: hessian_classify(p.y(), alpha, &opts)?,
            point: p,
        });
    }
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                f(e.point.y_1),
                f(e.point.y_2),
                f(e.point.g_value),
                f(e.free_energy),
                format!("{:?}", e.point.stability).to_lowercase(),
                f(e.point.residual_norm),
                f(e.stability.eigenvalues[0]),
                f(e.stability.eigenvalues[1]),
            ]
        })
        .collect();
    run.csv(
        "fixed_points.csv",
        "ghmf-fixed-points/1",
        &["y_1", "y_2", "g_value", "free_energy", "stability", "residual_norm", "eigenvalue_1", "eigenvalue_2"],
        &rows,
    )?;
    run.json("fixed_points.json", "ghmf-fixed-points/1", &Out { classification, fixed_points: entries })
}

pub fn phase_diagram(cfg: &PhaseDiagramConfig, threads: usize, run: &mut Run) -> Result<(), CliError> {
    let d = sweep_grid(&cfg.grid, threads, &SolverOptions::default())?;
    let rows: Vec<Vec<String>> = d
        .points
        .iter()
        .map(|p| {
            vec![
                f(p.alpha_1),
                f(p.alpha_2),
                p.phase.as_str().to_string(),
                f(p.global_min.y_1),
                f(p.global_min.y_2),
                f(p.free_energy),
                p.coexistence.to_string(),
                p.all_minima.len().to_string(),
            ]
        })
        .collect();
    run.csv(
        "phase_diagram.csv",
        "ghmf-phase-diagram/1",
        &["alpha_1", "alpha_2", "phase", "theta_1", "theta_2", "free_energy", "coexistence", "n_minima"],
        &rows,
    )?;
    run.json("overlays.json", "ghmf-overlays/1", &d.overlays)?;
    #[derive(Serialize)]
    struct Boundaries<'a> {
        crossings: &'a [ghmf_core::phase_diagram::BoundaryCrossing],
        segments: &'a [ghmf_core::phase_diagram::BoundarySegment],
        triple_cells: &'a [[f64; 2]],
        dropped_seeds: usize,
    }
    run.json(
        "boundaries.json",
        "ghmf-boundaries/1",
        &Boundaries { crossings: &d.crossings, segments: &d.boundaries, triple_cells: &d.triple_cells, dropped_seeds: d.dropped_seeds },
    )?;
    run.json("phase_diagram.json", "ghmf-phase-diagram-full/1", &d)
}

pub fn langevin(cfg: &LangevinRunConfig, run: &mut Run) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Header<'a> {
        config: &'a ghmf_core::langevin::LangevinConfig,
        version: &'a str,
        checksum: &'a str,
        stability_number: f64,
        burn_in_samples: usize,
        stationarity: Option<StationarityReport>,
        stationarity_note: Option<String>,
    }
    let core = cfg.core()?;
    let rec = run_trajectory(&core)?;
    let burn = (cfg.burn_in_fraction * rec.len() as f64).floor() as usize;
    let (stationarity, note) = if rec.len().saturating_sub(burn) >= MIN_STATIONARY_SAMPLES {
        (Some(stationarity_diagnostics(&rec, core.model.beta, burn)?), None)
    } else {
        (None, Some(format!("fewer than {MIN_STATIONARY_SAMPLES} samples after burn-in")))
    };
    let rows: Vec<Vec<String>> = (0..rec.len())
        .map(|k| {
            vec![
                rec.steps[k].to_string(),
                f(rec.times[k]),
                f(rec.theta_1[k]),
                f(rec.theta_2[k]),
                f(rec.kinetic_temperature[k]),
                f(rec.energy[k]),
                f(rec.momentum_skewness[k]),
                f(rec.momentum_kurtosis[k]),
            ]
        })
        .collect();
    run.csv(
        "trajectory.csv",
        "ghmf-trajectory/1",
        &["step", "time", "theta_1", "theta_2", "kinetic_temperature", "energy", "momentum_skewness", "momentum_kurtosis"],
        &rows,
    )?;
    let h = &rec.momentum_histogram;
    let rows: Vec<Vec<String>> = h.centers().iter().zip(&h.counts).map(|(c, n)| vec![f(*c), n.to_string()]).collect();
    run.csv("momentum_histogram.csv", "ghmf-momentum-histogram/1", &["bin_center", "count"], &rows)?;
    run.json(
        "trajectory.json",
        "ghmf-trajectory-header/1",
        &Header {
            config: &core,
            version: env!("CARGO_PKG_VERSION"),
            checksum: &rec.checksum,
            stability_number: core.stability_number(),
            burn_in_samples: burn,
            stationarity,
            stationarity_note: note,
        },
    )
}

const CALORIC_HEADER: [&str; 13] = [
    "epsilon",
    "kinetic_temperature",
    "kinetic_temperature_err",
    "theta_1",
    "theta_1_err",
    "theta_2",
    "theta_2_err",
    "theta_1_abs",
    "theta_1_abs_err",
    "samples",
    "replicas",
    "max_relative_energy_error",
    "error",
];

fn caloric_row(p: &CaloricPoint) -> Vec<String> {
    vec![
        f(p.epsilon),
        f(p.kinetic_temperature),
        f(p.kinetic_temperature_err),
        f(p.theta_1_avg),
        f(p.theta_1_err),
        f(p.theta_2_avg),
        f(p.theta_2_err),
        f(p.theta_1_abs_avg),
        f(p.theta_1_abs_err),
        p.samples.to_string(),
        p.replicas.to_string(),
        f(p.max_relative_energy_error),
        p.error.clone().unwrap_or_default(),
    ]
}

pub fn md(cfg: &MdRunConfig, run: &mut Run) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Summary<'a> {
        point: &'a CaloricPoint,
        energy_floor: f64,
        checksum: &'a str,
    }
    let core = cfg.core();
    let rec = run_md(&core)?;
    let point = summarize(cfg.energy_per_particle, &rec, core.burn_in)?;
    let rows: Vec<Vec<String>> = (0..rec.times.len())
        .map(|k| vec![f(rec.times[k]), f(rec.theta_1[k]), f(rec.theta_2[k]), f(rec.kinetic_temperature[k]), f(rec.energy[k])])
        .collect();
    run.csv(
        "md_trajectory.csv",
        "ghmf-md-trajectory/1",
        &["time", "theta_1", "theta_2", "kinetic_temperature", "energy"],
        &rows,
    )?;
    run.json(
        "md_summary.json",
        "ghmf-md-summary/1",
        &Summary { point: &point, energy_floor: core.energy_floor(), checksum: &rec.checksum },
    )
}

pub fn caloric(cfg: &CaloricConfig, threads: usize, run: &mut Run) -> Result<(), CliError> {
    if cfg.epsilons.is_empty() {
        return Err(CliError::Config("epsilons must not be empty".into()));
    }
    let points = caloric_curve(&cfg.epsilons, &cfg.core(), threads)?;
    let rows: Vec<Vec<String>> = points.iter().map(caloric_row).collect();
    run.csv("caloric.csv", "ghmf-caloric/1", &CALORIC_HEADER, &rows)
}

pub fn compare(cfg: &CompareConfig, run: &mut Run) -> Result<(), CliError> {
    let report = ensemble_compare(Couplings::new(cfg.alpha_1, cfg.alpha_2), cfg.beta, &cfg.core())?;
    run.json("compare.json", "ghmf-compare/1", &report)
}
