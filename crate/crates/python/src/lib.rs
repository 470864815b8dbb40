//! Python bindings. Structured results come back as plain dicts and lists.

use ghmf_core::equilibrium::{self, Couplings, SolverOptions, Thermo};
use ghmf_core::langevin::{self, InitialCondition, LangevinConfig};
use ghmf_core::md::{self, MDConfig};
use ghmf_core::params::{self, CavityParams, EffectiveModel};
use ghmf_core::phase_diagram::{sweep_grid, GridSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyList, PyString};
use serde::Serialize;
use serde_json::Value;

fn err(e: ghmf_core::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => PyFloat::new(py, n.as_f64().unwrap_or(f64::NAN)).into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

/// Effective model for couplings `alpha` at inverse temperature `beta`.
#[pyfunction]
#[pyo3(signature = (alpha_1, alpha_2, beta=1.0, n_atoms=100))]
fn effective_model(py: Python<'_>, alpha_1: f64, alpha_2: f64, beta: f64, n_atoms: usize) -> PyResult<Bound<'_, PyAny>> {
    dict(py, &EffectiveModel::from_couplings(alpha_1, alpha_2, beta, n_atoms).map_err(err)?)
}

/// Effective model from dimensionless cavity parameters.
#[pyfunction]
#[pyo3(signature = (delta_1, delta_2, kappa_1, kappa_2, s_1, s_2, n_atoms, k=1.0, phi=std::f64::consts::FRAC_PI_3))]
#[allow(clippy::too_many_arguments)]
fn map_params(
    py: Python<'_>,
    delta_1: f64,
    delta_2: f64,
    kappa_1: f64,
    kappa_2: f64,
    s_1: f64,
    s_2: f64,
    n_atoms: usize,
    k: f64,
    phi: f64,
) -> PyResult<Bound<'_, PyAny>> {
    let c = CavityParams { k, phi, ..CavityParams::symmetric(delta_1, kappa_1, s_1, s_2, n_atoms) };
    let c = CavityParams { delta_2, kappa_2, ..c };
    dict(py, &params::map_cavity_to_effective(&c).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (y_1, y_2, alpha_1, alpha_2, beta=1.0, omega_r=0.5, hbar=1.0))]
fn free_energy(y_1: f64, y_2: f64, alpha_1: f64, alpha_2: f64, beta: f64, omega_r: f64, hbar: f64) -> PyResult<f64> {
    equilibrium::free_energy(y_1, y_2, Couplings::new(alpha_1, alpha_2), Thermo { beta, omega_r, hbar }).map_err(err)
}

/// Global minimum and phase label at one coupling pair.
#[pyfunction]
#[pyo3(signature = (alpha_1, alpha_2, beta=1.0))]
fn classify_phase(py: Python<'_>, alpha_1: f64, alpha_2: f64, beta: f64) -> PyResult<Bound<'_, PyAny>> {
    let thermo = Thermo { beta, ..Thermo::default() };
    let p = equilibrium::classify_phase(Couplings::new(alpha_1, alpha_2), thermo, &SolverOptions::default()).map_err(err)?;
    dict(py, &p)
}

/// Positive nematic order parameter at `alpha_2` (zero for `alpha_2 <= 1`).
#[pyfunction]
fn nematic_bessel_solve(alpha_2: f64) -> f64 {
    equilibrium::nematic_bessel_solve(alpha_2)
}

#[pyfunction]
#[pyo3(signature = (alpha_1_range, alpha_2_range, n_1, n_2, workers=1))]
fn phase_diagram(
    py: Python<'_>,
    alpha_1_range: [f64; 2],
    alpha_2_range: [f64; 2],
    n_1: usize,
    n_2: usize,
    workers: usize,
) -> PyResult<Bound<'_, PyAny>> {
    let spec = GridSpec { alpha_1_range, alpha_2_range, n_1, n_2, ..GridSpec::default() };
    let d = py.detach(|| sweep_grid(&spec, workers, &SolverOptions::default())).map_err(err)?;
    dict(py, &d)
}

/// Langevin run from a thermal start at `beta`; returns the record and the
/// stationarity report over its second half.
#[pyfunction]
#[pyo3(signature = (alpha_1, alpha_2, n_atoms, n_steps, seed, beta=1.0, dt=langevin::DEFAULT_DT, record_every=100))]
#[allow(clippy::too_many_arguments)]
fn run_langevin(
    py: Python<'_>,
    alpha_1: f64,
    alpha_2: f64,
    n_atoms: usize,
    n_steps: u64,
    seed: u64,
    beta: f64,
    dt: f64,
    record_every: u64,
) -> PyResult<Bound<'_, PyAny>> {
    let model = EffectiveModel::from_couplings(alpha_1, alpha_2, beta, n_atoms).map_err(err)?;
    let cfg = LangevinConfig {
        dt,
        record_every,
        ..LangevinConfig::new(model, n_steps, seed, InitialCondition::Thermal { beta_0: beta })
    };
    let rec = py.detach(|| langevin::run_trajectory(&cfg)).map_err(err)?;
    let report = if rec.len() / 2 >= langevin::MIN_STATIONARY_SAMPLES {
        Some(langevin::stationarity_diagnostics(&rec, beta, rec.len() / 2).map_err(err)?)
    } else {
        None
    };
    let out = PyDict::new(py);
    out.set_item("record", dict(py, &rec)?)?;
    out.set_item("stationarity", dict(py, &report)?)?;
    Ok(out.into_any())
}

/// Canonical against microcanonical order parameters at `(alpha, beta)`.
#[pyfunction]
#[pyo3(signature = (alpha_1, alpha_2, beta, n_atoms, n_steps, seed, replicas=1))]
#[allow(clippy::too_many_arguments)]
fn compare_ensembles(
    py: Python<'_>,
    alpha_1: f64,
    alpha_2: f64,
    beta: f64,
    n_atoms: usize,
    n_steps: u64,
    seed: u64,
    replicas: usize,
) -> PyResult<Bound<'_, PyAny>> {
    let alpha = Couplings::new(alpha_1, alpha_2);
    let cfg = MDConfig { beta_ref: beta, replicas, ..MDConfig::new(alpha, n_atoms, n_steps, 0.0, seed) };
    let report = py.detach(|| md::ensemble_compare(alpha, beta, &cfg)).map_err(err)?;
    dict(py, &report)
}

#[pymodule]
fn ghmf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(effective_model, m)?)?;
    m.add_function(wrap_pyfunction!(map_params, m)?)?;
    m.add_function(wrap_pyfunction!(free_energy, m)?)?;
    m.add_function(wrap_pyfunction!(classify_phase, m)?)?;
    m.add_function(wrap_pyfunction!(nematic_bessel_solve, m)?)?;
    m.add_function(wrap_pyfunction!(phase_diagram, m)?)?;
    m.add_function(wrap_pyfunction!(run_langevin, m)?)?;
    m.add_function(wrap_pyfunction!(compare_ensembles, m)?)?;
    Ok(())
}
