//! Python bindings for the effective-Hamiltonian laboratory. The module
//! mirrors a small slice of the command-line surface: effective values at a
//! single state/momentum pair, interface stay rates, explicit trajectory
//! costs, the regularization of a non-tangential control, and the gap
//! between the two strategy classes at the value-function level.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hjbhomog_core::cell_solver::{extract_ergodic, PeriodicGrid, SolverParams};
use hjbhomog_core::control_model::{preset, MixedControl, PresetParams, Variant};
use hjbhomog_core::ergodic_oracle::long_time_average;
use hjbhomog_core::homogenized_solver::variant_gap;
use hjbhomog_core::trajectory::{discounted_cost, integrate, named_signal};
use hjbhomog_core::{ControlProblem, Error};

fn err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn build(name: &str) -> PyResult<ControlProblem> {
    preset(name, &PresetParams::default()).map_err(err)
}

fn parse_variant(tag: &str) -> PyResult<Variant> {
    match tag {
        "minus" => Ok(Variant::Minus),
        "plus" => Ok(Variant::Plus),
        _ => Err(PyValueError::new_err(format!(
            "unknown variant '{tag}' (expected 'minus' or 'plus')"
        ))),
    }
}

/// Effective Hamiltonian at one `(x, p)` pair.
///
/// `method` picks the estimator: `"discount"` extrapolates the vanishing
/// discount family, `"horizon"` divides the finite-horizon value by the
/// horizon `horizon_t`.
#[pyfunction]
#[pyo3(signature = (preset, variant, p, x = 0.0, cell_n = 100, method = "discount", horizon_t = 30.0))]
fn effective_hbar(
    preset: &str,
    variant: &str,
    p: f64,
    x: f64,
    cell_n: usize,
    method: &str,
    horizon_t: f64,
) -> PyResult<f64> {
    let problem = build(preset)?;
    let variant = parse_variant(variant)?;
    let grid = PeriodicGrid::cell(&problem, cell_n).map_err(err)?;
    match method {
        "discount" => Ok(
            extract_ergodic(&problem, &grid, x, p, variant, &SolverParams::default())
                .map_err(err)?
                .hbar,
        ),
        "horizon" => Ok(long_time_average(&problem, &grid, x, p, horizon_t, variant)
            .map_err(err)?
            .hbar),
        _ => Err(PyValueError::new_err(format!(
            "unknown method '{method}' (expected 'discount' or 'horizon')"
        ))),
    }
}

/// Cheapest running cost of standing still at an interface point, per
/// strategy class. The two classes differ exactly when opposed pushes
/// cancel more cheaply than any regular blend.
#[pyfunction]
#[pyo3(signature = (preset, variant, y = 0.0, x = 0.0))]
fn stay_rate(preset: &str, variant: &str, y: f64, x: f64) -> PyResult<f64> {
    let problem = build(preset)?;
    let variant = parse_variant(variant)?;
    problem.stay_cost(x, y, variant).map_err(err)
}

/// Integrate a named control signal and return its discounted cost along
/// with the interface bookkeeping.
#[pyfunction]
#[pyo3(signature = (preset, signal, eps = 0.1, t = 20.0, dt = 1e-3, x0 = 0.0))]
fn trajectory_cost<'py>(
    py: Python<'py>,
    preset: &str,
    signal: &str,
    eps: f64,
    t: f64,
    dt: f64,
    x0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let problem = build(preset)?;
    let (signal, variant) = named_signal(&problem, signal, t).map_err(err)?;
    let traj = integrate(&problem, eps, x0, &signal, t, dt).map_err(err)?;
    let est = discounted_cost(&problem, &traj, 1.0, eps).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("cost", est.value)?;
    out.set_item("cost_upper", est.upper)?;
    out.set_item("final_state", traj.final_state())?;
    out.set_item("variant", variant.tag())?;
    out.set_item("interface_segments", traj.interface_segments.len())?;
    let regular: Option<bool> = if traj.interface_segments.is_empty() {
        None
    } else {
        Some(traj.interface_segments.iter().all(|s| s.regular))
    };
    out.set_item("regular", regular)?;
    Ok(out)
}

/// Replace a non-tangential blended control at interface point `y` by a
/// tangential one, pushing back toward the interface at the controllability
/// rate. Returns the control before/after with normal velocities, costs,
/// and the guaranteed perturbation bound.
#[pyfunction]
#[pyo3(signature = (preset, alpha1, alpha2, mu, y = 0.0, x = 0.0))]
fn regularize<'py>(
    py: Python<'py>,
    preset: &str,
    alpha1: f64,
    alpha2: f64,
    mu: f64,
    y: f64,
    x: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let problem = build(preset)?;
    let a = MixedControl::new(alpha1, alpha2, mu).map_err(err)?;
    let n1 = problem.partition.interface_normal(y).map_err(err)?;
    let (b_a, l_a) = problem.mixed_dynamics_cost(x, y, a);
    let q = b_a * n1;
    let s = -q.signum() * problem.bounds.delta * n1;
    let push = MixedControl::new(s, s, 0.5).map_err(err)?;
    let fixed = problem.regularize_control(x, y, a, push).map_err(err)?;
    let (b_f, l_f) = problem.mixed_dynamics_cost(x, y, fixed);
    let out = PyDict::new(py);
    out.set_item("alpha1", fixed.alpha1)?;
    out.set_item("alpha2", fixed.alpha2)?;
    out.set_item("mu", fixed.mu)?;
    out.set_item("normal_velocity_before", q)?;
    out.set_item("normal_velocity_after", b_f * n1)?;
    out.set_item("cost_before", l_a)?;
    out.set_item("cost_after", l_f)?;
    out.set_item("cost_bound", problem.lemma_constant() * q.abs())?;
    Ok(out)
}

/// Pointwise gap between the two strategy classes' rescaled value functions
/// at scale `eps`: min and max over the macro grid of `U+ - U-`.
#[pyfunction]
#[pyo3(signature = (preset, eps = 0.25, n = 100))]
fn value_gap<'py>(
    py: Python<'py>,
    preset: &str,
    eps: f64,
    n: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let problem = build(preset)?;
    let report = variant_gap(&problem, eps, n, 400_000).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("min_gap", report.min_gap)?;
    out.set_item("max_gap", report.max_gap)?;
    out.set_item("min_at", report.min_at)?;
    out.set_item("max_at", report.max_at)?;
    Ok(out)
}

#[pymodule]
fn hjbhomog(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(effective_hbar, m)?)?;
    m.add_function(wrap_pyfunction!(stay_rate, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory_cost, m)?)?;
    m.add_function(wrap_pyfunction!(regularize, m)?)?;
    m.add_function(wrap_pyfunction!(value_gap, m)?)?;
    Ok(())
}
