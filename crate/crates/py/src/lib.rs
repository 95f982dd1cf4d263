//! Python bindings: functions on translation systems of `Z/m_1 x ... x Z/m_r`, given as moduli
//! lists, plus the whole command line through `cli`.

use std::sync::Arc;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hofa_core::error::Error;
use hofa_core::gowers::{gowers_norm as norm, phase_gowers_exact, ComplexFunction, DEFAULT_GUARD_CELLS};
use hofa_core::inverse::{correlation_search, SearchOptions, Strategy};
use hofa_core::phase_poly::degree;
use hofa_core::systems::GammaSystem;
use hofa_core::target::{Torus, TorusFunction};
use hofa_core::towers::boundary_average;
use hofa_core::{FinAbGroup, TorusValue};

create_exception!(hofa, GuardError, PyRuntimeError, "A size guard refused the computation.");

fn py_err(e: Error) -> PyErr {
    if e.is_guard() {
        GuardError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn system(moduli: Vec<i64>) -> PyResult<Arc<GammaSystem>> {
    let g = FinAbGroup::new(moduli).map_err(py_err)?;
    Ok(Arc::new(GammaSystem::translation(&g)))
}

fn complex_fn(moduli: Vec<i64>, values: Vec<Complex64>) -> PyResult<ComplexFunction> {
    ComplexFunction::new(system(moduli)?, values).map_err(py_err)
}

fn torus_fn(moduli: Vec<i64>, values: Vec<String>) -> PyResult<TorusFunction> {
    let vals = values
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse::<TorusValue>().map_err(|e| PyValueError::new_err(format!("values[{i}]: {e}"))))
        .collect::<PyResult<Vec<_>>>()?;
    TorusFunction::new(system(moduli)?, Torus, vals).map_err(py_err)
}

/// `||f||_{U^d}` for values listed in the canonical (last coordinate fastest) order.
#[pyfunction]
#[pyo3(signature = (moduli, values, d, guard=DEFAULT_GUARD_CELLS))]
fn gowers_norm(py: Python<'_>, moduli: Vec<i64>, values: Vec<Complex64>, d: usize, guard: u128) -> PyResult<f64> {
    let f = complex_fn(moduli, values)?;
    py.allow_threads(|| norm(&f, d, guard)).map_err(py_err)
}

/// `(||e(P)||^{2^d}, "p/q" or None)` for `P` given as `"p/q"` strings.
#[pyfunction]
#[pyo3(signature = (moduli, values, d, guard=DEFAULT_GUARD_CELLS))]
fn phase_gowers(moduli: Vec<i64>, values: Vec<String>, d: usize, guard: u128) -> PyResult<(f64, Option<String>)> {
    let p = torus_fn(moduli, values)?;
    let pg = phase_gowers_exact(&p, d, guard).map_err(py_err)?;
    Ok((pg.value, pg.exact.map(|r| format!("{}/{}", r.numer(), r.denom()))))
}

#[pyfunction]
#[pyo3(signature = (moduli, values, d_max=8))]
fn poly_degree(moduli: Vec<i64>, values: Vec<String>, d_max: usize) -> PyResult<Option<usize>> {
    Ok(degree(&torus_fn(moduli, values)?, d_max))
}

/// The Hamming boundary average as an exact `"p/q"` string.
#[pyfunction]
#[pyo3(signature = (k, n, guard=DEFAULT_GUARD_CELLS))]
fn hamming_boundary(k: usize, n: usize, guard: u128) -> PyResult<String> {
    let b = boundary_average(k, n, guard).map_err(py_err)?;
    Ok(format!("{}/{}", b.value.numer(), b.value.denom()))
}

#[pyfunction]
#[pyo3(signature = (moduli, values, k, strategy="exhaustive", seed=0))]
fn correlate<'py>(
    py: Python<'py>,
    moduli: Vec<i64>,
    values: Vec<Complex64>,
    k: usize,
    strategy: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let f = complex_fn(moduli, values)?;
    let strategy: Strategy = strategy.parse().map_err(py_err)?;
    let opts = SearchOptions {
        strategy,
        seed,
        ..Default::default()
    };
    let rep = py.allow_threads(|| correlation_search(&f, k, &opts)).map_err(py_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("correlation", rep.correlation)?;
    d.set_item("norm", rep.norm)?;
    d.set_item("polynomial", rep.polynomial.values().iter().map(|v| v.to_string()).collect::<Vec<_>>())?;
    d.set_item("maximizers", rep.maximizers)?;
    d.set_item("strategy", rep.strategy.to_string())?;
    Ok(d)
}

/// Runs `hofa <args>` and returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn cli(py: Python<'_>, args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = py.allow_threads(|| hofa_cli::run_with(std::iter::once("hofa".to_string()).chain(args), &mut out, &mut err));
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

#[pymodule]
fn hofa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GuardError", m.py().get_type_bound::<GuardError>())?;
    m.add_function(wrap_pyfunction!(gowers_norm, m)?)?;
    m.add_function(wrap_pyfunction!(phase_gowers, m)?)?;
    m.add_function(wrap_pyfunction!(poly_degree, m)?)?;
    m.add_function(wrap_pyfunction!(hamming_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(correlate, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
