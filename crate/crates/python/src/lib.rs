//! Python bindings for heatcalc.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use heatcalc::assemble::{heat_invariant_with, required_bound, OperatorSpec, StageOrder};
use heatcalc::expr::render::{to_latex, to_text};
use heatcalc::expr::serial::to_json;
use heatcalc::expr::TensorPolynomial;
use heatcalc::hodge::patodi_closed_form;
use heatcalc::jetlab::{evaluate_curvature, MetricJet};
use heatcalc::rational::fmt_rat;
use heatcalc::rho_chi::{MultiIndex, RhoTable};

fn err(e: heatcalc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn render(p: &TensorPolynomial, format: &str) -> PyResult<String> {
    match format {
        "text" => Ok(to_text(p)),
        "latex" => Ok(to_latex(p)),
        "json" => Ok(to_json(p)),
        other => Err(PyValueError::new_err(format!("unknown format {other:?}"))),
    }
}

fn spec(operator: &str, n: Option<usize>, nu: Option<usize>) -> PyResult<OperatorSpec> {
    match operator {
        "generic" => Ok(OperatorSpec::generic()),
        "scalar" => Ok(OperatorSpec::scalar()),
        "hodge" => match (n, nu) {
            (Some(n), Some(nu)) => OperatorSpec::hodge(n, nu).map_err(err),
            _ => Err(PyValueError::new_err("hodge operator needs n and nu")),
        },
        other => Err(PyValueError::new_err(format!("unknown operator {other:?}"))),
    }
}

/// Heat invariant a_k of the chosen operator.
#[pyfunction]
#[pyo3(signature = (k, operator = "generic", n = None, nu = None, format = "text"))]
fn heat_invariant(k: usize, operator: &str, n: Option<usize>, nu: Option<usize>, format: &str) -> PyResult<String> {
    if k > heatcalc::cli::MAX_K {
        return Err(PyValueError::new_err(format!("k = {k} is above the supported maximum {}", heatcalc::cli::MAX_K)));
    }
    let spec = spec(operator, n, nu)?;
    let table = RhoTable::new(required_bound(k), spec.flat_bundle());
    let a = heat_invariant_with(&table, k, &spec, StageOrder::TraceFirst).map_err(err)?;
    render(a.poly(), format)
}

/// Coefficient ρ_{α,β} of the symbol product; multi-indices are letter strings such as "jk".
#[pyfunction]
#[pyo3(signature = (alpha, beta, format = "text"))]
fn rho(alpha: &str, beta: &str, format: &str) -> PyResult<String> {
    let (a, b) = (MultiIndex::parse(alpha).map_err(err)?, MultiIndex::parse(beta).map_err(err)?);
    let table = RhoTable::new((a.len() + b.len()).max(2), false);
    render(&table.compute_rho(&a, &b).map_err(err)?, format)
}

/// The three ξ-degree parts of χ_α.
#[pyfunction]
#[pyo3(signature = (alpha, format = "text"))]
fn chi(alpha: &str, format: &str) -> PyResult<Vec<String>> {
    let a = MultiIndex::parse(alpha).map_err(err)?;
    let table = RhoTable::new(a.len() + 2, false);
    table.compute_chi(&a).map_err(err)?.iter().map(|p| render(p, format)).collect()
}

/// a_0, a_2 and the a_4 coefficients of the Hodge Laplacian on ν-forms, as exact rational strings.
#[pyfunction]
fn hodge<'py>(py: Python<'py>, n: usize, nu: usize) -> PyResult<Bound<'py, PyDict>> {
    if nu > n {
        return Err(PyValueError::new_err("nu must not exceed n"));
    }
    let p = patodi_closed_form(n, nu);
    let d = PyDict::new(py);
    d.set_item("n", n)?;
    d.set_item("nu", nu)?;
    d.set_item("a0", fmt_rat(&p.a0))?;
    d.set_item("a2", fmt_rat(&p.a2))?;
    d.set_item("c", p.c.iter().map(fmt_rat).collect::<Vec<_>>())?;
    Ok(d)
}

/// Curvature identity residuals on a seeded random metric jet; all are "0" when sound.
#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn jet_residuals<'py>(py: Python<'py>, n: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let data = evaluate_curvature(&MetricJet::random(n, 4, seed), 2, None).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("scalar_curvature", fmt_rat(&data.scalar_curvature()))?;
    for (k, v) in heatcalc::cli::identity_residuals(&data).map_err(err)? {
        d.set_item(k, fmt_rat(&v))?;
    }
    Ok(d)
}

/// Runs the command-line interface on an argument list (without the program name).
#[pyfunction]
fn run(args: Vec<String>) -> PyResult<String> {
    let argv = std::iter::once("heatcalc".to_string()).chain(args);
    let cli = heatcalc::cli::parse_args(argv).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let cfg = heatcalc::cli::resolve(&cli).map_err(err)?;
    heatcalc::cli::run(&cfg).map_err(err)
}

/// Adds the module contents; shared by the extension entry point and embedded use.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(heat_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(chi, m)?)?;
    m.add_function(wrap_pyfunction!(hodge, m)?)?;
    m.add_function(wrap_pyfunction!(jet_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[pymodule]
fn heatcalc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
