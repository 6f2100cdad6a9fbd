//! Python bindings: spin closed forms, generic chain statistics, the Monte
//! Carlo oracle, the uncertainty check and the validation suites.
//!
//! Stages are `(observable, sigma)` pairs where the observable is a preset
//! (`"Sx"`, `"Sy"`, `"Sz"`) or a square list of rows of complex numbers.
//! Initial states are presets (`"plus"`, `"minus"`, `"up"`, `"down"`) or a
//! unit-trace density matrix. `free_index` counts stages from 1.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use seqmeas::chain::{conditional_stats_k, ChainQuery, ChainResult, MeasurementChain};
use seqmeas::conditional::ExtractionFlag;
use seqmeas::kraus::MeasurementStage;
use seqmeas::linalg::ComplexMatrix;
use seqmeas::oracle::{self, SampleMethod, SamplerConfig};
use seqmeas::validate::{format_report, run_all, run_suite, Suite, ValidateConfig};
use seqmeas::{spin, Complex64, DensityMatrix, Observable, PureState};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(err)
}

fn initial_state(obj: &Bound<'_, PyAny>) -> PyResult<DensityMatrix> {
    if let Ok(name) = obj.extract::<String>() {
        let psi = match name.as_str() {
            "plus" => PureState::plus(),
            "minus" => PureState::minus(),
            "up" => PureState::up(),
            "down" => PureState::down(),
            other => return Err(err(format!("unknown state preset {other:?}"))),
        };
        return Ok(DensityMatrix::from_pure(&psi));
    }
    DensityMatrix::normalized_from(matrix(obj.extract()?)?).map_err(err)
}

fn observable(obj: &Bound<'_, PyAny>) -> PyResult<Observable> {
    if let Ok(name) = obj.extract::<String>() {
        return match name.as_str() {
            "Sx" => Ok(Observable::spin_x()),
            "Sy" => Ok(Observable::spin_y()),
            "Sz" => Ok(Observable::spin_z()),
            other => Err(err(format!("unknown observable preset {other:?}"))),
        };
    }
    Observable::from_matrix(&matrix(obj.extract()?)?).map_err(err)
}

fn build_chain(stages: &[(Bound<'_, PyAny>, f64)], initial: &Bound<'_, PyAny>) -> PyResult<MeasurementChain> {
    let stages = stages
        .iter()
        .enumerate()
        .map(|(i, (obs, sigma))| {
            MeasurementStage::new(observable(obs)?, *sigma, format!("stage{}", i + 1)).map_err(err)
        })
        .collect::<PyResult<Vec<_>>>()?;
    MeasurementChain::new(stages, initial_state(initial)?).map_err(err)
}

fn build_query(chain: &MeasurementChain, free_index: usize, fixed: Vec<f64>) -> PyResult<ChainQuery> {
    if free_index == 0 {
        return Err(err("free_index counts stages from 1"));
    }
    let q = ChainQuery::new(free_index - 1, fixed).map_err(err)?;
    q.validate(chain).map_err(err)?;
    Ok(q)
}

fn flag_name(flag: ExtractionFlag) -> &'static str {
    match flag {
        ExtractionFlag::Exact => "exact",
        ExtractionFlag::Clamped => "clamped",
        ExtractionFlag::Anomalous => "anomalous",
    }
}

fn solve(
    stages: Vec<(Bound<'_, PyAny>, f64)>,
    initial: &Bound<'_, PyAny>,
    free_index: usize,
    fixed_outcomes: Vec<f64>,
) -> PyResult<(MeasurementChain, ChainQuery, ChainResult)> {
    let chain = build_chain(&stages, initial)?;
    let query = build_query(&chain, free_index, fixed_outcomes)?;
    let result = conditional_stats_k(&chain, &query).map_err(err)?;
    Ok((chain, query, result))
}

/// `Var(S_x)` of `|+>` after an unread `S_z` interaction of width `sigma1`.
#[pyfunction]
fn var_sx_rho1(sigma1: f64) -> f64 {
    spin::var_sx_rho1_closed(sigma1)
}

/// `Var(S_x | S_z outcome x1)` for `|+>`.
#[pyfunction]
fn var_sx_given_sz(sigma1: f64, x1: f64) -> f64 {
    spin::var_sx_given_sz_closed(sigma1, x1)
}

/// `Var(S_z | S_x outcome x2)` for `|+>` after `S_z` then `S_x`.
#[pyfunction]
fn var_sz_given_sx(sigma1: f64, sigma2: f64, x2: f64) -> PyResult<f64> {
    spin::var_sz_given_sx_closed(sigma1, sigma2, x2).map_err(err)
}

/// Conditional mean, variance and extracted variance of one outcome given
/// all others.
#[pyfunction]
fn conditional_stats<'py>(
    py: Python<'py>,
    stages: Vec<(Bound<'py, PyAny>, f64)>,
    initial: Bound<'py, PyAny>,
    free_index: usize,
    fixed_outcomes: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let (_, _, r) = solve(stages, &initial, free_index, fixed_outcomes)?;
    let d = PyDict::new(py);
    d.set_item("mean", r.mean)?;
    d.set_item("variance", r.variance)?;
    d.set_item("extracted_variance", r.extracted_variance)?;
    d.set_item("flag", flag_name(r.flag))?;
    Ok(d)
}

/// Normalized conditional density of the free outcome at each point of `xs`.
#[pyfunction]
fn conditional_density(
    stages: Vec<(Bound<'_, PyAny>, f64)>,
    initial: Bound<'_, PyAny>,
    free_index: usize,
    fixed_outcomes: Vec<f64>,
    xs: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let (_, _, r) = solve(stages, &initial, free_index, fixed_outcomes)?;
    Ok(xs.into_iter().map(|x| r.pdf(x)).collect())
}

/// Monte Carlo estimate of the conditional variance with its jackknife
/// standard error.
#[pyfunction]
#[pyo3(signature = (stages, initial, free_index, fixed_outcomes, samples = 1_000_000, seed = 0))]
fn mc_conditional_variance<'py>(
    py: Python<'py>,
    stages: Vec<(Bound<'py, PyAny>, f64)>,
    initial: Bound<'py, PyAny>,
    free_index: usize,
    fixed_outcomes: Vec<f64>,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let chain = build_chain(&stages, &initial)?;
    let query = build_query(&chain, free_index, fixed_outcomes)?;
    let cfg = SamplerConfig::new(samples, seed).map_err(err)?;
    let mc = py
        .detach(|| oracle::mc_conditional_variance(&chain, &query, &cfg))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("estimate", mc.estimate)?;
    d.set_item("standard_error", mc.standard_error)?;
    d.set_item("mean", mc.mean)?;
    d.set_item("mean_standard_error", mc.mean_standard_error)?;
    d.set_item("samples", mc.samples)?;
    d.set_item(
        "method",
        match mc.method {
            SampleMethod::Direct => "direct",
            SampleMethod::Rejection => "rejection",
        },
    )?;
    d.set_item("acceptance", mc.acceptance)?;
    Ok(d)
}

/// Joint outcome records of the whole chain, one list per draw.
#[pyfunction]
#[pyo3(signature = (stages, initial, samples, seed = 0))]
fn sample_chain(
    py: Python<'_>,
    stages: Vec<(Bound<'_, PyAny>, f64)>,
    initial: Bound<'_, PyAny>,
    samples: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let chain = build_chain(&stages, &initial)?;
    let cfg = SamplerConfig::new(samples, seed).map_err(err)?;
    let s = py.detach(|| oracle::sample_chain(&chain, &cfg)).map_err(err)?;
    Ok((0..s.len()).map(|i| s.record(i).to_vec()).collect())
}

/// Sum-of-variances uncertainty check for a pure state `psi`.
#[pyfunction]
fn mpur_check<'py>(
    py: Python<'py>,
    psi: Vec<Complex64>,
    a: Bound<'py, PyAny>,
    b: Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyDict>> {
    let psi = PureState::new(psi).map_err(err)?;
    let rep = seqmeas::mpur::mpur_check(&psi, &observable(&a)?, &observable(&b)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("lhs_sum", rep.lhs_sum)?;
    d.set_item("bound", rep.bound)?;
    d.set_item("r_a", rep.r_a)?;
    d.set_item("r_b", rep.r_b)?;
    d.set_item("satisfied", rep.satisfied)?;
    Ok(d)
}

/// Runs one property suite (or `"all"`); returns `(passed, report)`.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = None))]
fn validate(py: Python<'_>, suite: &str, seed: Option<u64>) -> PyResult<(bool, String)> {
    let mut cfg = ValidateConfig::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let which = if suite == "all" { None } else { Some(suite.parse::<Suite>().map_err(err)?) };
    let reports = py.detach(|| match which {
        Some(s) => vec![run_suite(s, &cfg)],
        None => run_all(&cfg),
    });
    Ok((reports.iter().all(|r| r.passed()), format_report(&reports)))
}

#[pymodule]
#[pyo3(name = "seqmeas")]
fn seqmeas_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("RNG_ALGORITHM", oracle::RNG_ALGORITHM)?;
    m.add_function(wrap_pyfunction!(var_sx_rho1, m)?)?;
    m.add_function(wrap_pyfunction!(var_sx_given_sz, m)?)?;
    m.add_function(wrap_pyfunction!(var_sz_given_sx, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_stats, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_density, m)?)?;
    m.add_function(wrap_pyfunction!(mc_conditional_variance, m)?)?;
    m.add_function(wrap_pyfunction!(sample_chain, m)?)?;
    m.add_function(wrap_pyfunction!(mpur_check, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
