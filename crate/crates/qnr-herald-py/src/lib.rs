//! Python bindings for the qnr-herald library. Parameters are validated
//! exactly as in the Rust API; invalid inputs raise `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qnr_herald::{closed_form, model, optimizer, oracle};
use qnr_herald::{DetectorParams, QnrConfig, SourceParams};

fn err(e: qnr_herald::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn source(mu: f64) -> PyResult<SourceParams> {
    SourceParams::new(mu).map_err(err)
}

fn detector(eta: f64, delta: f64) -> PyResult<DetectorParams> {
    DetectorParams::new(eta, delta).map_err(err)
}

/// Thermal pair-number probabilities mu^n / (1 + mu)^(1 + n) for n = 0..=n_max.
#[pyfunction]
fn thermal_distribution(mu: f64, n_max: u32) -> PyResult<Vec<f64>> {
    Ok(model::thermal_distribution(&source(mu)?, n_max)
        .probs()
        .to_vec())
}

/// Smallest truncation n_max whose thermal tail is at most tail_tol.
#[pyfunction]
fn truncation_cutoff(mu: f64, tail_tol: f64) -> PyResult<u32> {
    model::truncation_cutoff(&source(mu)?, tail_tol).map_err(err)
}

/// Stirling number of the second kind S(n, m), exact.
#[pyfunction]
fn stirling2(n: u32, m: u32) -> u128 {
    closed_form::stirling2(n, m)
}

/// m-click probability across M modes, photon series truncated at n_max.
#[pyfunction]
fn click_probability(
    modes: u32,
    clicks: u32,
    mu: f64,
    eta: f64,
    delta: f64,
    n_max: u32,
) -> PyResult<f64> {
    let config = QnrConfig::new(modes, clicks).map_err(err)?;
    closed_form::click_probability(&config, &source(mu)?, &detector(eta, delta)?, n_max).map_err(err)
}

/// Exact closed-form single-click probability.
#[pyfunction]
fn single_click_probability(modes: u32, mu: f64, eta: f64, delta: f64) -> PyResult<f64> {
    closed_form::single_click_probability(modes, &source(mu)?, &detector(eta, delta)?).map_err(err)
}

/// Exact closed-form fidelity of the heralded state to one photon.
#[pyfunction]
fn single_photon_fidelity(modes: u32, mu: f64, eta: f64, delta: f64) -> PyResult<f64> {
    closed_form::single_photon_fidelity(modes, &source(mu)?, &detector(eta, delta)?).map_err(err)
}

/// Heralded-arm number distribution given one click:
/// (probabilities, herald_probability, fidelity_to_single).
#[pyfunction]
fn heralded_distribution(
    modes: u32,
    mu: f64,
    eta: f64,
    delta: f64,
    n_max: u32,
) -> PyResult<(Vec<f64>, f64, f64)> {
    let state =
        closed_form::heralded_distribution(modes, &source(mu)?, &detector(eta, delta)?, n_max)
            .map_err(err)?;
    Ok((
        state.distribution.probs().to_vec(),
        state.herald_probability,
        state.fidelity_to_single,
    ))
}

/// Dark-count-dominated large-M fidelity floor.
#[pyfunction]
fn fidelity_large_m_limit(mu: f64, eta: f64, delta: f64) -> PyResult<f64> {
    closed_form::fidelity_large_m_limit(&source(mu)?, &detector(eta, delta)?).map_err(err)
}

/// m-click probability by exact combinatorial enumeration.
#[pyfunction]
fn exact_click_probability(
    modes: u32,
    clicks: u32,
    mu: f64,
    eta: f64,
    delta: f64,
    n_max: u32,
) -> PyResult<f64> {
    let config = QnrConfig::new(modes, clicks).map_err(err)?;
    oracle::exact_click_probability(&config, &source(mu)?, &detector(eta, delta)?, n_max)
        .map_err(err)
}

/// Seeded Monte Carlo estimate: (estimate, standard_error).
#[pyfunction]
fn mc_click_probability(
    modes: u32,
    clicks: u32,
    mu: f64,
    eta: f64,
    delta: f64,
    trials: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let config = QnrConfig::new(modes, clicks).map_err(err)?;
    let mc = oracle::McConfig::new(trials, seed).map_err(err)?;
    let estimate =
        oracle::mc_click_probability(&config, &source(mu)?, &detector(eta, delta)?, &mc)
            .map_err(err)?;
    Ok((estimate.estimate, estimate.std_error))
}

/// Continuous-M approximation of the fidelity-optimal mode count.
#[pyfunction]
fn approx_fidelity_opt(mu: f64, eta: f64, delta: f64) -> PyResult<f64> {
    optimizer::approx_fidelity_opt(&source(mu)?, &detector(eta, delta)?).map_err(err)
}

/// Continuous-M approximation of the probability local maximum.
#[pyfunction]
fn approx_prob_local_max(mu: f64, eta: f64, delta: f64) -> PyResult<f64> {
    optimizer::approx_prob_local_max(&source(mu)?, &detector(eta, delta)?).map_err(err)
}

/// Integer argmax of the fidelity over M = 1..=search_bound:
/// (modes, fidelity, at_search_bound).
#[pyfunction]
fn find_fidelity_opt(
    mu: f64,
    eta: f64,
    delta: f64,
    search_bound: u32,
) -> PyResult<(u32, f64, bool)> {
    let opt = optimizer::find_fidelity_opt(&source(mu)?, &detector(eta, delta)?, search_bound)
        .map_err(err)?;
    Ok((opt.modes, opt.fidelity, opt.at_search_bound))
}

/// First interior local maximum of the single-click probability, or None.
#[pyfunction]
fn find_prob_local_max(
    mu: f64,
    eta: f64,
    delta: f64,
    search_bound: u32,
) -> PyResult<Option<(u32, f64)>> {
    let local = optimizer::find_prob_local_max(&source(mu)?, &detector(eta, delta)?, search_bound)
        .map_err(err)?;
    Ok(local.map(|l| (l.modes, l.probability)))
}

#[pymodule]
fn qnr_herald_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(thermal_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_cutoff, m)?)?;
    m.add_function(wrap_pyfunction!(stirling2, m)?)?;
    m.add_function(wrap_pyfunction!(click_probability, m)?)?;
    m.add_function(wrap_pyfunction!(single_click_probability, m)?)?;
    m.add_function(wrap_pyfunction!(single_photon_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(heralded_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_large_m_limit, m)?)?;
    m.add_function(wrap_pyfunction!(exact_click_probability, m)?)?;
    m.add_function(wrap_pyfunction!(mc_click_probability, m)?)?;
    m.add_function(wrap_pyfunction!(approx_fidelity_opt, m)?)?;
    m.add_function(wrap_pyfunction!(approx_prob_local_max, m)?)?;
    m.add_function(wrap_pyfunction!(find_fidelity_opt, m)?)?;
    m.add_function(wrap_pyfunction!(find_prob_local_max, m)?)?;
    Ok(())
}
