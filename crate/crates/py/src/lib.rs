//! Python bindings for the SIR simulation and estimation toolkit.
//!
//! The module exposes the main operations of the core crate: chain-binomial
//! simulation, the five likelihood-based estimators of (a, c), forward
//! Monte-Carlo reproduction ratios, instantaneous-R renewal estimation,
//! autoregressive estimation, the conjugate posterior of R0 = a/c, the
//! deterministic final-size equation, and replication studies of estimator
//! sampling distributions.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sirmc::bayes::{posterior_update, GammaParam, PosteriorPair, RzeroPosterior};
use sirmc::epiestim::{
    ar_estimate as core_ar_estimate, discretize_interval, geometric_profile as core_geometric,
    instantaneous_r as core_instantaneous_r, InfectivityProfile, ProfileFamily, RPrior,
};
use sirmc::estimators::{fit as core_fit, Method, SufficientStats};
use sirmc::mechanistic::{deterministic_path, final_size as core_final_size, MechanisticState};
use sirmc::montecarlo::{run_design, McDesign};
use sirmc::reproduction::{rzero_path, RzeroConfig};
use sirmc::sir::{default_init, simulate as core_simulate};
use sirmc::{csv, CountPath as CoreCountPath, ModelParams, RngStream};

fn err(e: sirmc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A simulated epidemic: daily compartment counts and daily transitions.
#[pyclass(name = "CountPath")]
#[derive(Clone)]
struct PyCountPath {
    inner: CoreCountPath,
    n: u64,
}

#[pymethods]
impl PyCountPath {
    /// Number of simulated days (excluding the initial state).
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    /// Rows (t, N1, N2, N3) including the initial state at t = 0.
    fn states(&self) -> Vec<(u32, u64, u64, u64)> {
        self.inner.states.iter().map(|s| (s.t, s.n1, s.n2, s.n3)).collect()
    }

    /// Rows (t, N12, N23) for t = 1..horizon.
    fn transitions(&self) -> Vec<(u32, u64, u64)> {
        self.inner.transitions.iter().map(|tr| (tr.t, tr.n12, tr.n23)).collect()
    }

    /// Daily new infections N12(t) as floats, for renewal-type estimators.
    fn incidence(&self) -> Vec<f64> {
        self.inner.transitions.iter().map(|tr| tr.n12 as f64).collect()
    }

    /// Population size n.
    #[getter]
    fn n(&self) -> u64 {
        self.n
    }

    /// Serialize to the `t,N1,N2,N3,N12,N23` CSV format used by the CLI.
    fn to_csv(&self) -> String {
        csv::write_count_path(&self.inner)
    }

    /// Parse a path from the same CSV format.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        let inner = csv::read_count_path(text).map_err(err)?;
        let n = inner.states[0].n1 + inner.states[0].n2 + inner.states[0].n3;
        Ok(Self { inner, n })
    }

    fn __repr__(&self) -> String {
        format!("CountPath(horizon={}, n={})", self.inner.horizon(), self.n)
    }
}

/// Simulate the chain-binomial SIR model for `horizon` days.
#[pyfunction]
#[pyo3(signature = (a, c, n, i0, horizon, seed, stream=0))]
fn simulate(a: f64, c: f64, n: u64, i0: u64, horizon: u32, seed: u64, stream: u64) -> PyResult<PyCountPath> {
    let params = ModelParams::new(a, c, n).map_err(err)?;
    let path = core_simulate(&params, &default_init(n, i0), horizon, RngStream::new(seed, stream))
        .map_err(err)?;
    Ok(PyCountPath { inner: path, n })
}

fn fit_dict<'py>(py: Python<'py>, f: &sirmc::estimators::FitResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("method", f.method.as_str())?;
    d.set_item("a_hat", f.a_hat)?;
    d.set_item("c_hat", f.c_hat)?;
    d.set_item("r0_hat", f.r0_hat)?;
    d.set_item("var_a", f.var_a)?;
    d.set_item("var_c", f.var_c)?;
    d.set_item("flags", f.flags.render())?;
    Ok(d)
}

/// Estimate (a, c, R0) from a path with one method:
/// "binomial-ml", "poisson-aml", "gaussian-aml", "unfeasible-gaussian",
/// or "poisson-gaussian".
#[pyfunction]
#[pyo3(signature = (path, method="binomial-ml"))]
fn fit<'py>(py: Python<'py>, path: &PyCountPath, method: &str) -> PyResult<Bound<'py, PyDict>> {
    let m = Method::parse(method).map_err(err)?;
    let stats = SufficientStats::from_path(&path.inner).map_err(err)?;
    fit_dict(py, &core_fit(&stats, m).map_err(err)?)
}

/// Run all five estimators on one path.
#[pyfunction]
fn fit_all<'py>(py: Python<'py>, path: &PyCountPath) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let stats = SufficientStats::from_path(&path.inner).map_err(err)?;
    Method::ALL
        .iter()
        .map(|&m| fit_dict(py, &core_fit(&stats, m).map_err(err)?))
        .collect()
}

/// Per-day basic and effective reproduction ratios along a path, evaluated
/// by forward Monte-Carlo. Returns rows (t, effective, basic-or-None).
#[pyfunction]
#[pyo3(signature = (path, a, c, horizon=100, replications=100, seed=0))]
fn rzero_series(
    path: &PyCountPath,
    a: f64,
    c: f64,
    horizon: u32,
    replications: u32,
    seed: u64,
) -> PyResult<Vec<(u32, f64, Option<f64>)>> {
    let params = ModelParams::new(a, c, path.n).map_err(err)?;
    let cfg = RzeroConfig { horizon, replications, stream: RngStream::new(seed, 0) };
    let series = rzero_path(&path.inner, &params, &cfg).map_err(err)?;
    Ok(series.points.iter().map(|p| (p.t, p.effective, p.basic)).collect())
}

/// Normalized geometric infectivity profile with daily recovery intensity c.
#[pyfunction]
#[pyo3(signature = (c, support=100))]
fn geometric_profile(c: f64, support: usize) -> PyResult<Vec<f64>> {
    Ok(core_geometric(c, support).map_err(err)?.weights)
}

/// Normalized serial-interval profile from a continuous family
/// ("lognormal" or "gamma") with the given mean and standard deviation.
#[pyfunction]
#[pyo3(signature = (family, mean, sd, support=100))]
fn serial_interval_profile(family: &str, mean: f64, sd: f64, support: usize) -> PyResult<Vec<f64>> {
    let fam = match family {
        "lognormal" => ProfileFamily::LogNormal,
        "gamma" => ProfileFamily::Gamma,
        other => return Err(PyValueError::new_err(format!("unknown family '{other}'"))),
    };
    Ok(discretize_interval(fam, mean, sd, support).map_err(err)?.weights)
}

/// Instantaneous reproduction number series from an incidence series.
/// Returns rows (t, raw_ratio-or-None, posterior_mean, shape, rate, undefined).
#[pyfunction]
#[pyo3(signature = (incidence, weights, window=7, prior_shape=1.0, prior_rate=0.2))]
fn instantaneous_r(
    incidence: Vec<f64>,
    weights: Vec<f64>,
    window: usize,
    prior_shape: f64,
    prior_rate: f64,
) -> PyResult<Vec<(u32, Option<f64>, f64, f64, f64, bool)>> {
    let profile = InfectivityProfile::explicit(weights).map_err(err)?;
    let prior = RPrior::new(prior_shape, prior_rate).map_err(err)?;
    let series = core_instantaneous_r(&incidence, &profile, window, &prior).map_err(err)?;
    Ok(series
        .iter()
        .map(|p| (p.t, p.raw_ratio, p.posterior_mean, p.posterior_shape, p.posterior_rate, p.undefined))
        .collect())
}

/// Autoregression of incidence on its own lags; returns the coefficient
/// vector and the implied reproduction-number estimate (their sum).
#[pyfunction]
fn ar_estimate(incidence: Vec<f64>, lags: usize) -> PyResult<(Vec<f64>, f64)> {
    core_ar_estimate(&incidence, lags).map_err(err)
}

/// Conjugate gamma posterior of (a, c) and the implied R0 distribution.
/// Returns a dict with the updated shapes/rates, the posterior mean of R0
/// (None when undefined), and the 5% / 50% / 95% quantiles.
#[pyfunction]
#[pyo3(signature = (path, prior_shape=1.0, prior_rate=1e-3))]
fn posterior<'py>(
    py: Python<'py>,
    path: &PyCountPath,
    prior_shape: f64,
    prior_rate: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let stats = SufficientStats::from_path(&path.inner).map_err(err)?;
    let prior = PosteriorPair {
        a: GammaParam::new(prior_shape, prior_rate).map_err(err)?,
        c: GammaParam::new(prior_shape, prior_rate).map_err(err)?,
    };
    let pair = posterior_update(&prior, &stats).map_err(err)?;
    let post = RzeroPosterior::new(pair).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("shape_a", pair.a.shape)?;
    d.set_item("rate_a", pair.a.rate)?;
    d.set_item("shape_c", pair.c.shape)?;
    d.set_item("rate_c", pair.c.rate)?;
    d.set_item("r0_mean", post.mean())?;
    d.set_item("r0_q05", post.quantile(0.05).map_err(err)?)?;
    d.set_item("r0_q50", post.quantile(0.50).map_err(err)?)?;
    d.set_item("r0_q95", post.quantile(0.95).map_err(err)?)?;
    Ok(d)
}

/// Limiting susceptible fraction x(inf) of the deterministic model, from
/// the final-size equation. `y0` is the initially infected fraction.
#[pyfunction]
#[pyo3(signature = (a, c, y0=1e-5))]
fn final_size(a: f64, c: f64, y0: f64) -> PyResult<f64> {
    let params = ModelParams::new(a, c, 1_000_000).map_err(err)?;
    core_final_size(&params, 1.0 - y0, y0).map_err(err)
}

/// Deterministic mechanistic trajectory (x, y, z fractions) from an
/// initially infected fraction `y0`.
#[pyfunction]
#[pyo3(signature = (a, c, horizon, y0=1e-5))]
fn trajectory(a: f64, c: f64, horizon: usize, y0: f64) -> PyResult<Vec<(f64, f64, f64)>> {
    let params = ModelParams::new(a, c, 1_000_000).map_err(err)?;
    let init = MechanisticState::new(1.0 - y0, y0, 0.0).map_err(err)?;
    let path = deterministic_path(&init, &params, horizon).map_err(err)?;
    Ok(path.iter().map(|s| (s.x, s.y, s.z)).collect())
}

/// Replication study of one design: simulate `replications` epidemics,
/// estimate each, and summarize the sampling distributions of a_hat, c_hat,
/// and r0_hat (mean, variance, median) plus their correlation.
#[pyfunction]
#[pyo3(signature = (a, c, n, i0, horizon, replications, seed, method="poisson-aml"))]
#[allow(clippy::too_many_arguments)]
fn mc_study<'py>(
    py: Python<'py>,
    a: f64,
    c: f64,
    n: u64,
    i0: u64,
    horizon: u32,
    replications: u64,
    seed: u64,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let m = Method::parse(method).map_err(err)?;
    let design = McDesign { n, i0, horizon, a, c, replications, seed };
    let res = run_design(&design, m).map_err(err)?;
    let d = PyDict::new(py);
    for (name, stats) in [("a", &res.a), ("c", &res.c), ("r0", &res.r0)] {
        let s = PyDict::new(py);
        s.set_item("mean", stats.mean)?;
        s.set_item("variance", stats.variance)?;
        s.set_item("median", stats.median)?;
        s.set_item("count", stats.count)?;
        d.set_item(name, s)?;
    }
    d.set_item("rho_ac", res.rho_ac)?;
    d.set_item("flagged", res.flagged)?;
    Ok(d)
}

#[pymodule]
fn sirmc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCountPath>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(fit_all, m)?)?;
    m.add_function(wrap_pyfunction!(rzero_series, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_profile, m)?)?;
    m.add_function(wrap_pyfunction!(serial_interval_profile, m)?)?;
    m.add_function(wrap_pyfunction!(instantaneous_r, m)?)?;
    m.add_function(wrap_pyfunction!(ar_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(posterior, m)?)?;
    m.add_function(wrap_pyfunction!(final_size, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(mc_study, m)?)?;
    m.add("METHODS", Method::ALL.map(|m| m.as_str()))?;
    Ok(())
}
