//! Python bindings. States cross the boundary as lists of Python `complex`
//! amplitudes over `|0⟩ … |n_max⟩`; statistics come back as a read-only
//! `PhotonStats` object.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use nbs_core::generation::{self, DispersiveParams, KerrParams};
use nbs_core::{fock, states, stats, sweep, verify, FockVector, NbsError, TruncationPolicy, C64};

fn to_py(e: NbsError) -> PyErr {
    match e {
        NbsError::TruncationOverflow { .. } | NbsError::HardCapExceeded { .. } | NbsError::NonConvergence { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        e => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for nbs_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn policy(tolerance: Option<f64>) -> PyResult<TruncationPolicy> {
    match tolerance {
        Some(t) => TruncationPolicy::new(t, nbs_core::fock::HARD_CAP).py(),
        None => Ok(TruncationPolicy::default()),
    }
}

fn vector(amplitudes: Vec<C64>) -> PyResult<FockVector> {
    if amplitudes.is_empty() {
        return Err(PyValueError::new_err("state must have at least one amplitude"));
    }
    Ok(FockVector::new(amplitudes))
}

/// `(M, η, θ, φ)`: NBS order, modulus and phase of `η_C`, superposition phase.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct NbsParams {
    inner: nbs_core::NbsParams,
}

#[pymethods]
impl NbsParams {
    #[new]
    #[pyo3(signature = (m, eta, theta = 0.0, phi = 0.0))]
    fn new(m: u32, eta: f64, theta: f64, phi: f64) -> PyResult<Self> {
        Ok(NbsParams { inner: nbs_core::NbsParams::new(m, eta, theta, phi).py()? })
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }

    fn __repr__(&self) -> String {
        let p = self.inner;
        format!("NbsParams(m={}, eta={}, theta={}, phi={})", p.m, p.eta, p.theta, p.phi)
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PhotonStats {
    mean_n: f64,
    second_moment: f64,
    /// `None` for the vacuum.
    mandel_q: Option<f64>,
    exp_a: C64,
    exp_a2: C64,
    var_x1: f64,
    var_x2: f64,
}

impl From<nbs_core::PhotonStats> for PhotonStats {
    fn from(s: nbs_core::PhotonStats) -> Self {
        PhotonStats {
            mean_n: s.mean_n,
            second_moment: s.second_moment,
            mandel_q: s.mandel_q.value(),
            exp_a: s.exp_a,
            exp_a2: s.exp_a2,
            var_x1: s.var_x1,
            var_x2: s.var_x2,
        }
    }
}

#[pymethods]
impl PhotonStats {
    fn __repr__(&self) -> String {
        format!(
            "PhotonStats(mean_n={}, mandel_q={:?}, var_x1={}, var_x2={})",
            self.mean_n, self.mandel_q, self.var_x1, self.var_x2
        )
    }
}

/// Amplitudes of `N[|η_C⟩ + e^{iφ}|-η_C⟩]`.
#[pyfunction]
#[pyo3(signature = (params, tolerance = None))]
fn superposition(params: NbsParams, tolerance: Option<f64>) -> PyResult<Vec<C64>> {
    Ok(states::superposition(&params.inner, &policy(tolerance)?).py()?.into_amplitudes())
}

/// Amplitudes of the NBS `|η_C, M⟩`; `params.phi` is ignored.
#[pyfunction]
#[pyo3(signature = (params, tolerance = None))]
fn nbs(params: NbsParams, tolerance: Option<f64>) -> PyResult<Vec<C64>> {
    Ok(states::nbs(&params.inner, &policy(tolerance)?).py()?.into_amplitudes())
}

#[pyfunction]
#[pyo3(signature = (params, tolerance = None))]
fn even_nbs(params: NbsParams, tolerance: Option<f64>) -> PyResult<Vec<C64>> {
    Ok(states::even_nbs(&params.inner, &policy(tolerance)?).py()?.into_amplitudes())
}

#[pyfunction]
#[pyo3(signature = (params, tolerance = None))]
fn odd_nbs(params: NbsParams, tolerance: Option<f64>) -> PyResult<Vec<C64>> {
    Ok(states::odd_nbs(&params.inner, &policy(tolerance)?).py()?.into_amplitudes())
}

/// `N₀[|α⟩ + e^{iφ}|-α⟩]`.
#[pyfunction]
#[pyo3(signature = (alpha, phi, tolerance = None))]
fn cat_state(alpha: C64, phi: f64, tolerance: Option<f64>) -> PyResult<Vec<C64>> {
    Ok(states::cat_state(alpha, phi, &policy(tolerance)?).py()?.into_amplitudes())
}

#[pyfunction]
fn normalization_constant(phi: f64, eta: f64, m: u32) -> PyResult<f64> {
    states::normalization_constant(phi, eta, m).py()
}

/// `P(n)` of the superposition.
#[pyfunction]
#[pyo3(signature = (params, tolerance = None))]
fn photon_distribution(params: NbsParams, tolerance: Option<f64>) -> PyResult<Vec<f64>> {
    Ok(sweep::pn_rows(&params.inner, &policy(tolerance)?).py()?.into_iter().map(|r| r.1).collect())
}

/// Moments by direct summation over the given amplitudes.
#[pyfunction]
fn oracle_stats(amplitudes: Vec<C64>) -> PyResult<PhotonStats> {
    Ok(fock::oracle_stats(&vector(amplitudes)?).py()?.into())
}

/// Moments from the closed-form expressions.
#[pyfunction]
fn closed_stats(params: NbsParams) -> PyResult<PhotonStats> {
    Ok(stats::closed_stats(&params.inner).py()?.into())
}

#[pyfunction]
fn mandel_q(phi: f64, eta: f64, m: u32) -> PyResult<f64> {
    stats::q_closed(phi, eta, m).py()
}

#[pyfunction]
fn mean_n(phi: f64, eta: f64, m: u32) -> PyResult<f64> {
    stats::mean_closed(phi, eta, m).py()
}

/// `(⟨ΔX₁²⟩, ⟨ΔX₂²⟩)`.
#[pyfunction]
fn quadrature_variances(phi: f64, eta: f64, theta: f64, m: u32) -> PyResult<(f64, f64)> {
    stats::quadrature_variances_closed(phi, eta, theta, m).py()
}

/// Kerr evolution of the NBS for `t = π/(2 g1)`.
#[pyfunction]
#[pyo3(signature = (params, g1 = 1.0, tolerance = None))]
fn kerr_generate(params: NbsParams, g1: f64, tolerance: Option<f64>) -> PyResult<Vec<C64>> {
    Ok(generation::kerr_generate(&params.inner, g1, &policy(tolerance)?).py()?.into_amplitudes())
}

#[pyfunction]
fn kerr_evolve(amplitudes: Vec<C64>, g1: f64, t: f64) -> PyResult<Vec<C64>> {
    let k = KerrParams::new(g1, t).py()?;
    Ok(generation::kerr_evolve(&vector(amplitudes)?, &k).into_amplitudes())
}

/// Runs the dispersive protocol and returns
/// `(projected_g, success_prob_g, success_prob_e)`.
#[pyfunction]
#[pyo3(signature = (params, g2, t, phi, tolerance = None))]
fn dispersive_protocol(
    params: NbsParams,
    g2: f64,
    t: f64,
    phi: f64,
    tolerance: Option<f64>,
) -> PyResult<(Vec<C64>, f64, f64)> {
    let d = DispersiveParams::new(g2, t, phi).py()?;
    let out = generation::dispersive_protocol(&params.inner, &d, &policy(tolerance)?).py()?;
    Ok((out.projected_g.into_amplitudes(), out.success_prob_g, out.success_prob_e))
}

/// `|⟨u|v⟩|`; the shorter state is zero-padded.
#[pyfunction]
fn fidelity(u: Vec<C64>, v: Vec<C64>) -> PyResult<f64> {
    let n = u.len().max(v.len()).saturating_sub(1);
    let (u, v) = (vector(u)?.resized(n), vector(v)?.resized(n));
    generation::fidelity(&u, &v).py()
}

/// `(eta, value)` pairs of Mandel Q (`quantity="mandel_q"`) or
/// `⟨ΔX₂²⟩` (`quantity="var_x2"`) over the default η grid.
#[pyfunction]
#[pyo3(signature = (quantity, m, phi, theta = 0.0))]
fn sweep_eta(quantity: &str, m: u32, phi: f64, theta: f64) -> PyResult<Vec<(f64, f64)>> {
    let q = match quantity {
        "mandel_q" => sweep::Quantity::MandelQ,
        "var_x2" => sweep::Quantity::VarX2,
        other => return Err(PyValueError::new_err(format!("unknown quantity {other:?}"))),
    };
    let config = sweep::SweepConfig { m, theta, phis: vec![phi], grid: sweep::EtaGrid::default() };
    let records = sweep::sweep(&config, q).py()?;
    Ok(records.into_iter().map(|r| (r.eta, r.value.value().unwrap_or(f64::NAN))).collect())
}

/// Runs the self-check suite; returns `(passed, [(name, residual, tolerance, passed)])`.
#[pyfunction]
fn run_verify() -> (bool, Vec<(String, f64, f64, bool)>) {
    let report = verify::run_suite(&verify::VerifyOptions::default());
    let checks = report.checks.iter().map(|c| (c.name.to_string(), c.residual, c.tolerance, c.passed)).collect();
    (report.passed, checks)
}

#[pymodule]
fn nbs_states(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<NbsParams>()?;
    m.add_class::<PhotonStats>()?;
    m.add_function(wrap_pyfunction!(superposition, m)?)?;
    m.add_function(wrap_pyfunction!(nbs, m)?)?;
    m.add_function(wrap_pyfunction!(even_nbs, m)?)?;
    m.add_function(wrap_pyfunction!(odd_nbs, m)?)?;
    m.add_function(wrap_pyfunction!(cat_state, m)?)?;
    m.add_function(wrap_pyfunction!(normalization_constant, m)?)?;
    m.add_function(wrap_pyfunction!(photon_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_stats, m)?)?;
    m.add_function(wrap_pyfunction!(closed_stats, m)?)?;
    m.add_function(wrap_pyfunction!(mandel_q, m)?)?;
    m.add_function(wrap_pyfunction!(mean_n, m)?)?;
    m.add_function(wrap_pyfunction!(quadrature_variances, m)?)?;
    m.add_function(wrap_pyfunction!(kerr_generate, m)?)?;
    m.add_function(wrap_pyfunction!(kerr_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(dispersive_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_eta, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
