//! Python bindings: models, discretized operators, fluid modes, coefficients
//! and the macroscopic evolution.

use kinlim::equilibria::{Alpha, GridSpec, KernelKind, ModelParams};
use kinlim::fluid_mode::{solve_mode, trace_branch, FluidMode};
use kinlim::kinetic_solver::{convergence_study, StudySpec};
use kinlim::macro_solver::{evolve_fractional_heat as evolve_macro, MacroField};
use kinlim::operators::{assemble, coercivity_gap, OperatorDisc};
use kinlim::theory::{diffusion_exponent as exponent, kappa_value, regime, scaling_function as theta, Regime};
use kinlim::KinlimError;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: KinlimError) -> PyErr {
    if e.exit_code() == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn regime_name(r: Regime) -> &'static str {
    r.name()
}

#[pyclass(name = "Model", frozen, module = "pykinlim", skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: ModelParams,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (alpha, beta, d = 1, nu0 = 1.0, kernel = "product"))]
    fn scattering(alpha: f64, beta: f64, d: usize, nu0: f64, kernel: &str) -> PyResult<Self> {
        let kernel = match kernel {
            "product" => KernelKind::Product,
            "constant" => KernelKind::Constant,
            other => return Err(PyValueError::new_err(format!("unknown kernel '{other}'"))),
        };
        Ok(Self { inner: ModelParams::scattering(d, alpha, beta, nu0, kernel).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, d = 1))]
    fn fokker_planck(alpha: f64, d: usize) -> PyResult<Self> {
        let a = if alpha.is_infinite() && alpha > 0.0 { Alpha::Infinite } else { Alpha::Finite(alpha) };
        Ok(Self { inner: ModelParams::fokker_planck(d, a).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (s, alpha, d = 1))]
    fn levy_fokker_planck(s: f64, alpha: f64, d: usize) -> PyResult<Self> {
        Ok(Self { inner: ModelParams::levy_fokker_planck(d, s, alpha).map_err(err)? })
    }

    #[staticmethod]
    fn stable_levy(s: f64) -> PyResult<Self> {
        Ok(Self { inner: ModelParams::stable_levy(s).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: ModelParams = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha.value()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family.name()
    }

    /// `{regime, zeta}`.
    fn exponent<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let (a, b) = (self.inner.alpha.value(), self.inner.beta);
        let out = PyDict::new(py);
        out.set_item("regime", regime_name(regime(a, b).map_err(err)?))?;
        out.set_item("zeta", exponent(a, b).map_err(err)?)?;
        Ok(out)
    }

    /// `{regime, zeta, mu0, kappa, method}`.
    fn kappa<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let params = self.inner;
        let law = py.detach(|| kappa_value(&params, None)).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("regime", regime_name(law.regime))?;
        out.set_item("zeta", law.zeta)?;
        out.set_item("mu0", law.mu0)?;
        out.set_item("kappa", law.kappa)?;
        out.set_item("method", serde_json::to_value(law.method).ok().and_then(|v| v.as_str().map(str::to_owned)))?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(family='{}', d={}, alpha={}, beta={})",
            self.inner.family.name(),
            self.inner.d,
            self.inner.alpha,
            self.inner.beta
        )
    }
}

#[pyclass(name = "FluidMode", frozen, module = "pykinlim")]
struct PyFluidMode {
    inner: FluidMode,
}

#[pymethods]
impl PyFluidMode {
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }
    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }
    #[getter]
    fn mu_imag(&self) -> f64 {
        self.inner.mu_imag
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }
    #[getter]
    fn norm_phi_minus_1(&self) -> f64 {
        self.inner.norm_phi_minus_1
    }
    #[getter]
    fn moment_one(&self) -> Complex64 {
        self.inner.moment_one
    }
    #[getter]
    fn phi(&self) -> Vec<Complex64> {
        self.inner.phi.clone()
    }

    fn __repr__(&self) -> String {
        format!("FluidMode(eta={}, mu={:.6e}, residual={:.2e})", self.inner.eta, self.inner.mu, self.inner.residual)
    }
}

#[pyclass(name = "Operator", frozen, module = "pykinlim")]
struct PyOperator {
    inner: OperatorDisc,
}

#[pymethods]
impl PyOperator {
    #[new]
    #[pyo3(signature = (model, n = 1024, vmax = 1e6))]
    fn new(py: Python<'_>, model: &PyModel, n: usize, vmax: f64) -> PyResult<Self> {
        let params = model.inner;
        let spec = GridSpec { n, vmax, ..GridSpec::default() };
        Ok(Self { inner: py.detach(|| assemble(&params, &spec)).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.len()
    }

    /// Nodes `v·σ`.
    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.grid.nodes.clone()
    }

    #[getter]
    fn masses(&self) -> Vec<f64> {
        self.inner.masses.clone()
    }

    fn coercivity_gap(&self, py: Python<'_>) -> PyResult<f64> {
        py.detach(|| coercivity_gap(&self.inner)).map_err(err)
    }

    #[pyo3(signature = (eta, sigma = 1.0))]
    fn solve_mode(&self, py: Python<'_>, eta: f64, sigma: f64) -> PyResult<PyFluidMode> {
        Ok(PyFluidMode { inner: py.detach(|| solve_mode(&self.inner, eta, sigma)).map_err(err)? })
    }

    /// Branch summary with one record per `η`.
    #[pyo3(signature = (etas, sigma = 1.0))]
    fn trace_branch<'py>(&self, py: Python<'py>, etas: Vec<f64>, sigma: f64) -> PyResult<Bound<'py, PyDict>> {
        let branch = py.detach(|| trace_branch(&self.inner, &etas, sigma)).map_err(err)?;
        let out = PyDict::new(py);
        let mut rows = Vec::new();
        for r in branch.records() {
            let row = PyDict::new(py);
            row.set_item("eta", r.eta)?;
            row.set_item("mu", r.mu)?;
            row.set_item("mu_over_theta", r.mu_over_theta)?;
            row.set_item("residual", r.residual)?;
            row.set_item("norm_phi_minus_1", r.norm_phi_minus_1)?;
            row.set_item("moment_one", Complex64::new(r.moment_one_re, r.moment_one_im))?;
            rows.push(row);
        }
        out.set_item("records", rows)?;
        out.set_item("mu0", branch.mu0.value)?;
        out.set_item("r0", branch.r0)?;
        out.set_item("r1", branch.r1)?;
        out.set_item("phi_bound", branch.phi_bound)?;
        out.set_item("monotone", branch.monotone)?;
        Ok(out)
    }

    /// Kinetic-versus-macroscopic errors over an `ε` sweep.
    #[pyo3(signature = (eps, xi0 = 2.0, t_end = 1.0))]
    fn simulate<'py>(&self, py: Python<'py>, eps: Vec<f64>, xi0: f64, t_end: f64) -> PyResult<Bound<'py, PyDict>> {
        let spec = StudySpec { eps_list: eps, xi0, t_end, ..StudySpec::default() };
        let op = &self.inner;
        let study = py
            .detach(|| {
                let law = kappa_value(&op.eq.params, Some(op))?;
                convergence_study(op, &law, &spec)
            })
            .map_err(err)?;
        let r = &study.report;
        let out = PyDict::new(py);
        out.set_item("eps", r.eps_list.clone())?;
        out.set_item("errors", r.errors.clone())?;
        out.set_item("order", r.order)?;
        out.set_item("monotone", r.monotone)?;
        out.set_item("kappa", r.kappa)?;
        out.set_item("zeta", r.zeta)?;
        Ok(out)
    }
}

#[pyfunction]
fn scaling_function(alpha: f64, beta: f64, eps: f64) -> PyResult<f64> {
    theta(alpha, beta, eps).map_err(err)
}

#[pyfunction]
fn diffusion_exponent(alpha: f64, beta: f64) -> PyResult<f64> {
    exponent(alpha, beta).map_err(err)
}

/// `exp(-κ|ξ|^ζ t) r̂(ξ)`.
#[pyfunction]
fn evolve_fractional_heat(xi: Vec<f64>, r_hat: Vec<Complex64>, kappa: f64, zeta: f64, t: f64) -> PyResult<Vec<Complex64>> {
    let n = xi.len();
    let field = MacroField::new(xi, r_hat, vec![1.0; n]).map_err(err)?;
    Ok(evolve_macro(&field, kappa, zeta, t).map_err(err)?.r_hat)
}

#[pymodule]
fn pykinlim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyFluidMode>()?;
    m.add_function(wrap_pyfunction!(scaling_function, m)?)?;
    m.add_function(wrap_pyfunction!(diffusion_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_fractional_heat, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
