//! Python bindings: kernels, certificates, simulation, diagnostics,
//! Wasserstein distances and scenario runs.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hkdelay::runner::{run, RunOptions};
use hkdelay::scenario::Scenario;
use hkdelay::{
    DelayProfile, DiagnosticsSeries, EmpiricalMeasure, InfluenceKernel, InitialHistory, MemoryWeight,
    ModelConfig, WeightScheme,
};

fn to_py(err: hkdelay::Error) -> PyErr {
    if err.is_validation() {
        PyValueError::new_err(err.to_string())
    } else {
        PyRuntimeError::new_err(err.to_string())
    }
}

/// Influence function ψ.
#[pyclass(name = "Kernel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKernel(InfluenceKernel);

#[pymethods]
impl PyKernel {
    #[staticmethod]
    fn constant() -> Self {
        Self(InfluenceKernel::constant())
    }

    #[staticmethod]
    fn power_law(exponent: f64) -> PyResult<Self> {
        InfluenceKernel::power_law(exponent).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        InfluenceKernel::exponential(rate).map(Self).map_err(to_py)
    }

    /// ψ(r) for r ≥ 0.
    fn __call__(&self, r: f64) -> PyResult<f64> {
        hkdelay::psi_eval(&self.0, r).map_err(to_py)
    }

    #[getter]
    fn lipschitz_bound(&self) -> f64 {
        self.0.lipschitz_bound
    }

    fn __repr__(&self) -> String {
        format!("Kernel({:?})", self.0.family)
    }
}

/// Delay profile τ(t).
#[pyclass(name = "Delay", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDelay(DelayProfile);

#[pymethods]
impl PyDelay {
    #[staticmethod]
    fn constant(tau: f64) -> PyResult<Self> {
        DelayProfile::constant(tau).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn linear_decreasing(tau0: f64, tau_inf: f64, slope: f64) -> PyResult<Self> {
        DelayProfile::linear_decreasing(tau0, tau_inf, slope).map(Self).map_err(to_py)
    }

    fn __call__(&self, t: f64) -> f64 {
        self.0.tau(t)
    }

    #[getter]
    fn tau_star(&self) -> f64 {
        self.0.tau_star()
    }

    #[getter]
    fn tau_zero(&self) -> f64 {
        self.0.tau_zero()
    }

    fn __repr__(&self) -> String {
        format!("Delay({:?})", self.0.family)
    }
}

/// Memory weight α on [0, τ(0)] of a given delay.
#[pyclass(name = "Weight", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWeight(MemoryWeight);

#[pymethods]
impl PyWeight {
    #[staticmethod]
    fn constant(value: f64, delay: &PyDelay) -> PyResult<Self> {
        MemoryWeight::constant(value, &delay.0).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn exponential(rate: f64, delay: &PyDelay) -> PyResult<Self> {
        MemoryWeight::exponential(rate, &delay.0).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn polynomial(coefficients: Vec<f64>, delay: &PyDelay) -> PyResult<Self> {
        MemoryWeight::polynomial(coefficients, &delay.0).map(Self).map_err(to_py)
    }

    fn __call__(&self, s: f64) -> f64 {
        self.0.eval(s)
    }

    /// h(t) = ∫₀^{τ(t)} α.
    fn h(&self, delay: &PyDelay, t: f64) -> PyResult<f64> {
        hkdelay::h_of_t(&self.0, &delay.0, t).map_err(to_py)
    }

    /// Ā = ∫₀^{τ*} α.
    fn a_bar(&self, delay: &PyDelay) -> PyResult<f64> {
        hkdelay::a_bar(&self.0, &delay.0).map_err(to_py)
    }
}

/// Model configuration. `scheme` is "symmetric" or "normalized".
#[pyclass(name = "Model", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel(ModelConfig);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (n, d, kernel, delay, weight, dt, t_end, scheme = "symmetric", quad_nodes = 32))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        d: usize,
        kernel: &PyKernel,
        delay: &PyDelay,
        weight: &PyWeight,
        dt: f64,
        t_end: f64,
        scheme: &str,
        quad_nodes: usize,
    ) -> PyResult<Self> {
        let scheme = match scheme {
            "symmetric" => WeightScheme::Symmetric,
            "normalized" => WeightScheme::Normalized,
            other => return Err(PyValueError::new_err(format!("unknown weight scheme `{other}`"))),
        };
        let config = ModelConfig {
            n_agents: n,
            dim: d,
            scheme,
            kernel: kernel.0,
            delay: delay.0,
            weight: weight.0.clone(),
            dt,
            t_end,
            quad_nodes,
        };
        config.validate().map_err(to_py)?;
        Ok(Self(config))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n_agents
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.dim
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }
}

/// Simulated trajectory, t ≥ 0 records only.
#[pyclass(name = "Trajectory", frozen, skip_from_py_object)]
struct PyTrajectory {
    inner: hkdelay::Trajectory,
    config: ModelConfig,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times[self.inner.origin..].to_vec()
    }

    /// One flat N·d list per time.
    #[getter]
    fn states(&self) -> Vec<Vec<f64>> {
        self.inner.states[self.inner.origin..].to_vec()
    }

    #[getter]
    fn speed_max(&self) -> Vec<f64> {
        self.inner.speed_max[self.inner.origin..].to_vec()
    }

    #[getter]
    fn final_state(&self) -> Vec<f64> {
        self.inner.final_state().to_vec()
    }

    fn diameters(&self) -> Vec<f64> {
        self.inner
            .forward()
            .map(|k| hkdelay::diameter(&self.inner.states[k], self.inner.dim))
            .collect()
    }

    /// Per-time d_X, γ, Lyapunov functional (with β) and speed.
    #[pyo3(signature = (beta = None))]
    fn diagnostics<'py>(&self, py: Python<'py>, beta: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
        let series = DiagnosticsSeries::compute(&self.inner, &self.config, beta).map_err(to_py)?;
        let out = PyDict::new(py);
        let column = |f: fn(&hkdelay::DiagnosticsRecord) -> f64| series.records.iter().map(f).collect::<Vec<_>>();
        out.set_item("t", column(|r| r.t))?;
        out.set_item("d_X", column(|r| r.d_x))?;
        out.set_item("gamma", column(|r| r.gamma))?;
        out.set_item("lyapunov", column(|r| r.lyapunov))?;
        out.set_item("speed_max", column(|r| r.speed_max))?;
        Ok(out)
    }

    /// Decay rate of d_X fitted on [t_a, t_b]; inf when d_X reached zero.
    fn fit_decay_rate(&self, t_a: f64, t_b: f64) -> PyResult<f64> {
        let series = DiagnosticsSeries::from_diameters(&self.times(), &self.diameters());
        hkdelay::fit_decay_rate(&series, (t_a, t_b)).map(|f| f.rate).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.forward().len()
    }
}

/// Integrates `model` from constant initial positions (flat N·d list).
#[pyfunction]
fn simulate(model: &PyModel, positions: Vec<f64>) -> PyResult<PyTrajectory> {
    let initial = InitialHistory::constant(model.0.dim, positions);
    let inner = hkdelay::simulate(&model.0, &initial).map_err(to_py)?;
    Ok(PyTrajectory {
        inner,
        config: model.0.clone(),
    })
}

/// Consensus certificate for initial data of radius `radius`, as a dict.
#[pyfunction]
fn certify<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    delay: &PyDelay,
    weight: &PyWeight,
    radius: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cert = hkdelay::certify(&kernel.0, &delay.0, &weight.0, radius).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("R", cert.radius)?;
    out.set_item("psi_2R", cert.psi_2r)?;
    out.set_item("lhs", cert.lhs)?;
    out.set_item("rhs", cert.rhs)?;
    out.set_item("holds", cert.holds)?;
    out.set_item("beta_min", cert.beta_min)?;
    out.set_item("beta_max", cert.beta_max)?;
    out.set_item("beta_chosen", cert.beta_chosen)?;
    out.set_item("K", cert.rate)?;
    Ok(out)
}

/// 1-Wasserstein distance between two equal-weight point sets given as flat
/// lists of `dim`-vectors.
#[pyfunction]
#[pyo3(signature = (a, b, dim = 1))]
fn wasserstein1(a: Vec<f64>, b: Vec<f64>, dim: usize) -> PyResult<f64> {
    let mu = EmpiricalMeasure::new(dim, a).map_err(to_py)?;
    let nu = EmpiricalMeasure::new(dim, b).map_err(to_py)?;
    hkdelay::wasserstein1(&mu, &nu).map_err(to_py)
}

/// Runs a scenario file, writing artifacts into `out_dir`; returns the
/// summary line.
#[pyfunction]
#[pyo3(signature = (path, out_dir, seed = None))]
fn run_scenario(path: &str, out_dir: &str, seed: Option<u64>) -> PyResult<String> {
    let scenario = Scenario::from_path(path).map_err(to_py)?;
    let opts = RunOptions {
        out_dir: out_dir.into(),
        seed,
    };
    run(&scenario, &opts).map(|r| r.summary).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "hkdelay")]
fn hkdelay_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_class::<PyDelay>()?;
    m.add_class::<PyWeight>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein1, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
