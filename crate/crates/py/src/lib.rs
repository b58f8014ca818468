//! Python bindings: `import eitfwm`.
//!
//! Times are in Γ⁻¹ and rates in Γ, as in `fwm-core`, unless a name ends in
//! `_us`.

use std::path::PathBuf;

use fwm_core::experiment::{self, ExperimentConfig, FigureId, RunOptions};
use fwm_core::fitting::{self, FitBounds, FitOptions, FixedParams, PulseSet, TraceModel};
use fwm_core::harris_hau::{self, HarrisHauInputs};
use fwm_core::propagator;
use fwm_core::pulse::Coupling;
use fwm_core::steady::{self, SteadyStateInputs};
use fwm_core::trace;
use fwm_core::units;
use fwm_core::FwmError;
use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: FwmError) -> PyErr {
    match e.exit_code() {
        4 => PyOSError::new_err(e.to_string()),
        3 => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn consts() -> units::PhysicalConstants {
    units::PhysicalConstants::default()
}

#[pyclass(module = "eitfwm", from_py_object)]
#[derive(Clone)]
struct SystemParams {
    #[pyo3(get, set)]
    omega_c: f64,
    #[pyo3(get, set)]
    delta: f64,
    #[pyo3(get, set)]
    gamma21: f64,
    #[pyo3(get, set)]
    gamma31: f64,
    #[pyo3(get, set)]
    gamma41: f64,
    #[pyo3(get, set)]
    alpha: f64,
}

#[pymethods]
impl SystemParams {
    #[new]
    #[pyo3(signature = (omega_c, delta, alpha, gamma21=0.0, gamma31=1.0, gamma41=1.0))]
    fn new(omega_c: f64, delta: f64, alpha: f64, gamma21: f64, gamma31: f64, gamma41: f64) -> Self {
        Self {
            omega_c,
            delta,
            gamma21,
            gamma31,
            gamma41,
            alpha,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemParams(omega_c={}, delta={}, alpha={}, gamma21={}, gamma31={}, gamma41={})",
            self.omega_c, self.delta, self.alpha, self.gamma21, self.gamma31, self.gamma41
        )
    }
}

impl SystemParams {
    fn core(&self) -> fwm_core::SystemParams {
        fwm_core::SystemParams {
            omega_c: self.omega_c,
            delta: self.delta,
            gamma21: self.gamma21,
            gamma31: self.gamma31,
            gamma41: self.gamma41,
            alpha: self.alpha,
        }
    }
}

#[pyclass(module = "eitfwm", from_py_object)]
#[derive(Clone)]
struct PulseSpec {
    inner: fwm_core::PulseSpec,
}

#[pymethods]
impl PulseSpec {
    /// Flat-top pulse with raised-cosine edges of 10-90 % rise time `edge_time`.
    #[staticmethod]
    #[pyo3(signature = (peak_rabi, start_time, duration, edge_time=0.0))]
    fn square(peak_rabi: f64, start_time: f64, duration: f64, edge_time: f64) -> Self {
        Self {
            inner: fwm_core::PulseSpec::square(peak_rabi, start_time, duration, edge_time),
        }
    }

    #[staticmethod]
    fn gaussian(peak_rabi: f64, start_time: f64, fwhm: f64) -> Self {
        Self {
            inner: fwm_core::PulseSpec::gaussian(peak_rabi, start_time, fwhm),
        }
    }

    #[getter]
    fn peak_rabi(&self) -> f64 {
        self.inner.peak_rabi
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration
    }

    #[getter]
    fn start_time(&self) -> f64 {
        self.inner.start_time
    }

    fn amplitude(&self, t: f64) -> f64 {
        self.inner.amplitude(t)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(module = "eitfwm", from_py_object)]
#[derive(Clone)]
struct PropagationGrid {
    #[pyo3(get, set)]
    n_z: usize,
    #[pyo3(get, set)]
    dt: f64,
    #[pyo3(get, set)]
    t_max: Option<f64>,
}

#[pymethods]
impl PropagationGrid {
    #[new]
    #[pyo3(signature = (n_z=200, dt=0.05, t_max=None))]
    fn new(n_z: usize, dt: f64, t_max: Option<f64>) -> Self {
        Self { n_z, dt, t_max }
    }
}

impl PropagationGrid {
    fn core(&self) -> fwm_core::PropagationGrid {
        fwm_core::PropagationGrid {
            n_z: self.n_z,
            dt: self.dt,
            t_max: self.t_max,
        }
    }
}

#[pyclass(module = "eitfwm")]
struct PropagationResult {
    inner: fwm_core::PropagationResult,
}

#[pymethods]
impl PropagationResult {
    #[getter]
    fn conversion_efficiency(&self) -> f64 {
        self.inner.conversion_efficiency
    }

    #[getter]
    fn energy_transmission_probe(&self) -> f64 {
        self.inner.energy_transmission_probe
    }

    /// Centroid delay of the transmitted probe in Γ⁻¹.
    #[getter]
    fn probe_delay(&self) -> f64 {
        self.inner.probe_delay
    }

    /// (probe, signal) mean output power over the late flat top, or None.
    #[getter]
    fn plateau_transmissions(&self) -> Option<(f64, f64)> {
        self.inner.plateau_transmissions
    }

    fn times(&self) -> Vec<f64> {
        self.inner.probe_in.times().collect()
    }

    fn probe_in(&self) -> Vec<Complex64> {
        self.inner.probe_in.samples.clone()
    }

    fn probe_out(&self) -> Vec<Complex64> {
        self.inner.probe_out.samples.clone()
    }

    fn signal_out(&self) -> Vec<Complex64> {
        self.inner.signal_out.samples.clone()
    }

    /// Envelope CSV text with every `stride`-th sample.
    #[pyo3(signature = (stride=10))]
    fn to_csv(&self, stride: usize) -> PyResult<String> {
        trace::envelope_csv(&self.inner, &consts(), &[], stride).map_err(py_err)
    }
}

#[pyclass(module = "eitfwm", from_py_object)]
#[derive(Clone)]
struct Trace {
    inner: trace::Trace,
}

#[pymethods]
impl Trace {
    #[new]
    #[pyo3(signature = (time_us, probe_power, signal_power, probe_in_power=None))]
    fn new(
        time_us: Vec<f64>,
        probe_power: Vec<f64>,
        signal_power: Vec<f64>,
        probe_in_power: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let inner = trace::Trace::new(time_us, probe_power, signal_power, probe_in_power).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (result, stride=10))]
    fn from_result(result: &PropagationResult, stride: usize) -> Self {
        Self {
            inner: trace::Trace::from_result(&result.inner, &consts(), stride),
        }
    }

    #[getter]
    fn time_us(&self) -> Vec<f64> {
        self.inner.time_us.clone()
    }

    #[getter]
    fn probe_power(&self) -> Vec<f64> {
        self.inner.probe_power.clone()
    }

    #[getter]
    fn signal_power(&self) -> Vec<f64> {
        self.inner.signal_power.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn to_csv(&self) -> PyResult<String> {
        self.inner.to_csv_string(&[]).map_err(py_err)
    }
}

#[pyclass(module = "eitfwm")]
struct FitResult {
    inner: fitting::FitResult,
}

#[pymethods]
impl FitResult {
    #[getter]
    fn omega_d_hat(&self) -> f64 {
        self.inner.omega_d_hat
    }

    #[getter]
    fn gamma21_hat(&self) -> f64 {
        self.inner.gamma21_hat
    }

    #[getter]
    fn sse(&self) -> f64 {
        self.inner.sse
    }

    #[getter]
    fn n_evals(&self) -> usize {
        self.inner.n_evals
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn sensitivity(&self) -> (f64, f64) {
        (self.inner.sensitivity[0], self.inner.sensitivity[1])
    }

    fn to_kv_block(&self) -> String {
        self.inner.to_kv_block()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Closed-form steady state. Returns a dict with the transmissions and the
/// complex amplitude ratios.
#[pyfunction]
fn steady_state(
    py: Python<'_>,
    omega_c: f64,
    omega_d: f64,
    delta: f64,
    gamma31: f64,
    alpha: f64,
) -> PyResult<Py<PyAny>> {
    let s = steady::steady_state(&SteadyStateInputs {
        omega_c,
        omega_d,
        delta,
        gamma31,
        alpha,
    })
    .map_err(py_err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("probe_transmission", s.probe_transmission)?;
    d.set_item("signal_efficiency", s.signal_efficiency)?;
    d.set_item("probe_ratio", s.probe_ratio)?;
    d.set_item("signal_ratio", s.signal_ratio)?;
    Ok(d.into_any().unbind())
}

/// Peak intensity in mW/cm² of a field with Rabi frequency `rabi` Γ.
#[pyfunction]
fn rabi_to_intensity(rabi: f64) -> PyResult<f64> {
    units::rabi_to_intensity(rabi, &consts()).map_err(py_err)
}

#[pyfunction]
fn intensity_to_rabi(intensity: f64) -> PyResult<f64> {
    units::intensity_to_rabi(intensity, &consts()).map_err(py_err)
}

/// Photons per resonant cross section for `intensity` mW/cm² over `duration_us`.
#[pyfunction]
fn photons_per_atomic_cross_section(intensity: f64, duration_us: f64) -> PyResult<f64> {
    units::photons_per_atomic_cross_section(intensity, duration_us * 1e-6, &consts()).map_err(py_err)
}

#[pyfunction]
fn us_to_gamma_units(us: f64) -> f64 {
    consts().us_to_gamma_units(us)
}

#[pyfunction]
fn gamma_units_to_us(t: f64) -> f64 {
    consts().gamma_units_to_us(t)
}

/// Slow-light delay α γ31 / Ω_c² in μs.
#[pyfunction]
fn eit_delay_us(alpha: f64, gamma31: f64, omega_c: f64) -> PyResult<f64> {
    let t = units::eit_delay_gamma_units(alpha, gamma31, omega_c).map_err(py_err)?;
    Ok(consts().gamma_units_to_us(t))
}

#[pyfunction]
fn loss_parameter(alpha: f64, delta: f64, gamma31: f64) -> PyResult<f64> {
    harris_hau::loss_parameter(alpha, delta, gamma31).map_err(py_err)
}

#[pyfunction]
fn delay_ratio(t_delay: f64, t_probe: f64) -> PyResult<f64> {
    harris_hau::delay_ratio(t_delay, t_probe).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (n_drive_photons, cross_section_ratio, phi, eta=0.0, r=0.0))]
fn zeta(n_drive_photons: f64, cross_section_ratio: f64, phi: f64, eta: f64, r: f64) -> PyResult<f64> {
    harris_hau::zeta(&HarrisHauInputs {
        n_drive_photons,
        cross_section_ratio,
        phi,
        eta,
        r,
    })
    .map_err(py_err)
}

/// Propagates `probe` through the medium. `coupling=None` holds the coupling
/// at `params.omega_c`.
#[pyfunction]
#[pyo3(signature = (probe, driving, params, grid=None, coupling=None))]
fn propagate(
    py: Python<'_>,
    probe: &PulseSpec,
    driving: &PulseSpec,
    params: &SystemParams,
    grid: Option<PropagationGrid>,
    coupling: Option<PulseSpec>,
) -> PyResult<PropagationResult> {
    let grid = grid.map(|g| g.core()).unwrap_or_default();
    let coupling = coupling.map(|c| Coupling::Pulsed(c.inner)).unwrap_or_default();
    let (p, d, s) = (probe.inner, driving.inner, params.core());
    let inner = py
        .detach(|| propagator::propagate(&p, &coupling, &d, &s, &grid))
        .map_err(py_err)?;
    Ok(PropagationResult { inner })
}

#[pyfunction]
fn load_trace(path: PathBuf) -> PyResult<Trace> {
    Ok(Trace {
        inner: trace::load_trace(path).map_err(py_err)?,
    })
}

/// Fits (Ω_d, γ21) within the given bounds; `params.gamma21` and the
/// driving peak are ignored.
#[pyfunction]
#[pyo3(signature = (trace, params, probe, driving, omega_d_bounds, gamma21_bounds, grid=None, max_evals=300))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    trace: &Trace,
    params: &SystemParams,
    probe: &PulseSpec,
    driving: &PulseSpec,
    omega_d_bounds: (f64, f64),
    gamma21_bounds: (f64, f64),
    grid: Option<PropagationGrid>,
    max_evals: usize,
) -> PyResult<FitResult> {
    let grid = grid.map(|g| g.core()).unwrap_or_default();
    let model = TraceModel::new(
        FixedParams {
            omega_c: params.omega_c,
            delta: params.delta,
            gamma31: params.gamma31,
            gamma41: params.gamma41,
            alpha: params.alpha,
        },
        PulseSet {
            probe: probe.inner,
            coupling: Coupling::Constant,
            driving: driving.inner,
        },
        grid,
        consts(),
    )
    .map_err(py_err)?;
    let bounds = FitBounds {
        omega_d: omega_d_bounds,
        gamma21: gamma21_bounds,
    };
    let options = FitOptions {
        max_evals,
        ..FitOptions::default()
    };
    let t = &trace.inner;
    let inner = py
        .detach(|| fitting::fit(t, &model, &bounds, &options))
        .map_err(py_err)?;
    Ok(FitResult { inner })
}

/// Runs a configuration file and returns {file name: CSV text}.
#[pyfunction]
#[pyo3(signature = (path, analytic=false, grid_scale=None))]
fn run_config(path: PathBuf, analytic: bool, grid_scale: Option<f64>) -> PyResult<Vec<(String, String)>> {
    let config = ExperimentConfig::load(&path).map_err(py_err)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
    experiment::run_config(
        &config,
        &stem,
        &RunOptions {
            parallel: true,
            analytic,
            grid_scale,
        },
    )
    .map_err(py_err)
}

/// Runs a bundled figure configuration and writes its CSV files into `out_dir`.
#[pyfunction]
#[pyo3(signature = (figure, out_dir, grid_scale=None))]
fn reproduce_figure(figure: &str, out_dir: PathBuf, grid_scale: Option<f64>) -> PyResult<Vec<PathBuf>> {
    let id: FigureId = figure.parse().map_err(py_err)?;
    experiment::reproduce_figure(
        id,
        &out_dir,
        &RunOptions {
            grid_scale,
            ..RunOptions::default()
        },
    )
    .map_err(py_err)
}

#[pymodule]
fn eitfwm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SystemParams>()?;
    m.add_class::<PulseSpec>()?;
    m.add_class::<PropagationGrid>()?;
    m.add_class::<PropagationResult>()?;
    m.add_class::<Trace>()?;
    m.add_class::<FitResult>()?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(rabi_to_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(intensity_to_rabi, m)?)?;
    m.add_function(wrap_pyfunction!(photons_per_atomic_cross_section, m)?)?;
    m.add_function(wrap_pyfunction!(us_to_gamma_units, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_units_to_us, m)?)?;
    m.add_function(wrap_pyfunction!(eit_delay_us, m)?)?;
    m.add_function(wrap_pyfunction!(loss_parameter, m)?)?;
    m.add_function(wrap_pyfunction!(delay_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(load_trace, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_figure, m)?)?;
    Ok(())
}
