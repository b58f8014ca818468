//! Least-squares recovery of (Ω_d, γ21) from probe and signal traces.
//!
//! The search runs in scaled coordinates on the unit box: Ω_d linearly,
//! γ21 logarithmically. A coarse grid scan picks the starting vertex for a
//! bounded Nelder-Mead simplex.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::bloch::SystemParams;
use crate::error::{FwmError, Result};
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::propagator::{self, PropagationGrid};
use crate::pulse::{Coupling, PulseSpec};
use crate::trace::{format_sig9, Trace};
use crate::units::PhysicalConstants;

/// System parameters held fixed during a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParams {
    pub omega_c: f64,
    pub delta: f64,
    pub gamma31: f64,
    pub gamma41: f64,
    pub alpha: f64,
}

impl FixedParams {
    pub fn with(&self, gamma21: f64) -> SystemParams {
        SystemParams {
            omega_c: self.omega_c,
            delta: self.delta,
            gamma21,
            gamma31: self.gamma31,
            gamma41: self.gamma41,
            alpha: self.alpha,
        }
    }
}

/// Pulse timing of the measurement. The driving peak is replaced by the
/// trial Ω_d at every evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSet {
    pub probe: PulseSpec,
    pub coupling: Coupling,
    pub driving: PulseSpec,
}

/// Closed intervals for Ω_d and γ21. A zero-width interval fixes the parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitBounds {
    pub omega_d: (f64, f64),
    pub gamma21: (f64, f64),
}

impl FitBounds {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.omega_d;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(FwmError::config("fit.omega_d", format!("invalid bounds [{lo}, {hi}]")));
        }
        let (lo, hi) = self.gamma21;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(FwmError::config("fit.gamma21", format!("invalid bounds [{lo}, {hi}]")));
        }
        if lo < hi && lo == 0.0 {
            return Err(FwmError::config(
                "fit.gamma21",
                "lower bound must be positive for the logarithmic search",
            ));
        }
        Ok(())
    }

    fn free_dims(&self) -> Vec<usize> {
        let mut dims = Vec::new();
        if self.omega_d.0 < self.omega_d.1 {
            dims.push(0);
        }
        if self.gamma21.0 < self.gamma21.1 {
            dims.push(1);
        }
        dims
    }

    /// Maps scaled coordinates in [0, 1]² to (Ω_d, γ21).
    fn unscale(&self, u: [f64; 2]) -> (f64, f64) {
        let (a, b) = self.omega_d;
        let omega_d = a + u[0] * (b - a);
        let (c, d) = self.gamma21;
        let gamma21 = if c < d {
            (c.ln() + u[1] * (d.ln() - c.ln())).exp()
        } else {
            c
        };
        (omega_d, gamma21)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_evals: usize,
    /// Simplex diameter in scaled coordinates at which the fit is converged.
    pub tolerance: f64,
    /// Grid points per free parameter in the initial scan.
    pub scan_points: usize,
    pub initial_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_evals: 300,
            tolerance: 1e-4,
            scan_points: 5,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub omega_d_hat: f64,
    pub gamma21_hat: f64,
    pub sse: f64,
    /// Objective evaluations, including the scan and the curvature probes.
    pub n_evals: usize,
    pub converged: bool,
    /// Second derivative of the SSE in scaled coordinates, per parameter.
    /// Zero for a fixed parameter.
    pub sensitivity: [f64; 2],
}

impl FitResult {
    pub const CSV_HEADER: &'static str =
        "omega_d_hat,gamma21_hat,sse,n_evals,converged,sensitivity_omega_d,sensitivity_gamma21";

    pub fn to_kv_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "omega_d_hat={}", format_sig9(self.omega_d_hat));
        let _ = writeln!(s, "gamma21_hat={}", format_sig9(self.gamma21_hat));
        let _ = writeln!(s, "sse={}", format_sig9(self.sse));
        let _ = writeln!(s, "n_evals={}", self.n_evals);
        let _ = writeln!(s, "converged={}", self.converged);
        let _ = writeln!(s, "sensitivity_omega_d={}", format_sig9(self.sensitivity[0]));
        let _ = writeln!(s, "sensitivity_gamma21={}", format_sig9(self.sensitivity[1]));
        s
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            format_sig9(self.omega_d_hat),
            format_sig9(self.gamma21_hat),
            format_sig9(self.sse),
            self.n_evals,
            self.converged,
            format_sig9(self.sensitivity[0]),
            format_sig9(self.sensitivity[1]),
        )
    }
}

/// Simulated output powers on the propagation grid, normalized to the incident
/// probe peak.
#[derive(Debug)]
struct Simulated {
    dt: f64,
    probe: Vec<f64>,
    signal: Vec<f64>,
}

impl Simulated {
    fn at(values: &[f64], dt: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let x = t / dt;
        let k = x.floor() as usize;
        if k + 1 >= values.len() {
            return *values.last().unwrap_or(&0.0);
        }
        let w = x - k as f64;
        values[k] * (1.0 - w) + values[k + 1] * w
    }
}

type CacheKey = (u64, u64, u64);

/// The forward model of a fit: fixed parameters, pulses and grid, with a
/// cache of simulated traces keyed by (Ω_d, γ21, window).
///
/// A model can be shared across fits to traces with the same pulses.
#[derive(Debug)]
pub struct TraceModel {
    pub fixed: FixedParams,
    pub pulses: PulseSet,
    pub grid: PropagationGrid,
    pub consts: PhysicalConstants,
    cache: Mutex<HashMap<CacheKey, Arc<Simulated>>>,
}

impl TraceModel {
    pub fn new(
        fixed: FixedParams,
        pulses: PulseSet,
        grid: PropagationGrid,
        consts: PhysicalConstants,
    ) -> Result<Self> {
        fixed.with(0.0).validate()?;
        grid.validate()?;
        consts.validate()?;
        pulses.probe.validate("probe")?;
        pulses.driving.validate("driving")?;
        if let Coupling::Pulsed(c) = &pulses.coupling {
            c.validate("coupling")?;
        }
        Ok(Self {
            fixed,
            pulses,
            grid,
            consts,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Number of distinct simulations held in the cache.
    pub fn cached_runs(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }

    fn window(&self, trace_end: f64) -> Result<f64> {
        let params = self.fixed.with(0.0);
        let auto = propagator::resolve_t_max(
            &self.pulses.probe,
            &self.pulses.coupling,
            &self.pulses.driving,
            &params,
            &self.grid,
        )?;
        Ok(auto.max(trace_end))
    }

    fn simulate(&self, omega_d: f64, gamma21: f64, t_max: f64) -> Result<Arc<Simulated>> {
        let key = (omega_d.to_bits(), gamma21.to_bits(), t_max.to_bits());
        if let Some(hit) = self.cache.lock().ok().and_then(|c| c.get(&key).cloned()) {
            return Ok(hit);
        }
        let driving = PulseSpec {
            peak_rabi: omega_d,
            ..self.pulses.driving
        };
        let grid = PropagationGrid {
            t_max: Some(t_max),
            ..self.grid
        };
        let result = propagator::propagate(
            &self.pulses.probe,
            &self.pulses.coupling,
            &driving,
            &self.fixed.with(gamma21),
            &grid,
        )?;
        let peak = result.probe_in.peak_power();
        let sim = Arc::new(Simulated {
            dt: result.probe_out.dt,
            probe: result.probe_out.powers().map(|p| p / peak).collect(),
            signal: result.signal_out.powers().map(|p| p / peak).collect(),
        });
        if let Ok(mut c) = self.cache.lock() {
            c.insert(key, sim.clone());
        }
        Ok(sim)
    }

    fn check_coverage(&self, trace: &Trace) -> Result<()> {
        let first = self.consts.us_to_gamma_units(trace.time_us[0]);
        let last = self.consts.us_to_gamma_units(*trace.time_us.last().unwrap());
        let probe = &self.pulses.probe;
        if first > probe.start_time || last < probe.end_time() {
            return Err(FwmError::config(
                "trace",
                format!(
                    "trace spans [{:.4}, {:.4}] us but the probe occupies [{:.4}, {:.4}] us",
                    trace.time_us[0],
                    trace.time_us.last().unwrap(),
                    self.consts.gamma_units_to_us(probe.start_time),
                    self.consts.gamma_units_to_us(probe.end_time()),
                ),
            ));
        }
        Ok(())
    }

    /// Σ_t (probe_sim − probe_meas)² + (signal_sim − signal_meas)² with
    /// the trace normalized to its incident peak.
    pub fn sse(&self, trace: &Trace, omega_d: f64, gamma21: f64) -> Result<f64> {
        trace.validate()?;
        self.check_coverage(trace)?;
        let prepared = Prepared::new(self, trace)?;
        prepared.sse(omega_d, gamma21)
    }
}

/// A trace converted to Γ⁻¹ and normalized, ready for repeated evaluation.
struct Prepared<'a> {
    model: &'a TraceModel,
    t: Vec<f64>,
    probe: Vec<f64>,
    signal: Vec<f64>,
    t_max: f64,
}

impl<'a> Prepared<'a> {
    fn new(model: &'a TraceModel, trace: &Trace) -> Result<Self> {
        let t: Vec<f64> = trace.time_us.iter().map(|&u| model.consts.us_to_gamma_units(u)).collect();
        let t_max = model.window(*t.last().unwrap())?;
        let (probe, signal) = trace.normalized_powers();
        Ok(Self {
            model,
            t,
            probe,
            signal,
            t_max,
        })
    }

    fn sse(&self, omega_d: f64, gamma21: f64) -> Result<f64> {
        let sim = self.model.simulate(omega_d, gamma21, self.t_max)?;
        let mut total = 0.0;
        for ((&t, &p), &s) in self.t.iter().zip(&self.probe).zip(&self.signal) {
            let dp = Simulated::at(&sim.probe, sim.dt, t) - p;
            let ds = Simulated::at(&sim.signal, sim.dt, t) - s;
            total += dp * dp + ds * ds;
        }
        Ok(total)
    }
}

fn embed(dims: &[usize], x: &[f64]) -> [f64; 2] {
    let mut u = [0.0; 2];
    for (&d, &v) in dims.iter().zip(x) {
        u[d] = v;
    }
    u
}

/// Fits (Ω_d, γ21) to `trace` within `bounds`.
///
/// Running out of evaluations is not an error: the best point found is
/// returned with `converged = false`.
pub fn fit(trace: &Trace, model: &TraceModel, bounds: &FitBounds, options: &FitOptions) -> Result<FitResult> {
    trace.validate()?;
    bounds.validate()?;
    if options.max_evals == 0 {
        return Err(FwmError::config("fit.max_evals", "must be positive"));
    }
    if !(options.tolerance > 0.0) {
        return Err(FwmError::config("fit.tolerance", "must be positive"));
    }
    model.check_coverage(trace)?;
    let prepared = Prepared::new(model, trace)?;
    let dims = bounds.free_dims();
    let objective = |x: &[f64]| -> Result<f64> {
        let (omega_d, gamma21) = bounds.unscale(embed(&dims, x));
        prepared.sse(omega_d, gamma21)
    };

    // coarse scan for the starting vertex
    let n = options.scan_points.max(1);
    let levels: Vec<f64> = if n == 1 {
        vec![0.5]
    } else {
        (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
    };
    let mut starts: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in &dims {
        starts = starts
            .into_iter()
            .flat_map(|s| {
                levels.iter().map(move |&l| {
                    let mut v = s.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    let scanned: Vec<f64> = starts
        .par_iter()
        .map(|x| objective(x))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, v) in scanned.iter().enumerate() {
        if *v < scanned[best] {
            best = k;
        }
    }

    let nm = nelder_mead::minimize(
        objective,
        &starts[best],
        &NelderMeadOptions {
            max_evals: options.max_evals,
            tolerance: options.tolerance,
            initial_step: options.initial_step,
        },
    )?;
    let mut n_evals = scanned.len() + nm.n_evals;
    let (x, sse) = if scanned[best] < nm.value {
        (starts[best].clone(), scanned[best])
    } else {
        (nm.x, nm.value)
    };

    let mut sensitivity = [0.0; 2];
    const H: f64 = 0.01;
    for (i, &d) in dims.iter().enumerate() {
        let at = |offset: f64| -> Result<f64> {
            let mut y = x.clone();
            y[i] += offset;
            objective(&y)
        };
        let curvature = if x[i] - H < 0.0 {
            let (f1, f2) = (at(H)?, at(2.0 * H)?);
            (f2 - 2.0 * f1 + sse) / (H * H)
        } else if x[i] + H > 1.0 {
            let (f1, f2) = (at(-H)?, at(-2.0 * H)?);
            (f2 - 2.0 * f1 + sse) / (H * H)
        } else {
            let (fm, fp) = (at(-H)?, at(H)?);
            (fp - 2.0 * sse + fm) / (H * H)
        };
        n_evals += 2;
        sensitivity[d] = curvature;
    }

    let (omega_d_hat, gamma21_hat) = bounds.unscale(embed(&dims, &x));
    Ok(FitResult {
        omega_d_hat,
        gamma21_hat,
        sse,
        n_evals,
        converged: nm.converged,
        sensitivity,
    })
}
