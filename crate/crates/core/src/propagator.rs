//! Pulsed propagation of the probe and generated signal through the medium.
//!
//! In the retarded frame t → t − z/c the field equations reduce to
//!
//! ```text
//! ∂Ω_p/∂z = i (α γ31 / 2) ρ31
//! ∂Ω_s/∂z = i (α γ41 / 2) ρ41
//! ```
//!
//! with z normalized to the medium length. The solver marches in z with the
//! explicit midpoint rule; at every slice (and at every half slice) the
//! coherences are integrated over the full time window by [`crate::bloch`].
//! The coupling and driving fields are treated as undepleted, so they are the
//! same function of retarded time at every slice.

use num_complex::Complex64;

use crate::bloch::{self, SystemParams};
use crate::error::{FwmError, Result};
use crate::pulse::{Coupling, PulseSpec};
use crate::units::eit_delay_gamma_units;

/// Largest `dz · α / 2` accepted for the z-march. α/2 bounds the field
/// attenuation rate per unit normalized length.
pub const Z_STEP_LIMIT: f64 = 1.0;

/// Extra time appended to the automatically chosen window, in Γ⁻¹.
const AUTO_WINDOW_MARGIN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationGrid {
    /// Number of z slices across the medium.
    pub n_z: usize,
    /// Time step in Γ⁻¹.
    pub dt: f64,
    /// End of the simulated window in Γ⁻¹. `None` selects the shortest window
    /// that contains the driving pulse plus twice the slow-light delay.
    pub t_max: Option<f64>,
}

impl Default for PropagationGrid {
    fn default() -> Self {
        Self {
            n_z: 200,
            dt: 0.05,
            t_max: None,
        }
    }
}

impl PropagationGrid {
    /// Refines the grid by `factor`: multiplies `n_z` and divides `dt`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(FwmError::config("grid_scale", format!("must be positive, got {factor}")));
        }
        Ok(Self {
            n_z: ((self.n_z as f64) * factor).round().max(2.0) as usize,
            dt: self.dt / factor,
            t_max: self.t_max,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_z < 2 {
            return Err(FwmError::config("grid.n_z", format!("must be at least 2, got {}", self.n_z)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(FwmError::config("grid.dt", format!("must be positive, got {}", self.dt)));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) || !t.is_finite() {
                return Err(FwmError::config("grid.t_max", format!("must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// A complex envelope sampled on the uniform grid `t0 + k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldEnvelope {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Complex64>,
}

impl FieldEnvelope {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    pub fn powers(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|z| z.norm_sqr())
    }

    /// ∫|Ω|² dt by the trapezoidal rule.
    pub fn energy(&self) -> f64 {
        trapezoid(self.powers(), self.len(), self.dt)
    }

    /// Energy-weighted mean time.
    pub fn centroid(&self) -> Result<f64> {
        let energy = self.energy();
        if !(energy > 0.0) {
            return Err(FwmError::domain("centroid of a zero-energy envelope"));
        }
        let weighted = trapezoid(
            self.powers().enumerate().map(|(k, p)| p * self.time(k)),
            self.len(),
            self.dt,
        );
        Ok(weighted / energy)
    }

    pub fn peak_power(&self) -> f64 {
        self.powers().fold(0.0, f64::max)
    }
}

fn trapezoid(values: impl Iterator<Item = f64>, n: usize, dt: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let sum: f64 = values
        .enumerate()
        .map(|(k, v)| if k == 0 || k == n - 1 { 0.5 * v } else { v })
        .sum();
    sum * dt
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverMetadata {
    pub n_z: usize,
    pub dt: f64,
    pub t_max: f64,
    pub probe_edge_time: f64,
    pub driving_edge_time: f64,
    /// How `conversion_efficiency` is defined; always `"energy_ratio"`.
    pub efficiency_definition: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub probe_in: FieldEnvelope,
    pub probe_out: FieldEnvelope,
    pub signal_out: FieldEnvelope,
    pub energy_transmission_probe: f64,
    pub conversion_efficiency: f64,
    /// Centroid delay of the transmitted probe, in Γ⁻¹.
    pub probe_delay: f64,
    /// Mean (probe, signal) output power over the end of the probe's flat top,
    /// normalized to the incident peak power. `None` for Gaussian probes or
    /// when the flat top is too short.
    pub plateau_transmissions: Option<(f64, f64)>,
    pub metadata: SolverMetadata,
}

/// Slow-light delay estimate used for window sizing, in Γ⁻¹.
fn window_delay(params: &SystemParams, coupling: &Coupling) -> Result<f64> {
    let omega_c = match coupling {
        Coupling::Constant => params.omega_c,
        Coupling::Pulsed(p) => p.peak_rabi,
    };
    eit_delay_gamma_units(params.alpha, params.gamma31, omega_c).map_err(|_| {
        FwmError::config(
            "grid.t_max",
            "coupling field is zero, so the slow-light delay is unbounded; set t_max explicitly",
        )
    })
}

/// Resolves the simulated window for these pulses, checking an explicit
/// `t_max` against the required coverage.
pub fn resolve_t_max(
    probe: &PulseSpec,
    coupling: &Coupling,
    driving: &PulseSpec,
    params: &SystemParams,
    grid: &PropagationGrid,
) -> Result<f64> {
    let last_edge = probe.end_time().max(driving.end_time());
    match grid.t_max {
        Some(t_max) => {
            let delay = window_delay(params, coupling).unwrap_or(0.0);
            let required = last_edge + 2.0 * delay;
            if t_max < required {
                return Err(FwmError::config(
                    "grid.t_max",
                    format!(
                        "{t_max} does not cover the pulses plus twice the slow-light delay ({required:.3} Γ⁻¹)"
                    ),
                ));
            }
            Ok(t_max)
        }
        None => Ok(last_edge + 2.0 * window_delay(params, coupling)? + AUTO_WINDOW_MARGIN),
    }
}

fn sample(pulse: &PulseSpec, n: usize, dt: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::new(pulse.amplitude(k as f64 * dt), 0.0))
        .collect()
}

/// Propagates the probe through the medium and returns the transmitted probe
/// and generated signal envelopes at the exit face.
///
/// The signal is zero at the entrance. The probe enters with the real
/// envelope of `probe`; scaling it by any complex constant scales both outputs
/// by the same constant.
pub fn propagate(
    probe: &PulseSpec,
    coupling: &Coupling,
    driving: &PulseSpec,
    params: &SystemParams,
    grid: &PropagationGrid,
) -> Result<PropagationResult> {
    let probe_in = probe_input(probe, coupling, driving, params, grid)?;
    propagate_envelope(probe_in, probe, coupling, driving, params, grid)
}

fn probe_input(
    probe: &PulseSpec,
    coupling: &Coupling,
    driving: &PulseSpec,
    params: &SystemParams,
    grid: &PropagationGrid,
) -> Result<FieldEnvelope> {
    params.validate()?;
    grid.validate()?;
    probe.validate("probe")?;
    driving.validate("driving")?;
    if let Coupling::Pulsed(c) = coupling {
        c.validate("coupling")?;
    }
    if probe.peak_rabi == 0.0 {
        return Err(FwmError::domain("probe peak Rabi frequency is zero"));
    }
    let t_max = resolve_t_max(probe, coupling, driving, params, grid)?;
    let n_t = (t_max / grid.dt).ceil() as usize + 1;
    Ok(FieldEnvelope {
        t0: 0.0,
        dt: grid.dt,
        samples: sample(probe, n_t, grid.dt),
    })
}

/// As [`propagate`], but with an arbitrary complex input probe sampled on the
/// grid. `shape_hint` only supplies the plateau window and metadata.
pub fn propagate_envelope(
    probe_in: FieldEnvelope,
    shape_hint: &PulseSpec,
    coupling: &Coupling,
    driving: &PulseSpec,
    params: &SystemParams,
    grid: &PropagationGrid,
) -> Result<PropagationResult> {
    params.validate()?;
    grid.validate()?;
    let n_t = probe_in.len();
    let dt = grid.dt;
    if n_t < 2 || (probe_in.dt - dt).abs() > 1e-12 * dt {
        return Err(FwmError::config("probe", "input envelope does not match the time grid"));
    }

    let coupling_t: Vec<Complex64> = match coupling {
        Coupling::Constant => vec![Complex64::new(params.omega_c, 0.0); n_t],
        Coupling::Pulsed(p) => sample(p, n_t, dt),
    };
    let driving_t = sample(driving, n_t, dt);

    let max_c = coupling_t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_d = driving_t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dt_limit = bloch::max_stable_dt(params, max_c, max_d);
    if dt > dt_limit {
        return Err(FwmError::config(
            "grid.dt",
            format!("{dt} exceeds the RK4 stability bound {dt_limit:.4} Γ⁻¹"),
        ));
    }
    let h = 1.0 / grid.n_z as f64;
    if h * params.alpha / 2.0 > Z_STEP_LIMIT {
        return Err(FwmError::config(
            "grid.n_z",
            format!(
                "{} slices are too few for optical depth {}; need at least {}",
                grid.n_z,
                params.alpha,
                (params.alpha / (2.0 * Z_STEP_LIMIT)).ceil()
            ),
        ));
    }

    let kp = Complex64::new(0.0, params.alpha * params.gamma31 / 2.0);
    let ks = Complex64::new(0.0, params.alpha * params.gamma41 / 2.0);

    let zero = Complex64::new(0.0, 0.0);
    let mut p = probe_in.samples.clone();
    let mut s = vec![zero; n_t];
    let mut p_mid = vec![zero; n_t];
    let mut s_mid = vec![zero; n_t];
    let mut r31 = vec![zero; n_t];
    let mut r41 = vec![zero; n_t];

    for slice in 0..grid.n_z {
        bloch::integrate_slice(params, dt, &p, &s, &coupling_t, &driving_t, &mut r31, &mut r41);
        for k in 0..n_t {
            p_mid[k] = p[k] + kp * r31[k] * (0.5 * h);
            s_mid[k] = s[k] + ks * r41[k] * (0.5 * h);
        }
        bloch::integrate_slice(params, dt, &p_mid, &s_mid, &coupling_t, &driving_t, &mut r31, &mut r41);
        for k in 0..n_t {
            p[k] = bloch::flush(p[k] + kp * r31[k] * h);
            s[k] = bloch::flush(s[k] + ks * r41[k] * h);
        }
        if let Some(step) = (0..n_t).find(|&k| !(p[k].is_finite() && s[k].is_finite())) {
            return Err(FwmError::NumericalBlowup { slice, step });
        }
    }

    let probe_out = FieldEnvelope {
        t0: probe_in.t0,
        dt,
        samples: p,
    };
    let signal_out = FieldEnvelope {
        t0: probe_in.t0,
        dt,
        samples: s,
    };
    let plateau_transmissions = plateau(shape_hint, &probe_in, &probe_out, &signal_out);
    let mut result = PropagationResult {
        energy_transmission_probe: 0.0,
        conversion_efficiency: 0.0,
        probe_delay: 0.0,
        plateau_transmissions,
        metadata: SolverMetadata {
            n_z: grid.n_z,
            dt,
            t_max: probe_in.time(n_t - 1),
            probe_edge_time: shape_hint.edge_time,
            driving_edge_time: driving.edge_time,
            efficiency_definition: "energy_ratio",
        },
        probe_in,
        probe_out,
        signal_out,
    };
    result.conversion_efficiency = conversion_efficiency(&result)?;
    result.energy_transmission_probe = result.probe_out.energy() / result.probe_in.energy();
    result.probe_delay = probe_delay(&result).unwrap_or(f64::NAN);
    Ok(result)
}

/// Mean normalized output powers over the last quarter of the probe's flat
/// top.
fn plateau(
    probe: &PulseSpec,
    probe_in: &FieldEnvelope,
    probe_out: &FieldEnvelope,
    signal_out: &FieldEnvelope,
) -> Option<(f64, f64)> {
    let (flat_start, flat_end) = probe.flat_top()?;
    let from = (probe.start_time + 0.75 * probe.duration).max(flat_start);
    let peak = probe_in.peak_power();
    if !(peak > 0.0) {
        return None;
    }
    let idx: Vec<usize> = (0..probe_in.len())
        .filter(|&k| {
            let t = probe_in.time(k);
            t >= from && t <= flat_end
        })
        .collect();
    if idx.len() < 10 {
        return None;
    }
    let mean = |env: &FieldEnvelope| idx.iter().map(|&k| env.samples[k].norm_sqr()).sum::<f64>() / idx.len() as f64;
    Some((mean(probe_out) / peak, mean(signal_out) / peak))
}

/// ∫|Ω_s,out|² dt / ∫|Ω_p,in|² dt.
pub fn conversion_efficiency(result: &PropagationResult) -> Result<f64> {
    let input = result.probe_in.energy();
    if !(input > 0.0) {
        return Err(FwmError::domain("incident probe carries no energy"));
    }
    Ok(result.signal_out.energy() / input)
}

/// Centroid delay of the transmitted probe relative to the incident probe, in
/// Γ⁻¹.
pub fn probe_delay(result: &PropagationResult) -> Result<f64> {
    Ok(result.probe_out.centroid()? - result.probe_in.centroid()?)
}
