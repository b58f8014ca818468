//! Experiment configuration files, single runs, sweeps and the bundled
//! figure setups.
//!
//! A configuration is TOML with rates in Γ and durations in μs:
//!
//! ```toml
//! [params]
//! omega_c = 0.32
//! omega_d = 0.35
//! delta = 13.0
//! gamma21 = 9e-4
//! gamma31 = 1.25
//! gamma41 = 1.25
//! alpha = 42.0
//!
//! [probe]
//! start_us = 0.5
//! duration_us = 50.0
//! edge_us = 0.5
//!
//! [driving]
//! start_us = 0.5
//! duration_us = 70.0
//! edge_us = 0.5
//!
//! [grid]
//! n_z = 200
//! dt = 0.05          # Γ⁻¹
//!
//! [sweep]
//! variable = "omega_d"
//! values = [0.1, 0.2, 0.3]
//! ```
//!
//! The driving peak is `params.omega_d`; a `[coupling]` section switches the
//! coupling field from constant to pulsed with peak `params.omega_c`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bloch::SystemParams;
use crate::error::{FwmError, Result};
use crate::fitting::{self, FitBounds, FitOptions, FitResult, FixedParams, PulseSet, TraceModel};
use crate::propagator::{self, PropagationGrid, PropagationResult};
use crate::pulse::{Coupling, PulseShape, PulseSpec};
use crate::steady::{self, SteadyStateInputs};
use crate::trace::{self, format_sig9, Trace};
use crate::units::PhysicalConstants;

/// Upper limit on efficiencies and transmissions accepted from a sweep point.
pub const PASSIVITY_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub omega_c: f64,
    pub omega_d: f64,
    pub delta: f64,
    pub gamma21: f64,
    pub gamma31: f64,
    pub gamma41: f64,
    pub alpha: f64,
}

fn default_shape() -> PulseShape {
    PulseShape::SquareSmoothEdges
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(default = "default_shape")]
    pub shape: PulseShape,
    /// Probe only; the driving and coupling peaks come from `[params]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_rabi: Option<f64>,
    pub start_us: f64,
    /// Full length of a square pulse, intensity FWHM of a Gaussian.
    pub duration_us: f64,
    /// 10–90 % rise time of a square pulse.
    #[serde(default)]
    pub edge_us: f64,
}

impl PulseSection {
    fn spec(&self, peak: f64, consts: &PhysicalConstants) -> PulseSpec {
        PulseSpec {
            shape: self.shape,
            peak_rabi: peak,
            duration: consts.us_to_gamma_units(self.duration_us),
            edge_time: consts.us_to_gamma_units(self.edge_us),
            start_time: consts.us_to_gamma_units(self.start_us),
        }
    }
}

fn default_n_z() -> usize {
    PropagationGrid::default().n_z
}

fn default_dt() -> f64 {
    PropagationGrid::default().dt
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_n_z")]
    pub n_z: usize,
    /// Time step in Γ⁻¹.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_us: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_z: default_n_z(),
            dt: default_dt(),
            t_max_us: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    OmegaC,
    OmegaD,
    Delta,
    Gamma21,
    Gamma31,
    Alpha,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::OmegaC => "omega_c",
            SweepVariable::OmegaD => "omega_d",
            SweepVariable::Delta => "delta",
            SweepVariable::Gamma21 => "gamma21",
            SweepVariable::Gamma31 => "gamma31",
            SweepVariable::Alpha => "alpha",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Evaluate the closed-form steady state instead of propagating pulses.
    #[serde(default)]
    pub analytic: bool,
}

/// Repeats the whole run (or sweep) once per value, e.g. one curve per γ21.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSection {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

fn default_max_evals() -> usize {
    FitOptions::default().max_evals
}

fn default_tolerance() -> f64 {
    FitOptions::default().tolerance
}

fn default_scan_points() -> usize {
    FitOptions::default().scan_points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Trace CSV, relative paths resolved against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    pub omega_d_min: f64,
    pub omega_d_max: f64,
    pub gamma21_min: f64,
    pub gamma21_max: f64,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Write every `stride`-th time sample of an envelope.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: None,
            stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub params: ParamsSection,
    pub probe: PulseSection,
    pub driving: PulseSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<PulseSection>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    #[serde(default)]
    pub output: OutputSection,
}

const DEFAULT_PROBE_PEAK: f64 = 0.01;

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            FwmError::config("config", e.message().to_string() + &location(text, e.span()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| FwmError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FwmError::config("config", e.to_string()))
    }

    /// SHA-256 of the canonical serialization, as lowercase hex.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml_string()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        self.system_params().validate().map_err(|e| match e {
            FwmError::Config { field, message } => FwmError::config(format!("params.{field}"), message),
            other => other,
        })?;
        if !(p.omega_d >= 0.0) || !p.omega_d.is_finite() {
            return Err(FwmError::config("params.omega_d", "must be finite and non-negative"));
        }
        if p.omega_c < 0.0 {
            return Err(FwmError::config("params.omega_c", "must be non-negative"));
        }
        if p.alpha < 0.0 {
            return Err(FwmError::config("params.alpha", "must be non-negative"));
        }
        let consts = PhysicalConstants::default();
        self.probe_spec(&consts).validate("probe")?;
        if let Some(peak) = self.probe.peak_rabi {
            if !(peak > 0.0) || !peak.is_finite() {
                return Err(FwmError::config("probe.peak_rabi", "must be positive"));
            }
        }
        for (name, section) in [("driving", Some(&self.driving)), ("coupling", self.coupling.as_ref())] {
            if let Some(s) = section {
                if s.peak_rabi.is_some() {
                    return Err(FwmError::config(
                        format!("{name}.peak_rabi"),
                        "set the peak in [params] instead",
                    ));
                }
                s.spec(1.0, &consts).validate(name)?;
            }
        }
        self.grid(&consts).validate()?;
        if let Some(t) = self.grid.t_max_us {
            if !(t > 0.0) || !t.is_finite() {
                return Err(FwmError::config("grid.t_max_us", "must be positive"));
            }
        }
        if let Some(s) = &self.sweep {
            check_values("sweep.values", &s.values)?;
        }
        if let Some(s) = &self.series {
            check_values("series.values", &s.values)?;
            if self.sweep.as_ref().is_some_and(|w| w.variable == s.variable) {
                return Err(FwmError::config("series.variable", "must differ from sweep.variable"));
            }
        }
        if let Some(f) = &self.fit {
            f.bounds().validate()?;
            if f.max_evals == 0 {
                return Err(FwmError::config("fit.max_evals", "must be positive"));
            }
            if !(f.tolerance > 0.0) {
                return Err(FwmError::config("fit.tolerance", "must be positive"));
            }
        }
        if self.output.stride == 0 {
            return Err(FwmError::config("output.stride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn system_params(&self) -> SystemParams {
        let p = &self.params;
        SystemParams {
            omega_c: p.omega_c,
            delta: p.delta,
            gamma21: p.gamma21,
            gamma31: p.gamma31,
            gamma41: p.gamma41,
            alpha: p.alpha,
        }
    }

    pub fn probe_spec(&self, consts: &PhysicalConstants) -> PulseSpec {
        self.probe
            .spec(self.probe.peak_rabi.unwrap_or(DEFAULT_PROBE_PEAK), consts)
    }

    pub fn driving_spec(&self, consts: &PhysicalConstants) -> PulseSpec {
        self.driving.spec(self.params.omega_d, consts)
    }

    pub fn coupling(&self, consts: &PhysicalConstants) -> Coupling {
        match &self.coupling {
            None => Coupling::Constant,
            Some(c) => Coupling::Pulsed(c.spec(self.params.omega_c, consts)),
        }
    }

    pub fn grid(&self, consts: &PhysicalConstants) -> PropagationGrid {
        PropagationGrid {
            n_z: self.grid.n_z,
            dt: self.grid.dt,
            t_max: self.grid.t_max_us.map(|t| consts.us_to_gamma_units(t)),
        }
    }

    /// Multiplies `n_z` and `1/dt` by `factor`.
    pub fn with_grid_scale(&self, factor: f64) -> Result<Self> {
        let scaled = PropagationGrid {
            n_z: self.grid.n_z,
            dt: self.grid.dt,
            t_max: None,
        }
        .scaled(factor)?;
        let mut out = self.clone();
        out.grid.n_z = scaled.n_z;
        out.grid.dt = scaled.dt;
        Ok(out)
    }

    /// A copy with one parameter replaced.
    pub fn with_value(&self, variable: SweepVariable, value: f64) -> Self {
        let mut out = self.clone();
        let p = &mut out.params;
        match variable {
            SweepVariable::OmegaC => p.omega_c = value,
            SweepVariable::OmegaD => p.omega_d = value,
            SweepVariable::Delta => p.delta = value,
            SweepVariable::Gamma21 => p.gamma21 = value,
            SweepVariable::Gamma31 => p.gamma31 = value,
            SweepVariable::Alpha => p.alpha = value,
        }
        out
    }

    /// One configuration per series value, without the series block.
    /// A config without a series yields itself.
    pub fn expand_series(&self) -> Vec<(Option<(SweepVariable, f64)>, ExperimentConfig)> {
        match &self.series {
            None => vec![(None, self.clone())],
            Some(s) => s
                .values
                .iter()
                .map(|&v| {
                    let mut c = self.with_value(s.variable, v);
                    c.series = None;
                    (Some((s.variable, v)), c)
                })
                .collect(),
        }
    }

    /// `# key=value` header lines describing this configuration.
    pub fn provenance(&self) -> Result<Vec<(String, String)>> {
        let mut lines = vec![
            ("generator".to_string(), format!("fwm-core {}", env!("CARGO_PKG_VERSION"))),
            ("config_hash".to_string(), self.hash()?),
        ];
        if let Some(d) = &self.description {
            lines.push(("description".to_string(), d.replace('\n', " ")));
        }
        let p = &self.params;
        for (k, v) in [
            ("omega_c", p.omega_c),
            ("omega_d", p.omega_d),
            ("delta", p.delta),
            ("gamma21", p.gamma21),
            ("gamma31", p.gamma31),
            ("gamma41", p.gamma41),
            ("alpha", p.alpha),
        ] {
            lines.push((k.to_string(), v.to_string()));
        }
        lines.push(("grid_n_z".to_string(), self.grid.n_z.to_string()));
        lines.push(("grid_dt".to_string(), self.grid.dt.to_string()));
        Ok(lines)
    }
}

impl FitSection {
    pub fn bounds(&self) -> FitBounds {
        FitBounds {
            omega_d: (self.omega_d_min, self.omega_d_max),
            gamma21: (self.gamma21_min, self.gamma21_max),
        }
    }

    pub fn options(&self) -> FitOptions {
        FitOptions {
            max_evals: self.max_evals,
            tolerance: self.tolerance,
            scan_points: self.scan_points,
            ..FitOptions::default()
        }
    }
}

fn check_values(field: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(FwmError::config(field, "list is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(FwmError::config(field, format!("non-finite value {v}")));
    }
    Ok(())
}

fn location(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

/// A single propagation and its envelope CSV.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub result: PropagationResult,
    pub csv: String,
}

impl SingleRun {
    pub fn summary(&self, consts: &PhysicalConstants) -> String {
        let r = &self.result;
        let mut s = format!(
            "conversion_efficiency={}\nenergy_transmission_probe={}\nprobe_delay_us={}\n",
            format_sig9(r.conversion_efficiency),
            format_sig9(r.energy_transmission_probe),
            format_sig9(consts.gamma_units_to_us(r.probe_delay)),
        );
        if let Some((p, sig)) = r.plateau_transmissions {
            s += &format!("plateau_probe={}\nplateau_signal={}\n", format_sig9(p), format_sig9(sig));
        }
        s
    }
}

/// Propagates the pulses of a configuration without a sweep block.
pub fn run_single(config: &ExperimentConfig) -> Result<SingleRun> {
    config.validate()?;
    if config.sweep.is_some() {
        return Err(FwmError::config("sweep", "a sweep configuration needs run_sweep"));
    }
    let consts = PhysicalConstants::default();
    let result = propagator::propagate(
        &config.probe_spec(&consts),
        &config.coupling(&consts),
        &config.driving_spec(&consts),
        &config.system_params(),
        &config.grid(&consts),
    )?;
    let csv = trace::envelope_csv(&result, &consts, &config.provenance()?, config.output.stride)?;
    Ok(SingleRun { result, csv })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Pulsed,
    Analytic,
}

/// One evaluated sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub value: f64,
    pub probe_transmission: f64,
    pub signal_efficiency: f64,
    /// Probe delay in μs; NaN in analytic mode.
    pub probe_delay_us: f64,
    pub n_z: usize,
    pub dt: f64,
    pub edge_us: f64,
}

impl SweepRecord {
    pub const CSV_HEADER: &'static str =
        "swept_value,probe_transmission,signal_efficiency,probe_delay_us,n_z,dt,edge_us";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            format_sig9(self.value),
            format_sig9(self.probe_transmission),
            format_sig9(self.signal_efficiency),
            format_sig9(self.probe_delay_us),
            self.n_z,
            format_sig9(self.dt),
            format_sig9(self.edge_us),
        )
    }
}

fn sweep_point(config: &ExperimentConfig, mode: SweepMode, consts: &PhysicalConstants) -> Result<(f64, f64, f64)> {
    match mode {
        SweepMode::Analytic => {
            let p = &config.params;
            let sol = steady::steady_state(&SteadyStateInputs {
                omega_c: p.omega_c,
                omega_d: p.omega_d,
                delta: p.delta,
                gamma31: p.gamma31,
                alpha: p.alpha,
            })?;
            Ok((sol.probe_transmission, sol.signal_efficiency, f64::NAN))
        }
        SweepMode::Pulsed => {
            let r = propagator::propagate(
                &config.probe_spec(consts),
                &config.coupling(consts),
                &config.driving_spec(consts),
                &config.system_params(),
                &config.grid(consts),
            )?;
            Ok((
                r.energy_transmission_probe,
                r.conversion_efficiency,
                consts.gamma_units_to_us(r.probe_delay),
            ))
        }
    }
}

/// Evaluates every sweep value. Records come back in input order whether or
/// not the points run in parallel.
pub fn run_sweep(config: &ExperimentConfig, mode: SweepMode, parallel: bool) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| FwmError::config("sweep", "missing [sweep] section"))?;
    let consts = PhysicalConstants::default();
    let eval = |&value: &f64| -> Result<SweepRecord> {
        let point = config.with_value(sweep.variable, value);
        let wrap = |e: FwmError| FwmError::SweepPoint {
            variable: sweep.variable.name().to_string(),
            value,
            source: Box::new(e),
        };
        let (probe, signal, delay) = sweep_point(&point, mode, &consts).map_err(wrap)?;
        for (what, v) in [("probe transmission", probe), ("signal efficiency", signal)] {
            if !(-PASSIVITY_SLACK..=1.0 + PASSIVITY_SLACK).contains(&v) {
                return Err(wrap(FwmError::Numerical(format!("{what} {v} outside [0, 1]"))));
            }
        }
        Ok(SweepRecord {
            value,
            probe_transmission: probe,
            signal_efficiency: signal,
            probe_delay_us: delay,
            n_z: point.grid.n_z,
            dt: point.grid.dt,
            edge_us: point.driving.edge_us,
        })
    };
    if parallel {
        sweep.values.par_iter().map(eval).collect()
    } else {
        sweep.values.iter().map(eval).collect()
    }
}

/// Sweep CSV with a provenance header.
pub fn sweep_csv(config: &ExperimentConfig, mode: SweepMode, records: &[SweepRecord]) -> Result<String> {
    let mut out = String::new();
    for (k, v) in config.provenance()? {
        out += &format!("# {k}={v}\n");
    }
    if let Some(s) = &config.sweep {
        out += &format!("# sweep_variable={}\n", s.variable);
    }
    let mode_name = match mode {
        SweepMode::Pulsed => "pulsed",
        SweepMode::Analytic => "analytic",
    };
    out += &format!("# mode={mode_name}\n");
    out += SweepRecord::CSV_HEADER;
    out.push('\n');
    for r in records {
        out += &r.to_csv_row();
        out.push('\n');
    }
    Ok(out)
}

/// Builds the forward model of a fit from a configuration.
pub fn trace_model(config: &ExperimentConfig) -> Result<TraceModel> {
    let consts = PhysicalConstants::default();
    let p = &config.params;
    TraceModel::new(
        FixedParams {
            omega_c: p.omega_c,
            delta: p.delta,
            gamma31: p.gamma31,
            gamma41: p.gamma41,
            alpha: p.alpha,
        },
        PulseSet {
            probe: config.probe_spec(&consts),
            coupling: config.coupling(&consts),
            driving: config.driving_spec(&consts),
        },
        config.grid(&consts),
        consts,
    )
}

/// Fits `trace` with the bounds and options of the `[fit]` section.
pub fn run_fit(config: &ExperimentConfig, trace: &Trace) -> Result<FitResult> {
    config.validate()?;
    let section = config
        .fit
        .as_ref()
        .ok_or_else(|| FwmError::config("fit", "missing [fit] section"))?;
    let model = trace_model(config)?;
    fitting::fit(trace, &model, &section.bounds(), &section.options())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::Fig2,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4,
        FigureId::Fig5,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
        }
    }

    /// The bundled configuration text.
    pub fn config_text(&self) -> &'static str {
        match self {
            FigureId::Fig2 => include_str!("../configs/fig2.toml"),
            FigureId::Fig3a => include_str!("../configs/fig3a.toml"),
            FigureId::Fig3b => include_str!("../configs/fig3b.toml"),
            FigureId::Fig4 => include_str!("../configs/fig4.toml"),
            FigureId::Fig5 => include_str!("../configs/fig5.toml"),
        }
    }

    pub fn config(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(self.config_text())
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = FwmError;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                FwmError::config(
                    "figure",
                    format!("unknown figure id {s:?}; expected one of fig2, fig3a, fig3b, fig4, fig5"),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub parallel: bool,
    /// Forces analytic sweeps.
    pub analytic: bool,
    pub grid_scale: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            analytic: false,
            grid_scale: None,
        }
    }
}

/// Output file name for one series of a run, e.g. `fig2_gamma21_0.0009.csv`.
fn series_file(stem: &str, series: Option<(SweepVariable, f64)>) -> String {
    match series {
        None => format!("{stem}.csv"),
        Some((var, v)) => format!("{stem}_{var}_{v}.csv"),
    }
}

/// Runs a configuration (every series, sweep or single) and returns the CSV
/// files as (file name, contents), without touching the disk.
pub fn run_config(config: &ExperimentConfig, stem: &str, options: &RunOptions) -> Result<Vec<(String, String)>> {
    let config = match options.grid_scale {
        Some(f) => config.with_grid_scale(f)?,
        None => config.clone(),
    };
    config.validate()?;
    let mut files = Vec::new();
    for (series, cfg) in config.expand_series() {
        let csv = match &cfg.sweep {
            Some(s) => {
                let mode = if options.analytic || s.analytic {
                    SweepMode::Analytic
                } else {
                    SweepMode::Pulsed
                };
                let records = run_sweep(&cfg, mode, options.parallel)?;
                sweep_csv(&cfg, mode, &records)?
            }
            None => run_single(&cfg)?.csv,
        };
        files.push((series_file(stem, series), csv));
    }
    Ok(files)
}

/// Writes the files of [`run_config`] into `dir` and returns their paths.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| FwmError::io(dir, e))?;
    files
        .iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| FwmError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Runs the bundled configuration of a figure and writes its CSV files.
pub fn reproduce_figure(figure: FigureId, out_dir: &Path, options: &RunOptions) -> Result<Vec<PathBuf>> {
    let config = figure.config()?;
    let mut files = run_config(&config, figure.name(), options)?;
    for (_, text) in &mut files {
        *text = format!("# figure={figure}\n{text}");
    }
    write_files(out_dir, &files)
}
