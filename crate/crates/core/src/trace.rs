//! Pulse traces on disk.
//!
//! The envelope CSV written by the propagator and read back by the fitter:
//!
//! ```text
//! # key=value            (any number of provenance lines)
//! time_us,probe_in_norm,probe_out_norm,signal_out_norm
//! 0.00000000e0,0.00000000e0,0.00000000e0,0.00000000e0
//! ...
//! ```
//!
//! Powers are normalized to the incident probe peak power. Numbers carry nine
//! significant digits. `probe_in_norm` is optional when reading.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{FwmError, Result};
use crate::propagator::PropagationResult;
use crate::units::PhysicalConstants;

pub const MIN_TRACE_ROWS: usize = 16;

const COL_TIME: &str = "time_us";
const COL_PROBE_IN: &str = "probe_in_norm";
const COL_PROBE_OUT: &str = "probe_out_norm";
const COL_SIGNAL_OUT: &str = "signal_out_norm";

/// Formats with nine significant digits.
pub fn format_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Measured or simulated output powers versus time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub time_us: Vec<f64>,
    pub probe_power: Vec<f64>,
    pub signal_power: Vec<f64>,
    /// Incident probe power, when recorded. Used as the normalization
    /// reference by the fitter.
    pub probe_in_power: Option<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

impl Trace {
    pub fn new(
        time_us: Vec<f64>,
        probe_power: Vec<f64>,
        signal_power: Vec<f64>,
        probe_in_power: Option<Vec<f64>>,
    ) -> Result<Self> {
        let trace = Self {
            time_us,
            probe_power,
            signal_power,
            probe_in_power,
            metadata: BTreeMap::new(),
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn len(&self) -> usize {
        self.time_us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_us.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.time_us.len();
        let lengths_match = self.probe_power.len() == n
            && self.signal_power.len() == n
            && self.probe_in_power.as_ref().is_none_or(|v| v.len() == n);
        if !lengths_match {
            return Err(FwmError::Parse {
                row: 0,
                column: "*".into(),
                message: "columns have different lengths".into(),
            });
        }
        if n < MIN_TRACE_ROWS {
            return Err(FwmError::TraceLength {
                rows: n,
                min: MIN_TRACE_ROWS,
            });
        }
        for k in 0..n {
            check_value(k + 1, COL_TIME, self.time_us[k], false)?;
            if k > 0 && !(self.time_us[k] > self.time_us[k - 1]) {
                return Err(FwmError::Parse {
                    row: k + 1,
                    column: COL_TIME.into(),
                    message: "time is not strictly increasing".into(),
                });
            }
            check_value(k + 1, COL_PROBE_OUT, self.probe_power[k], true)?;
            check_value(k + 1, COL_SIGNAL_OUT, self.signal_power[k], true)?;
            if let Some(p) = &self.probe_in_power {
                check_value(k + 1, COL_PROBE_IN, p[k], true)?;
            }
        }
        Ok(())
    }

    /// Samples a propagation result every `stride` grid points.
    pub fn from_result(result: &PropagationResult, consts: &PhysicalConstants, stride: usize) -> Self {
        let stride = stride.max(1);
        let peak = result.probe_in.peak_power();
        let norm = |env: &crate::propagator::FieldEnvelope| -> Vec<f64> {
            env.samples.iter().step_by(stride).map(|z| z.norm_sqr() / peak).collect()
        };
        Self {
            time_us: result
                .probe_in
                .times()
                .step_by(stride)
                .map(|t| consts.gamma_units_to_us(t))
                .collect(),
            probe_power: norm(&result.probe_out),
            signal_power: norm(&result.signal_out),
            probe_in_power: Some(norm(&result.probe_in)),
            metadata: BTreeMap::new(),
        }
    }

    /// Output powers divided by the incident peak when the incident column is
    /// present, unchanged otherwise.
    pub fn normalized_powers(&self) -> (Vec<f64>, Vec<f64>) {
        let reference = self
            .probe_in_power
            .as_ref()
            .map(|p| p.iter().cloned().fold(0.0, f64::max))
            .filter(|&m| m > 0.0)
            .unwrap_or(1.0);
        (
            self.probe_power.iter().map(|p| p / reference).collect(),
            self.signal_power.iter().map(|p| p / reference).collect(),
        )
    }

    /// Writes the trace CSV. `provenance` lines come first, then the trace's
    /// own metadata, each as `# key=value`.
    pub fn write_csv<W: Write>(&self, mut out: W, provenance: &[(String, String)]) -> Result<()> {
        let io = |e| FwmError::io("<trace output>", e);
        let own = self.metadata.iter();
        for (k, v) in provenance.iter().map(|(k, v)| (k, v)).chain(own) {
            writeln!(out, "# {k}={v}").map_err(io)?;
        }
        let mut header = vec![COL_TIME];
        if self.probe_in_power.is_some() {
            header.push(COL_PROBE_IN);
        }
        header.extend([COL_PROBE_OUT, COL_SIGNAL_OUT]);
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for k in 0..self.len() {
            let mut row = vec![format_sig9(self.time_us[k])];
            if let Some(p) = &self.probe_in_power {
                row.push(format_sig9(p[k]));
            }
            row.push(format_sig9(self.probe_power[k]));
            row.push(format_sig9(self.signal_power[k]));
            writeln!(out, "{}", row.join(",")).map_err(io)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, provenance: &[(String, String)]) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, provenance)?;
        Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut metadata = BTreeMap::new();
        for line in text.lines() {
            if let Some(comment) = line.trim_start().strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    metadata.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
        }

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| parse_error(0, "*", e.to_string()))?
            .clone();
        if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
            return Err(parse_error(0, "*", "empty file: missing header row"));
        }
        let column = |name: &str| headers.iter().position(|h| h == name);
        let require = |name: &str| column(name).ok_or_else(|| parse_error(1, name, "missing column"));
        let (i_time, i_probe, i_signal) = (require(COL_TIME)?, require(COL_PROBE_OUT)?, require(COL_SIGNAL_OUT)?);
        let i_in = column(COL_PROBE_IN);

        let mut time_us = Vec::new();
        let mut probe = Vec::new();
        let mut signal = Vec::new();
        let mut probe_in = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let row = k + 1;
            let record = record.map_err(|e| parse_error(row, "*", e.to_string()))?;
            let field = |idx: usize, name: &str| -> Result<f64> {
                let raw = record
                    .get(idx)
                    .ok_or_else(|| parse_error(row, name, "missing value"))?;
                raw.parse::<f64>()
                    .map_err(|e| parse_error(row, name, format!("cannot parse {raw:?}: {e}")))
            };
            time_us.push(field(i_time, COL_TIME)?);
            probe.push(field(i_probe, COL_PROBE_OUT)?);
            signal.push(field(i_signal, COL_SIGNAL_OUT)?);
            if let Some(i) = i_in {
                probe_in.push(field(i, COL_PROBE_IN)?);
            }
        }
        let trace = Self {
            time_us,
            probe_power: probe,
            signal_power: signal,
            probe_in_power: i_in.map(|_| probe_in),
            metadata,
        };
        trace.validate()?;
        Ok(trace)
    }
}

fn parse_error(row: usize, column: &str, message: impl Into<String>) -> FwmError {
    FwmError::Parse {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

fn check_value(row: usize, column: &str, v: f64, power: bool) -> Result<()> {
    if !v.is_finite() {
        return Err(parse_error(row, column, format!("non-finite value {v}")));
    }
    if power && v < 0.0 {
        return Err(parse_error(row, column, format!("negative power {v}")));
    }
    Ok(())
}

/// Reads and validates a trace CSV.
pub fn load_trace(path: impl AsRef<Path>) -> Result<Trace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| FwmError::io(path, e))?;
    Trace::from_csv_str(&text)
}

/// Writes the envelope CSV of a propagation result.
pub fn envelope_csv(
    result: &PropagationResult,
    consts: &PhysicalConstants,
    provenance: &[(String, String)],
    stride: usize,
) -> Result<String> {
    let mut lines: Vec<(String, String)> = provenance.to_vec();
    lines.extend([
        ("efficiency_definition".to_string(), result.metadata.efficiency_definition.to_string()),
        ("conversion_efficiency".to_string(), format_sig9(result.conversion_efficiency)),
        ("energy_transmission_probe".to_string(), format_sig9(result.energy_transmission_probe)),
        ("probe_delay_us".to_string(), format_sig9(consts.gamma_units_to_us(result.probe_delay))),
        ("n_z".to_string(), result.metadata.n_z.to_string()),
        ("dt".to_string(), format_sig9(result.metadata.dt)),
        ("t_max".to_string(), format_sig9(result.metadata.t_max)),
        ("probe_edge_time".to_string(), format_sig9(result.metadata.probe_edge_time)),
        ("driving_edge_time".to_string(), format_sig9(result.metadata.driving_edge_time)),
    ]);
    if let Some((p, s)) = result.plateau_transmissions {
        lines.push(("plateau_probe".to_string(), format_sig9(p)));
        lines.push(("plateau_signal".to_string(), format_sig9(s)));
    }
    Trace::from_result(result, consts, stride).to_csv_string(&lines)
}
