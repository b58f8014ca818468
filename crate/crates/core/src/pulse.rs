//! Temporal envelopes of the probe, coupling and driving fields.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{FwmError, Result};

/// Full raised-cosine ramp width per unit 10–90 % rise time.
fn ramp_width(edge_time: f64) -> f64 {
    edge_time * PI / ((-0.8f64).acos() - 0.8f64.acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    /// Flat top with raised-cosine rise and fall. The envelope is non-zero on
    /// `[start, start + duration]`.
    SquareSmoothEdges,
    /// Gaussian whose intensity FWHM equals `duration`, centred at
    /// `start + 2·duration`.
    Gaussian,
}

/// One pulse, with all times in Γ⁻¹ and the peak Rabi frequency in Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub peak_rabi: f64,
    pub duration: f64,
    /// 10–90 % rise (and fall) time. Ignored for Gaussian pulses.
    pub edge_time: f64,
    pub start_time: f64,
}

impl PulseSpec {
    pub fn square(peak_rabi: f64, start_time: f64, duration: f64, edge_time: f64) -> Self {
        Self {
            shape: PulseShape::SquareSmoothEdges,
            peak_rabi,
            duration,
            edge_time,
            start_time,
        }
    }

    pub fn gaussian(peak_rabi: f64, start_time: f64, fwhm: f64) -> Self {
        Self {
            shape: PulseShape::Gaussian,
            peak_rabi,
            duration: fwhm,
            edge_time: 0.0,
            start_time,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(FwmError::config(
                format!("{name}.duration"),
                format!("must be positive, got {}", self.duration),
            ));
        }
        if !(self.edge_time >= 0.0) || self.edge_time > self.duration / 4.0 {
            return Err(FwmError::config(
                format!("{name}.edge_time"),
                format!("must lie in [0, duration/4], got {}", self.edge_time),
            ));
        }
        if !self.peak_rabi.is_finite() || !self.start_time.is_finite() {
            return Err(FwmError::config(name, "peak and start time must be finite"));
        }
        if self.start_time < 0.0 {
            return Err(FwmError::config(format!("{name}.start_time"), "must be non-negative"));
        }
        Ok(())
    }

    /// Time after which the envelope is (numerically) zero.
    pub fn end_time(&self) -> f64 {
        match self.shape {
            PulseShape::SquareSmoothEdges => self.start_time + self.duration,
            PulseShape::Gaussian => self.start_time + 4.0 * self.duration,
        }
    }

    /// Envelope normalized to unit peak.
    pub fn unit_envelope(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::SquareSmoothEdges => {
                let local = t - self.start_time;
                if local < 0.0 || local > self.duration {
                    return 0.0;
                }
                let w = ramp_width(self.edge_time);
                if w == 0.0 {
                    return 1.0;
                }
                let x = (local / w).min((self.duration - local) / w).min(1.0);
                0.5 * (1.0 - (PI * x).cos())
            }
            PulseShape::Gaussian => {
                let centre = self.start_time + 2.0 * self.duration;
                let u = (t - centre) / self.duration;
                (-2.0 * LN_2 * u * u).exp()
            }
        }
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        self.peak_rabi * self.unit_envelope(t)
    }

    /// Interval over which a square pulse sits at its peak, or `None` for
    /// Gaussian pulses.
    pub fn flat_top(&self) -> Option<(f64, f64)> {
        match self.shape {
            PulseShape::SquareSmoothEdges => {
                let w = ramp_width(self.edge_time);
                Some((self.start_time + w, self.start_time + self.duration - w))
            }
            PulseShape::Gaussian => None,
        }
    }
}

/// The coupling field: either held at `SystemParams::omega_c` throughout, or
/// pulsed with its own peak Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Coupling {
    #[default]
    Constant,
    Pulsed(PulseSpec),
}
