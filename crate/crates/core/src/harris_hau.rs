//! Pulsed-regime analytic conversion efficiency ζ = N_d (σ24/A) Φ(η, r) and
//! its auxiliary parameters.
//!
//! Φ itself is not computed here; callers supply it.

use crate::error::{FwmError, Result};

/// Φ at (η, r) = (0.27, 0.048), the operating point of the driving-Rabi scan
/// at Δ = 13Γ, α = 42, Ω_c = 0.32Γ.
pub const PHI_DRIVE_SCAN: f64 = 4.5e-3;

/// σ24/A for a driving pulse focused onto one resonant cross section 3λ²/2π.
/// σ24 carries the averaged Clebsch-Gordan factor, so the ratio is a_ij².
pub const TIGHT_FOCUS_CROSS_SECTION_RATIO: f64 = 2.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarrisHauInputs {
    /// Number of driving photons N_d.
    pub n_drive_photons: f64,
    /// σ24 / A.
    pub cross_section_ratio: f64,
    /// Φ(η, r).
    pub phi: f64,
    pub eta: f64,
    pub r: f64,
}

impl HarrisHauInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_drive_photons", self.n_drive_photons),
            ("cross_section_ratio", self.cross_section_ratio),
            ("phi", self.phi),
            ("eta", self.eta),
            ("r", self.r),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(FwmError::config(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        if self.cross_section_ratio > 1.0 {
            log::warn!(
                "cross-section ratio {} exceeds 1: beam smaller than the atomic cross section",
                self.cross_section_ratio
            );
        }
        Ok(())
    }
}

/// Single-pass loss r = γ31² α / (8Δ² + 2γ31²).
pub fn loss_parameter(alpha: f64, delta: f64, gamma31: f64) -> Result<f64> {
    if !(gamma31 > 0.0) {
        return Err(FwmError::domain(format!("gamma31 must be positive, got {gamma31}")));
    }
    let g2 = gamma31 * gamma31;
    Ok(g2 * alpha / (8.0 * delta * delta + 2.0 * g2))
}

/// η = T_d / T_p. Both times in the same unit.
pub fn delay_ratio(t_delay: f64, t_probe: f64) -> Result<f64> {
    if !(t_probe > 0.0) {
        return Err(FwmError::domain(format!("probe duration must be positive, got {t_probe}")));
    }
    Ok(t_delay / t_probe)
}

pub fn zeta(inputs: &HarrisHauInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.n_drive_photons * inputs.cross_section_ratio * inputs.phi)
}
