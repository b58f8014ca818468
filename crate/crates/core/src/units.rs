//! Physical constants and conversions between dimensionless simulation units
//! and laboratory units.
//!
//! Every rate and Rabi frequency elsewhere in the crate is expressed in units
//! of the excited-state decay rate Γ, and every time in units of Γ⁻¹. Laboratory
//! quantities (seconds, mW/cm², metres) only appear in this module.

use std::f64::consts::PI;

use crate::error::{FwmError, Result};

/// Atomic and fundamental constants for the ⁸⁷Rb D₂ line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Γ in rad/s.
    pub gamma_rad_per_s: f64,
    /// Saturation intensity I₀ in mW/cm².
    pub i_sat: f64,
    /// Averaged squared Clebsch-Gordan coefficient a_ij².
    pub cg_factor_sq: f64,
    /// Optical wavelength in metres.
    pub wavelength: f64,
    pub speed_of_light: f64,
    pub planck_h: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::rubidium_d2()
    }
}

impl PhysicalConstants {
    pub const fn rubidium_d2() -> Self {
        Self {
            gamma_rad_per_s: 2.0 * PI * 6.0e6,
            i_sat: 1.63,
            cg_factor_sq: 2.0 / 9.0,
            wavelength: 780.24e-9,
            speed_of_light: 299_792_458.0,
            planck_h: 6.626_070_15e-34,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma_rad_per_s", self.gamma_rad_per_s),
            ("i_sat", self.i_sat),
            ("cg_factor_sq", self.cg_factor_sq),
            ("wavelength", self.wavelength),
            ("speed_of_light", self.speed_of_light),
            ("planck_h", self.planck_h),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(FwmError::config(name, format!("must be positive, got {value}")));
            }
        }
        if self.cg_factor_sq > 1.0 {
            return Err(FwmError::config(
                "cg_factor_sq",
                format!("must not exceed 1, got {}", self.cg_factor_sq),
            ));
        }
        Ok(())
    }

    /// Resonant cross section 3λ²/2π in m².
    pub fn atomic_cross_section(&self) -> f64 {
        3.0 * self.wavelength * self.wavelength / (2.0 * PI)
    }

    /// Energy of one photon in joules.
    pub fn photon_energy(&self) -> f64 {
        self.planck_h * self.speed_of_light / self.wavelength
    }

    /// Converts a time in seconds to Γ⁻¹ units.
    pub fn seconds_to_gamma_units(&self, seconds: f64) -> f64 {
        seconds * self.gamma_rad_per_s
    }

    pub fn gamma_units_to_seconds(&self, t: f64) -> f64 {
        t / self.gamma_rad_per_s
    }

    pub fn us_to_gamma_units(&self, us: f64) -> f64 {
        self.seconds_to_gamma_units(us * 1e-6)
    }

    pub fn gamma_units_to_us(&self, t: f64) -> f64 {
        self.gamma_units_to_seconds(t) * 1e6
    }
}

/// Peak intensity (mW/cm²) of a field with Rabi frequency `omega_over_gamma` Γ,
/// I = 2 (Ω/Γ)² I₀ / a_ij².
pub fn rabi_to_intensity(omega_over_gamma: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(omega_over_gamma >= 0.0) || !omega_over_gamma.is_finite() {
        return Err(FwmError::domain(format!(
            "Rabi frequency must be finite and non-negative, got {omega_over_gamma}"
        )));
    }
    Ok(2.0 * omega_over_gamma * omega_over_gamma * consts.i_sat / consts.cg_factor_sq)
}

/// Inverse of [`rabi_to_intensity`].
pub fn intensity_to_rabi(intensity: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(FwmError::domain(format!(
            "intensity must be finite and non-negative, got {intensity}"
        )));
    }
    Ok((intensity * consts.cg_factor_sq / (2.0 * consts.i_sat)).sqrt())
}

/// Number of photons crossing one resonant atomic cross section (3λ²/2π) for a
/// flat-top pulse of `intensity` mW/cm² lasting `duration` seconds.
pub fn photons_per_atomic_cross_section(
    intensity: f64,
    duration: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(FwmError::domain(format!("duration must be positive, got {duration}")));
    }
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(FwmError::domain(format!(
            "intensity must be finite and non-negative, got {intensity}"
        )));
    }
    // mW/cm² -> W/m²
    let watts_per_m2 = intensity * 10.0;
    Ok(watts_per_m2 * duration * consts.atomic_cross_section() / consts.photon_energy())
}

/// Slow-light group delay T_d = α γ31 / Ω_c², returned in seconds.
pub fn eit_delay_time(
    alpha: f64,
    gamma31: f64,
    omega_c: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    Ok(consts.gamma_units_to_seconds(eit_delay_gamma_units(alpha, gamma31, omega_c)?))
}

/// Same as [`eit_delay_time`] but in Γ⁻¹ units.
pub fn eit_delay_gamma_units(alpha: f64, gamma31: f64, omega_c: f64) -> Result<f64> {
    if !(omega_c.abs() > 0.0) {
        return Err(FwmError::domain("coupling Rabi frequency must be non-zero (infinite delay)"));
    }
    if alpha < 0.0 || gamma31 < 0.0 {
        return Err(FwmError::domain("optical depth and gamma31 must be non-negative"));
    }
    Ok(alpha * gamma31 / (omega_c * omega_c))
}

/// Atomic medium in laboratory units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec {
    /// Atoms per m³.
    pub number_density: f64,
    /// σ13 in m².
    pub cross_section_probe: f64,
    /// σ14 in m².
    pub cross_section_signal: f64,
    /// σ24 in m².
    pub cross_section_drive: f64,
    /// L in m.
    pub path_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Probe,
    Signal,
}

impl MediumSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("number_density", self.number_density),
            ("cross_section_probe", self.cross_section_probe),
            ("cross_section_signal", self.cross_section_signal),
            ("cross_section_drive", self.cross_section_drive),
            ("path_length", self.path_length),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(FwmError::config(name, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Optical depth n σ L of the requested transition.
pub fn optical_depth(medium: &MediumSpec, transition: Transition) -> f64 {
    let sigma = match transition {
        Transition::Probe => medium.cross_section_probe,
        Transition::Signal => medium.cross_section_signal,
    };
    medium.number_density * sigma * medium.path_length
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const RB: PhysicalConstants = PhysicalConstants::rubidium_d2();

    #[test]
    fn drive_intensities_match_quoted_values() {
        // 80 µW/cm² and 1.8 mW/cm²
        let weak = rabi_to_intensity(0.074, &RB).unwrap();
        assert_relative_eq!(weak, 0.080_332_92, max_relative = 1e-6);
        assert!((weak / 0.080 - 1.0).abs() < 0.05);
        let strong = rabi_to_intensity(0.35, &RB).unwrap();
        assert_relative_eq!(strong, 1.797_075, max_relative = 1e-6);
        assert_eq!(rabi_to_intensity(0.0, &RB).unwrap(), 0.0);
    }

    #[test]
    fn intensity_inverts_to_rabi() {
        assert_relative_eq!(intensity_to_rabi(1.8, &RB).unwrap(), 0.350_284_722, max_relative = 1e-8);
        assert_eq!(intensity_to_rabi(0.0, &RB).unwrap(), 0.0);
        for x in [0.1, 0.32, 0.67] {
            let back = intensity_to_rabi(rabi_to_intensity(x, &RB).unwrap(), &RB).unwrap();
            assert_relative_eq!(back, x, max_relative = 1e-14);
        }
    }

    #[test]
    fn negative_inputs_are_rejected() {
        assert!(matches!(rabi_to_intensity(-0.1, &RB), Err(FwmError::Domain(_))));
        assert!(matches!(intensity_to_rabi(-1.0, &RB), Err(FwmError::Domain(_))));
        assert!(matches!(rabi_to_intensity(f64::NAN, &RB), Err(FwmError::Domain(_))));
    }

    #[test]
    fn photon_budget_of_weak_drive() {
        let n = photons_per_atomic_cross_section(0.080, 70e-6, &RB).unwrap();
        assert_relative_eq!(n, 63.934_800_54, max_relative = 1e-8);
        assert_eq!(photons_per_atomic_cross_section(0.0, 70e-6, &RB).unwrap(), 0.0);
        let doubled = photons_per_atomic_cross_section(0.080, 140e-6, &RB).unwrap();
        assert_relative_eq!(doubled, 2.0 * n, max_relative = 1e-14);
        assert!(photons_per_atomic_cross_section(0.08, 0.0, &RB).is_err());
        assert!(photons_per_atomic_cross_section(0.08, -1.0, &RB).is_err());
    }

    #[test]
    fn slow_light_delay() {
        let td = eit_delay_time(42.0, 1.25, 0.32, &RB).unwrap();
        assert_relative_eq!(td * 1e6, 13.599_665_547, max_relative = 1e-9);
        assert_relative_eq!(td / 50e-6, 0.272, epsilon = 1e-3);
        assert_eq!(eit_delay_time(0.0, 1.25, 0.32, &RB).unwrap(), 0.0);
        let double = eit_delay_time(84.0, 1.25, 0.32, &RB).unwrap();
        assert_relative_eq!(double, 2.0 * td, max_relative = 1e-14);
        assert!(eit_delay_time(42.0, 1.25, 0.0, &RB).is_err());
    }

    #[test]
    fn optical_depth_scaling() {
        let unit = MediumSpec {
            number_density: 1.0,
            cross_section_probe: 1.0,
            cross_section_signal: 1.0,
            cross_section_drive: 1.0,
            path_length: 1.0,
        };
        assert_eq!(optical_depth(&unit, Transition::Probe), 1.0);
        let cloud = MediumSpec {
            number_density: 2.0e17,
            cross_section_probe: RB.atomic_cross_section() * RB.cg_factor_sq,
            cross_section_signal: RB.atomic_cross_section() * RB.cg_factor_sq,
            cross_section_drive: RB.atomic_cross_section() * RB.cg_factor_sq,
            path_length: 3e-3,
        };
        cloud.validate().unwrap();
        assert_eq!(
            optical_depth(&cloud, Transition::Probe),
            optical_depth(&cloud, Transition::Signal)
        );
        let denser = MediumSpec {
            number_density: 2.0 * cloud.number_density,
            ..cloud
        };
        assert_relative_eq!(
            optical_depth(&denser, Transition::Probe),
            2.0 * optical_depth(&cloud, Transition::Probe),
            max_relative = 1e-15
        );
    }

    #[test]
    fn constants_validate() {
        RB.validate().unwrap();
        let bad = PhysicalConstants {
            cg_factor_sq: 1.5,
            ..RB
        };
        assert!(bad.validate().is_err());
        let bad = PhysicalConstants { i_sat: 0.0, ..RB };
        assert!(bad.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn intensity_round_trip(i in 1e-6f64..1e3) {
                let back = rabi_to_intensity(intensity_to_rabi(i, &RB).unwrap(), &RB).unwrap();
                prop_assert!(((back - i) / i).abs() < 1e-12);
            }

            #[test]
            fn conversions_are_monotone(a in 0.0f64..10.0, b in 0.0f64..10.0) {
                prop_assume!(a < b);
                prop_assert!(rabi_to_intensity(a, &RB).unwrap() < rabi_to_intensity(b, &RB).unwrap());
                prop_assert!(intensity_to_rabi(a, &RB).unwrap() < intensity_to_rabi(b, &RB).unwrap());
                prop_assert!(photons_per_atomic_cross_section(a, 1e-6, &RB).unwrap()
                    < photons_per_atomic_cross_section(b, 1e-6, &RB).unwrap());
            }

            #[test]
            fn photon_count_is_bilinear(i in 0.0f64..10.0, t in 1e-7f64..1e-3, k in 0.1f64..10.0) {
                let base = photons_per_atomic_cross_section(i, t, &RB).unwrap();
                let si = photons_per_atomic_cross_section(k * i, t, &RB).unwrap();
                let st = photons_per_atomic_cross_section(i, k * t, &RB).unwrap();
                prop_assert!((si - k * base).abs() <= 1e-12 * (1.0 + si.abs()));
                prop_assert!((st - k * base).abs() <= 1e-12 * (1.0 + st.abs()));
            }
        }
    }
}
