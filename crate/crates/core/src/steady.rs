//! Closed-form steady-state probe and signal outputs of the EIT four-wave
//! mixing medium, valid for a lossless ground-state coherence (γ21 = 0) and
//! equal excited-state decay rates (γ31 = γ41).
//!
//! With Ω² = Ω_c² + Ω_d², ξ = i + 2Ω_c²Δ/(Ω²γ31) and f = exp(−iα/2ξ):
//!
//! ```text
//! Ω_p(α)/Ω_p(0) = (Ω_c² + Ω_d² f) / Ω²
//! Ω_s(α)/Ω_p(0) = Ω_cΩ_d (1 − f) / Ω²
//! ```

use num_complex::Complex64;

use crate::error::{FwmError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateInputs {
    pub omega_c: f64,
    pub omega_d: f64,
    /// Driving detuning Δ = ω_d − ω₂₄ in Γ units.
    pub delta: f64,
    pub gamma31: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateSolution {
    pub probe_ratio: Complex64,
    pub signal_ratio: Complex64,
    pub omega_sq: f64,
    pub xi: Complex64,
    pub probe_transmission: f64,
    pub signal_efficiency: f64,
}

impl SteadyStateInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_c", self.omega_c),
            ("omega_d", self.omega_d),
            ("delta", self.delta),
            ("gamma31", self.gamma31),
            ("alpha", self.alpha),
        ] {
            if !v.is_finite() {
                return Err(FwmError::config(name, "must be finite"));
            }
        }
        if self.alpha < 0.0 {
            return Err(FwmError::config("alpha", "optical depth must be non-negative"));
        }
        if !(self.gamma31 > 0.0) {
            return Err(FwmError::config("gamma31", "decay rate must be positive"));
        }
        if self.omega_sq() == 0.0 {
            return Err(FwmError::domain("omega_c and omega_d are both zero (Ω² = 0)"));
        }
        Ok(())
    }

    pub fn omega_sq(&self) -> f64 {
        self.omega_c * self.omega_c + self.omega_d * self.omega_d
    }

    pub fn xi(&self) -> Complex64 {
        Complex64::new(
            2.0 * self.omega_c * self.omega_c * self.delta / (self.omega_sq() * self.gamma31),
            1.0,
        )
    }

    /// f = exp(−iα / 2ξ).
    pub fn propagation_factor(&self) -> Complex64 {
        let exponent = Complex64::new(0.0, -self.alpha) / (2.0 * self.xi());
        exponent.exp()
    }
}

pub fn steady_state(inputs: &SteadyStateInputs) -> Result<SteadyStateSolution> {
    inputs.validate()?;
    let omega_sq = inputs.omega_sq();
    let f = inputs.propagation_factor();
    let (oc, od) = (inputs.omega_c, inputs.omega_d);
    let probe_ratio = (oc * oc + od * od * f) / omega_sq;
    let signal_ratio = (oc * od - oc * od * f) / omega_sq;
    Ok(SteadyStateSolution {
        probe_ratio,
        signal_ratio,
        omega_sq,
        xi: inputs.xi(),
        probe_transmission: probe_ratio.norm_sqr(),
        signal_efficiency: signal_ratio.norm_sqr(),
    })
}

/// Probe transmission plus conversion efficiency, (Ω_c² + Ω_d² |f|²)/Ω².
pub fn total_transmission(inputs: &SteadyStateInputs) -> Result<f64> {
    inputs.validate()?;
    // |f|² = exp(−α Re(i/ξ))
    let decay = (Complex64::i() / inputs.xi()).re * inputs.alpha;
    let (oc2, od2) = (inputs.omega_c.powi(2), inputs.omega_d.powi(2));
    Ok((oc2 + od2 * (-decay).exp()) / inputs.omega_sq())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningPoint {
    pub delta: f64,
    pub probe_transmission: f64,
    pub signal_efficiency: f64,
}

/// Evaluates [`steady_state`] at each detuning in `deltas`, replacing
/// `base.delta`. The grid must be monotone.
pub fn efficiency_vs_detuning(base: &SteadyStateInputs, deltas: &[f64]) -> Result<Vec<DetuningPoint>> {
    let increasing = deltas.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = deltas.windows(2).all(|w| w[1] <= w[0]);
    if !(increasing || decreasing) {
        return Err(FwmError::config("delta", "detuning grid must be monotone"));
    }
    deltas
        .iter()
        .map(|&delta| {
            let sol = steady_state(&SteadyStateInputs { delta, ..*base })?;
            Ok(DetuningPoint {
                delta,
                probe_transmission: sol.probe_transmission,
                signal_efficiency: sol.signal_efficiency,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inputs(omega_c: f64, omega_d: f64, delta: f64, gamma31: f64, alpha: f64) -> SteadyStateInputs {
        SteadyStateInputs {
            omega_c,
            omega_d,
            delta,
            gamma31,
            alpha,
        }
    }

    #[test]
    fn detuned_reference_point() {
        // Reference values from a 30-digit evaluation of the closed form.
        let sol = steady_state(&inputs(0.32, 0.32, 13.0, 1.25, 42.0)).unwrap();
        assert_relative_eq!(sol.signal_efficiency, 0.592_088_451_650_737, epsilon = 1e-12);
        assert_relative_eq!(sol.probe_transmission, 0.248_219_782_319_987, epsilon = 1e-12);
        assert_relative_eq!(sol.xi.re, 10.4, epsilon = 1e-12);
        let f = inputs(0.32, 0.32, 13.0, 1.25, 42.0).propagation_factor();
        assert_relative_eq!(f.re, -0.343_868_669_330_750, epsilon = 1e-12);
        assert_relative_eq!(f.im, -0.749_913_865_850_036, epsilon = 1e-12);
    }

    #[test]
    fn resonant_equal_rabi_gives_quarter() {
        let sol = steady_state(&inputs(0.32, 0.32, 0.0, 1.25, 42.0)).unwrap();
        assert!((sol.probe_transmission - 0.25).abs() < 1e-6);
        assert!((sol.signal_efficiency - 0.25).abs() < 1e-6);
    }

    #[test]
    fn zero_length_medium_is_identity() {
        let sol = steady_state(&inputs(0.2, 0.7, 5.0, 1.25, 0.0)).unwrap();
        assert_eq!(sol.probe_ratio, Complex64::new(1.0, 0.0));
        assert_eq!(sol.signal_ratio, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn no_drive_leaves_probe_untouched() {
        let sol = steady_state(&inputs(0.32, 0.0, 13.0, 1.25, 42.0)).unwrap();
        assert_eq!(sol.probe_ratio, Complex64::new(1.0, 0.0));
        assert_eq!(sol.signal_efficiency, 0.0);
    }

    #[test]
    fn no_coupling_gives_no_signal() {
        let sol = steady_state(&inputs(0.0, 0.4, 3.0, 1.25, 42.0)).unwrap();
        assert_eq!(sol.signal_efficiency, 0.0);
    }

    #[test]
    fn zero_rabi_is_a_domain_error() {
        assert!(matches!(
            steady_state(&inputs(0.0, 0.0, 0.0, 1.25, 42.0)),
            Err(FwmError::Domain(_))
        ));
        assert!(steady_state(&inputs(0.3, 0.3, 0.0, 0.0, 42.0)).is_err());
        assert!(steady_state(&inputs(0.3, 0.3, 0.0, 1.0, -1.0)).is_err());
    }

    #[test]
    fn total_transmission_limits() {
        assert_relative_eq!(
            total_transmission(&inputs(0.3, 0.5, 2.0, 1.25, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            total_transmission(&inputs(0.32, 0.32, 0.0, 1.25, 1e4)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn resonant_efficiency_saturates_with_depth() {
        let at = |alpha| steady_state(&inputs(0.3, 0.45, 0.0, 1.25, alpha)).unwrap().signal_efficiency;
        assert!((at(200.0) - at(400.0)).abs() < 1e-9);
        let mut prev = 0.0;
        for k in 0..200 {
            let e = at(k as f64 * 0.5);
            assert!(e >= prev - 1e-15, "not monotone at alpha={}", k as f64 * 0.5);
            prev = e;
        }
    }

    #[test]
    fn large_depth_detuning_sweep_nearly_complete_conversion() {
        let base = inputs(0.32, 0.32, 0.0, 1.25, 500.0);
        let deltas: Vec<f64> = (0..=1500).map(|k| k as f64 * 0.1).collect();
        let sweep = efficiency_vs_detuning(&base, &deltas).unwrap();
        let peak = sweep
            .iter()
            .max_by(|a, b| a.signal_efficiency.total_cmp(&b.signal_efficiency))
            .unwrap();
        assert!(peak.signal_efficiency >= 0.95);
        assert!((peak.delta - 101.0).abs() < 1.0);
        assert!((sweep[0].signal_efficiency - 0.25).abs() < 1e-6);

        let single = efficiency_vs_detuning(&base, &[13.0]).unwrap();
        let direct = steady_state(&SteadyStateInputs { delta: 13.0, ..base }).unwrap();
        assert_eq!(single[0].signal_efficiency, direct.signal_efficiency);
        assert_eq!(single[0].probe_transmission, direct.probe_transmission);
    }

    #[test]
    fn non_monotone_grid_rejected() {
        let base = inputs(0.32, 0.32, 0.0, 1.25, 50.0);
        assert!(efficiency_vs_detuning(&base, &[0.0, 2.0, 1.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_inputs() -> impl Strategy<Value = SteadyStateInputs> {
            (0.01f64..2.0, 0.0f64..2.0, -100.0f64..100.0, 0.1f64..3.0, 0.0f64..600.0)
                .prop_map(|(oc, od, d, g, a)| inputs(oc, od, d, g, a))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn sum_matches_closed_form_total(inp in arb_inputs()) {
                let sol = steady_state(&inp).unwrap();
                let total = total_transmission(&inp).unwrap();
                prop_assert!((sol.probe_transmission + sol.signal_efficiency - total).abs() < 1e-12);
                prop_assert!(total <= 1.0 + 1e-15);
            }

            #[test]
            fn propagation_factor_is_contractive(inp in arb_inputs()) {
                prop_assume!(inp.alpha > 1e-6);
                prop_assert!(inp.propagation_factor().norm() < 1.0);
            }

            #[test]
            fn resonant_swap_symmetry(oc in 0.01f64..2.0, od in 0.01f64..2.0, g in 0.1f64..3.0, a in 0.0f64..300.0) {
                let s1 = steady_state(&inputs(oc, od, 0.0, g, a)).unwrap();
                let s2 = steady_state(&inputs(od, oc, 0.0, g, a)).unwrap();
                prop_assert!((s1.signal_ratio.norm() - s2.signal_ratio.norm()).abs() < 1e-14);
            }
        }
    }
}
