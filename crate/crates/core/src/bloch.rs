//! Linearized optical Bloch equations for the three coherences ρ31, ρ41, ρ21
//! of the four-level system, in the weak-probe limit ρ11 ≈ 1:
//!
//! ```text
//! dρ41/dt = (i/2)Ω_s + (i/2)Ω_d ρ21 + (iΔ − γ41/2) ρ41
//! dρ31/dt = (i/2)Ω_p + (i/2)Ω_c ρ21 − (γ31/2) ρ31
//! dρ21/dt = (i/2)Ω_c* ρ31 + (i/2)Ω_d* ρ41 − (γ21/2) ρ21
//! ```
//!
//! No population equations are carried, so results are only meaningful while
//! |Ω_p|, |Ω_s| ≪ Ω_c. Rates are in Γ units, times in Γ⁻¹.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{FwmError, Result};

/// Largest `dt · λ` accepted by [`step`], where λ is a Gershgorin bound on the
/// spectral radius of the homogeneous Bloch matrix. Classical RK4 is stable up
/// to ≈2.78 on the negative real axis and ≈2.83 on the imaginary axis.
pub const RK4_STABILITY_LIMIT: f64 = 2.5;

/// Magnitude below which a coherence or field component is set to zero
/// during integration. Freely decaying tails would otherwise reach subnormal
/// floats, which are very slow, and products of two tails must stay normal.
pub const FLUSH_THRESHOLD: f64 = 1e-150;

/// `z` with parts below [`FLUSH_THRESHOLD`] in magnitude set to zero.
#[inline(always)]
pub(crate) fn flush(z: Complex64) -> Complex64 {
    let part = |v: f64| if v.abs() < FLUSH_THRESHOLD { 0.0 } else { v };
    Complex64::new(part(z.re), part(z.im))
}

const HALF_I: Complex64 = Complex64::new(0.0, 0.5);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Nominal coupling Rabi frequency Ω_c.
    pub omega_c: f64,
    /// Driving detuning Δ.
    pub delta: f64,
    pub gamma21: f64,
    pub gamma31: f64,
    pub gamma41: f64,
    /// Optical depth, shared by the probe and signal transitions.
    pub alpha: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_c", self.omega_c),
            ("delta", self.delta),
            ("gamma21", self.gamma21),
            ("gamma31", self.gamma31),
            ("gamma41", self.gamma41),
            ("alpha", self.alpha),
        ] {
            if !v.is_finite() {
                return Err(FwmError::config(name, format!("must be finite, got {v}")));
            }
        }
        if !(self.gamma31 > 0.0) {
            return Err(FwmError::config("gamma31", "must be positive"));
        }
        if !(self.gamma41 > 0.0) {
            return Err(FwmError::config("gamma41", "must be positive"));
        }
        if self.gamma21 < 0.0 {
            return Err(FwmError::config("gamma21", "must be non-negative"));
        }
        if self.alpha < 0.0 {
            return Err(FwmError::config("alpha", "must be non-negative"));
        }
        Ok(())
    }
}

/// Slowly varying coherences at one position slice.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoherenceState {
    pub rho31: Complex64,
    pub rho41: Complex64,
    pub rho21: Complex64,
}

impl CoherenceState {
    pub const ZERO: Self = Self {
        rho31: Complex64::new(0.0, 0.0),
        rho41: Complex64::new(0.0, 0.0),
        rho21: Complex64::new(0.0, 0.0),
    };

    pub fn new(rho31: Complex64, rho41: Complex64, rho21: Complex64) -> Self {
        Self { rho31, rho41, rho21 }
    }

    pub fn is_finite(&self) -> bool {
        self.rho31.is_finite() && self.rho41.is_finite() && self.rho21.is_finite()
    }

    /// Largest component modulus.
    /// Flushes components below [`FLUSH_THRESHOLD`] to zero.
    #[inline(always)]
    fn flushed(self) -> Self {
        Self {
            rho31: flush(self.rho31),
            rho41: flush(self.rho41),
            rho21: flush(self.rho21),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.rho31.norm().max(self.rho41.norm()).max(self.rho21.norm())
    }
}

impl Add for CoherenceState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.rho31 + o.rho31, self.rho41 + o.rho41, self.rho21 + o.rho21)
    }
}

impl Sub for CoherenceState {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.rho31 - o.rho31, self.rho41 - o.rho41, self.rho21 - o.rho21)
    }
}

impl Mul<Complex64> for CoherenceState {
    type Output = Self;
    fn mul(self, k: Complex64) -> Self {
        Self::new(self.rho31 * k, self.rho41 * k, self.rho21 * k)
    }
}

impl Mul<f64> for CoherenceState {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.rho31 * k, self.rho41 * k, self.rho21 * k)
    }
}

/// Instantaneous Rabi frequencies of all four fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub probe: Complex64,
    pub signal: Complex64,
    pub coupling: Complex64,
    pub driving: Complex64,
}

impl FieldSample {
    /// Fields with the coupling held at `params.omega_c`.
    pub fn with_constant_coupling(
        params: &SystemParams,
        probe: Complex64,
        signal: Complex64,
        driving: Complex64,
    ) -> Self {
        Self {
            probe,
            signal,
            coupling: Complex64::new(params.omega_c, 0.0),
            driving,
        }
    }

    fn midpoint(&self, other: &Self) -> Self {
        Self {
            probe: 0.5 * (self.probe + other.probe),
            signal: 0.5 * (self.signal + other.signal),
            coupling: 0.5 * (self.coupling + other.coupling),
            driving: 0.5 * (self.driving + other.driving),
        }
    }
}

pub fn coherence_derivatives(
    state: &CoherenceState,
    fields: &FieldSample,
    params: &SystemParams,
) -> CoherenceState {
    Rates::new(params).derivative(state, fields)
}

/// Precomputed decay/detuning coefficients.
#[derive(Debug, Clone, Copy)]
struct Rates {
    half_g31: f64,
    half_g21: f64,
    a41: Complex64,
}

impl Rates {
    fn new(params: &SystemParams) -> Self {
        Self {
            half_g31: 0.5 * params.gamma31,
            half_g21: 0.5 * params.gamma21,
            a41: Complex64::new(-0.5 * params.gamma41, params.delta),
        }
    }

    #[inline(always)]
    fn derivative(&self, s: &CoherenceState, f: &FieldSample) -> CoherenceState {
        CoherenceState {
            rho31: HALF_I * (f.probe + f.coupling * s.rho21) - self.half_g31 * s.rho31,
            rho41: HALF_I * (f.signal + f.driving * s.rho21) + self.a41 * s.rho41,
            rho21: HALF_I * (f.coupling.conj() * s.rho31 + f.driving.conj() * s.rho41)
                - self.half_g21 * s.rho21,
        }
    }

    #[inline(always)]
    fn rk4(&self, s: &CoherenceState, now: &FieldSample, next: &FieldSample, dt: f64) -> CoherenceState {
        let mid = now.midpoint(next);
        let k1 = self.derivative(s, now);
        let k2 = self.derivative(&(*s + k1 * (0.5 * dt)), &mid);
        let k3 = self.derivative(&(*s + k2 * (0.5 * dt)), &mid);
        let k4 = self.derivative(&(*s + k3 * dt), next);
        *s + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0)
    }
}

/// Gershgorin bound on the spectral radius of the homogeneous Bloch matrix for
/// the given coupling and driving amplitudes.
pub fn rate_bound(params: &SystemParams, coupling: f64, driving: f64) -> f64 {
    let row31 = 0.5 * params.gamma31 + 0.5 * coupling;
    let row41 = Complex64::new(-0.5 * params.gamma41, params.delta).norm() + 0.5 * driving;
    let row21 = 0.5 * (coupling + driving) + 0.5 * params.gamma21;
    row31.max(row41).max(row21)
}

/// Largest stable time step for the given coupling and driving amplitudes.
pub fn max_stable_dt(params: &SystemParams, coupling: f64, driving: f64) -> f64 {
    RK4_STABILITY_LIMIT / rate_bound(params, coupling, driving)
}

/// Advances `state` by one classical fourth-order Runge-Kutta step of length
/// `dt`, with the fields linearly interpolated at the half step.
pub fn step(
    state: &CoherenceState,
    now: &FieldSample,
    next: &FieldSample,
    params: &SystemParams,
    dt: f64,
) -> Result<CoherenceState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(FwmError::config("dt", format!("must be positive, got {dt}")));
    }
    let coupling = now.coupling.norm().max(next.coupling.norm());
    let driving = now.driving.norm().max(next.driving.norm());
    let limit = max_stable_dt(params, coupling, driving);
    if dt > limit {
        return Err(FwmError::config(
            "dt",
            format!("{dt} exceeds the RK4 stability bound {limit:.4} Γ⁻¹ for these parameters"),
        ));
    }
    Ok(Rates::new(params).rk4(state, now, next, dt))
}

/// One RK4 step written as an affine map. For fixed coupling and driving the
/// classical RK4 update is linear in the state and in the probe/signal values
/// at both ends of the step, so its coefficients can be tabulated once:
///
/// x' = M x + f_p0 Ω_p(t) + f_s0 Ω_s(t) + f_p1 Ω_p(t+dt) + f_s1 Ω_s(t+dt)
#[derive(Debug, Clone, Copy)]
struct StepMap {
    coupling: Complex64,
    driving: Complex64,
    m: [CoherenceState; 3],
    f_p0: CoherenceState,
    f_s0: CoherenceState,
    f_p1: CoherenceState,
    f_s1: CoherenceState,
}

impl StepMap {
    fn new(rates: &Rates, coupling: Complex64, driving: Complex64, dt: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let fields = |probe, signal| FieldSample {
            probe,
            signal,
            coupling,
            driving,
        };
        let quiet = fields(zero, zero);
        let column = |s: CoherenceState| rates.rk4(&s, &quiet, &quiet, dt);
        let forced = |now: FieldSample, next: FieldSample| rates.rk4(&CoherenceState::ZERO, &now, &next, dt);
        Self {
            coupling,
            driving,
            m: [
                column(CoherenceState::new(one, zero, zero)),
                column(CoherenceState::new(zero, one, zero)),
                column(CoherenceState::new(zero, zero, one)),
            ],
            f_p0: forced(fields(one, zero), quiet),
            f_s0: forced(fields(zero, one), quiet),
            f_p1: forced(quiet, fields(one, zero)),
            f_s1: forced(quiet, fields(zero, one)),
        }
    }

    #[inline(always)]
    fn apply(&self, s: &CoherenceState, p0: Complex64, s0: Complex64, p1: Complex64, s1: Complex64) -> CoherenceState {
        let [a, b, c] = &self.m;
        // the forcing terms are off the step-to-step dependency chain
        let drive = |f: fn(&CoherenceState) -> Complex64| {
            f(&self.f_p0) * p0 + f(&self.f_s0) * s0 + (f(&self.f_p1) * p1 + f(&self.f_s1) * s1)
        };
        let f31 = drive(|x| x.rho31);
        let f41 = drive(|x| x.rho41);
        let f21 = drive(|x| x.rho21);
        CoherenceState {
            rho31: f31 + (a.rho31 * s.rho31 + b.rho31 * s.rho41 + c.rho31 * s.rho21),
            rho41: f41 + (a.rho41 * s.rho31 + b.rho41 * s.rho41 + c.rho41 * s.rho21),
            rho21: f21 + (a.rho21 * s.rho31 + b.rho21 * s.rho41 + c.rho21 * s.rho21),
        }
    }
}

/// Integrates one slice from the zero state over a uniform time grid and
/// writes ρ31 and ρ41 at every grid point. All slices must have equal length.
/// The caller is responsible for having checked the step against
/// [`max_stable_dt`].
///
/// Steps over which the coupling and driving are constant use a tabulated
/// [`StepMap`]; steps across pulse edges use the direct RK4 stages.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate_slice(
    params: &SystemParams,
    dt: f64,
    probe: &[Complex64],
    signal: &[Complex64],
    coupling: &[Complex64],
    driving: &[Complex64],
    rho31: &mut [Complex64],
    rho41: &mut [Complex64],
) {
    let n = probe.len();
    debug_assert!(signal.len() == n && coupling.len() == n && driving.len() == n);
    debug_assert!(rho31.len() == n && rho41.len() == n);
    if n == 0 {
        return;
    }
    let rates = Rates::new(params);
    let mut map: Option<StepMap> = None;
    let mut state = CoherenceState::ZERO;
    rho31[0] = state.rho31;
    rho41[0] = state.rho41;
    for k in 1..n {
        let (c0, c1, d0, d1) = (coupling[k - 1], coupling[k], driving[k - 1], driving[k]);
        state = if c0 == c1 && d0 == d1 {
            if !matches!(&map, Some(m) if m.coupling == c0 && m.driving == d0) {
                map = Some(StepMap::new(&rates, c0, d0, dt));
            }
            let m = map.as_ref().unwrap();
            m.apply(&state, probe[k - 1], signal[k - 1], probe[k], signal[k])
        } else {
            let now = FieldSample {
                probe: probe[k - 1],
                signal: signal[k - 1],
                coupling: c0,
                driving: d0,
            };
            let next = FieldSample {
                probe: probe[k],
                signal: signal[k],
                coupling: c1,
                driving: d1,
            };
            rates.rk4(&state, &now, &next, dt)
        };
        state = state.flushed();
        rho31[k] = state.rho31;
        rho41[k] = state.rho41;
    }
}

/// Solves the Bloch equations with all time derivatives set to zero.
pub fn steady_coherences(fields: &FieldSample, params: &SystemParams) -> Result<CoherenceState> {
    params.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let (oc, od) = (fields.coupling, fields.driving);
    // Unknowns ordered (ρ31, ρ41, ρ21).
    let mut a = [
        [Complex64::new(-0.5 * params.gamma31, 0.0), zero, HALF_I * oc],
        [zero, Complex64::new(-0.5 * params.gamma41, params.delta), HALF_I * od],
        [HALF_I * oc.conj(), HALF_I * od.conj(), Complex64::new(-0.5 * params.gamma21, 0.0)],
    ];
    let mut b = [-HALF_I * fields.probe, -HALF_I * fields.signal, zero];
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);

    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[pivot][col].norm() <= 1e-14 * scale {
            return Err(FwmError::Singular(format!(
                "no unique steady state for omega_c = {oc}, omega_d = {od}, delta = {}, gamma21 = {}",
                params.delta, params.gamma21
            )));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                let sub = factor * a[col][k];
                a[row][k] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }
    let mut x = [zero; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(CoherenceState::new(x[0], x[1], x[2]))
}
