//! Simulation and analysis of EIT-based four-wave mixing in a four-level
//! atomic medium.
//!
//! * [`units`]: physical constants and laboratory-unit conversions.
//! * [`steady`]: closed-form steady-state probe and signal outputs.
//! * [`bloch`]: linearized optical Bloch equations for one position slice.
//! * [`propagator`]: pulsed Maxwell-Bloch propagation through the medium.
//! * [`harris_hau`]: pulsed-regime analytic efficiency and its parameters.
//! * [`fitting`]: recovery of the driving Rabi frequency and ground-state
//!   dephasing from measured traces.
//! * [`experiment`]: configuration files, sweeps and bundled figure setups.
//!
//! Rates and Rabi frequencies are in units of Γ, times in Γ⁻¹, unless a name
//! says otherwise (`_us`, `_s`).

pub mod bloch;
pub mod error;
pub mod experiment;
pub mod fitting;
pub mod harris_hau;
pub mod nelder_mead;
pub mod propagator;
pub mod pulse;
pub mod steady;
pub mod trace;
pub mod units;

pub use bloch::{CoherenceState, FieldSample, SystemParams};
pub use error::{FwmError, Result};
pub use propagator::{FieldEnvelope, PropagationGrid, PropagationResult};
pub use pulse::{Coupling, PulseShape, PulseSpec};
pub use steady::{SteadyStateInputs, SteadyStateSolution};
pub use units::PhysicalConstants;
