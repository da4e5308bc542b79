//! Factorization of N-level ladder unitaries into resonant pulse sequences,
//! pulse-schedule synthesis and simulation.
//!
//! The pipeline is: pick a [`system::LevelSystem`], build a target with one of
//! the [`schemes`] (or any unitary), factor it with [`decompose`], turn the
//! factors into a [`pulse::PulseSchedule`], then propagate with [`dynamics`].

pub mod cli;
pub mod constants;
pub mod decompose;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod ode;
pub mod pulse;
pub mod schemes;
pub mod system;

pub use decompose::{decompose, decompose_mod_phase, eliminate_phases, reconstruct, Factorization, Mode};
pub use dynamics::{propagate_ode, propagate_piecewise, QuantumState, SimOptions, TimeSeries};
pub use error::{Error, Result};
pub use linalg::{factor_matrix, ComplexMatrix, ComplexVector, RotationFactor};
pub use pulse::{schedule_from_factorization, validate_schedule, Policy, PulseSchedule, Shape};
pub use system::{hf4_preset, rb4_preset, LevelSystem};
