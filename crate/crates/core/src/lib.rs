//! Simulation core for optical refrigeration of a driven few-level
//! solid-state emitter.
//!
//! The crate builds a Lindblad generator for a 2-4 level emitter coupled
//! to a thermal phonon bath and a zero-temperature radiation bath, solves
//! for the steady state, evaluates emission spectra and heat currents,
//! optimizes the drive detuning for cooling power, and converts the
//! microscopic results into laboratory-scale budget estimates.
//!
//! All angular frequencies are in rad/ps with hbar = 1; see [`units`].

pub mod budget;
pub mod config;
pub mod error;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod spectrum;
pub mod steady_state;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
