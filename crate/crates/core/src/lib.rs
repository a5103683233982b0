//! Quantum Fisher information of subsystems of chaotic spin chains.
//!
//! The crate evolves pure states under dense spin-chain Hamiltonians (and
//! open chains under a Lindblad master equation), measures how much a
//! subsystem knows about the elapsed time, and compares the numbers with
//! random-state closed forms. An estimation layer turns measurement records
//! into time estimates.

pub mod analytic_predictions;
pub mod dynamics;
pub mod error;
pub mod estimation_lab;
pub mod experiment_harness;
pub mod fisher_metrics;
pub mod hilbert_core;
pub mod model_library;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
