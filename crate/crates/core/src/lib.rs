#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x > 0.0) also rejects NaN

pub mod bloch;
pub mod cli;
pub mod config;
pub mod dressed;
pub mod error;
pub mod gate;
pub mod params;
pub mod propagation;
pub mod quantum_phase;
pub mod susceptibility;

pub use error::{Result, TripodError};
pub use params::*;
