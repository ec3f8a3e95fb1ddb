//! Simulation and verification toolkit for time-varying and responsive
//! fractional Brownian motion.

pub mod attention;
pub mod cli;
pub mod error;
pub mod hurst;
pub mod quad;
pub mod rfbm;
pub mod rng;
pub mod specfun;
pub mod tvfbm;
pub mod verify;
pub mod stats;

pub use error::{LabError, Result};
