//! Decomposition of one-dimensional scattering on symmetric barriers into
//! coherently evolving transmission and reflection sub-processes.
//!
//! Units throughout: ħ = m = 1, so `E = k²/2` and the group velocity is `k`.

pub mod cli;
pub mod clocks;
pub mod config;
pub mod error;
pub mod field;
pub mod oracle;
pub mod packet;
pub mod potential;
pub mod splitting;
pub mod stationary;

pub use error::{Error, Result};
pub use num_complex::Complex64;
