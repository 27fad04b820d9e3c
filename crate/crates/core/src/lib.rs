//! Numerical workbench for the multisetting correlation Bell inequality on
//! `N` qubits with `M` equatorial settings per party.
//!
//! - [`scenario`]: angle scheme, coefficient tensor, analytic and brute-force
//!   local-realistic bounds.
//! - [`quantum`]: states, Bell operators, correlation tensors, PPT checks.
//! - [`analysis`]: violation factors, the frame-optimized violation condition,
//!   PPT bounds and the settings sweep.
//! - [`ccp`]: the associated communication-complexity task and its protocols.

pub mod analysis;
pub mod ccp;
pub mod error;
pub mod linalg;
pub mod quantum;
pub mod scenario;

pub use error::{Error, Result};
