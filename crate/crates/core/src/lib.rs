//! Bayesian smoothing of qubit observables through discrete Wigner
//! quasi-probabilities.
//!
//! States and measurement effects of one or two qubits are mapped to
//! real-valued tables on a discrete phase space. Multiplying a predictive
//! table by a retrodictive one and normalizing gives the smoothing
//! (quasi-)posterior of the phase-space variables at an intermediate time.

pub mod aav;
pub mod error;
pub mod format;
pub mod named;
pub mod qops;
pub mod random;
pub mod series;
pub mod smoothing;
pub mod stabilizer;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
