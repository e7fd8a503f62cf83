//! Superpositions of negative binomial states of a single bosonic mode.
//!
//! States are carried as amplitude vectors over a truncated number basis
//! ([`fock`]). The closed forms in [`stats`] and [`algebra`] are checked
//! against brute-force sums over those vectors, and [`generation`] simulates
//! the Kerr-medium and dispersive cavity-QED preparation schemes.

pub mod algebra;
pub mod error;
pub mod fock;
pub mod generation;
pub mod special;
pub mod states;
pub mod stats;
pub mod sweep;
pub mod verify;

pub use error::{NbsError, Result};
pub use fock::{FockVector, TruncationPolicy};
pub use states::NbsParams;
pub use stats::{MandelQ, PhotonStats};

pub use num_complex::Complex64 as C64;
