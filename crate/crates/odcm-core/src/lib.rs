//! Energy-constrained optimal dephasing control by modulation.
//!
//! Numerical core for finding the control-field modulation that minimizes a
//! qubit's average dephasing rate under an energy budget, for an arbitrary
//! dephasing spectrum. The crate covers:
//!
//! - noise correlation functions and dephasing spectra, with Fourier
//!   conversion between them ([`spectra`]);
//! - control fields (accumulated phase / amplitude), their finite-time
//!   spectra, energy, and dynamical-decoupling pulse trains ([`control`]);
//! - the average modified dephasing rate in both time and frequency domains
//!   ([`rate`]);
//! - the nonlinear energy-constrained Euler-Lagrange solver ([`el`]);
//! - the linearized Euler-Lagrange solver with energy and positivity
//!   constraints ([`linearized`]);
//! - an independent Monte-Carlo validation of the rate via stationary
//!   Gaussian noise sampling ([`mc`]).
//!
//! Everything is `no_std` + `alloc`; IO, file formats and the CLI live in the
//! companion `odcm` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod control;
pub mod el;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod linearized;
pub mod mc;
pub mod rate;
pub mod spectra;

pub use error::Error;
pub use grid::{FrequencyGrid, TimeGrid};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
