//! Simulation and analysis of two-photon interference with temporally
//! separated photons in Mach-Zehnder and polarization-based Michelson
//! interferometers.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: frequency grids, source models and the joint spectral amplitude.
//! - [`optics`]: mode-labelled two-photon states, linear-optical elements and a
//!   brute-force operator oracle for coincidence probabilities.
//! - [`fringe`]: coincidence interferograms from the spectral integrals and from
//!   the phenomenological envelope model.
//! - [`lab`]: detection, accidentals, Poisson counts, phase randomization and
//!   canned scenarios.
//! - [`fit`]: least-squares recovery of visibilities, widths and carrier periods.
//!
//! Internal units are SI throughout: angular frequencies in rad/s, delays in
//! seconds, path lengths in metres.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fit;
pub mod fringe;
pub mod lab;
pub mod optics;
pub mod spectral;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of light with vacuum wavelength `wavelength` (m).
pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength
}

/// Vacuum wavelength (m) of light with angular frequency `omega` (rad/s).
pub fn wavelength(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega
}
