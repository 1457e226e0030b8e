use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::spectral::{SpectralSummary, FWHM_PER_SIGMA};
use crate::{Error, Result};

/// Full width at half maximum of `sinc`, in units of its first-zero distance.
pub const SINC_FWHM_PER_ZERO: f64 = 1.206_709_128_803_08;

/// sinc(u) = sin(πu)/(πu); its first zeros sit at u = ±1.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - (PI * u).powi(2) / 6.0
    } else {
        (PI * u).sin() / (PI * u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FShape {
    Sinc,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GShape {
    Gaussian,
}

/// Phenomenological central-fringe model: a phase-insensitive envelope `f`
/// plus a carrier at the pump wavelength under a second envelope `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeModel {
    pub n0: f64,
    pub visibility: f64,
    /// Pump wavelength (m), the carrier period in Δx₂.
    pub lambda_p: f64,
    /// Width of `f` (m): first-zero distance for a sinc, standard deviation for a Gaussian.
    pub sigma_s: f64,
    /// Standard deviation of `g` (m).
    pub sigma_t: f64,
    pub f_shape: FShape,
    pub g_shape: GShape,
}

impl EnvelopeModel {
    /// Model whose `f` and `g` reproduce the measured half-maximum widths of
    /// a source. With `n0 = ¼` and unit visibility the output is a probability.
    pub fn from_summary(summary: &SpectralSummary, lambda_p: f64) -> Self {
        Self {
            n0: 0.25,
            visibility: 1.0,
            lambda_p,
            sigma_s: summary.single_photon_coherence_length / SINC_FWHM_PER_ZERO,
            sigma_t: summary.two_photon_coherence_length / FWHM_PER_SIGMA,
            f_shape: FShape::Sinc,
            g_shape: GShape::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::invalid("visibility", "must lie in [0, 1]"));
        }
        for (name, v) in [
            ("lambda_p", self.lambda_p),
            ("sigma_s", self.sigma_s),
            ("sigma_t", self.sigma_t),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        if !(self.n0 >= 0.0 && self.n0.is_finite()) {
            return Err(Error::invalid("n0", "must be non-negative and finite"));
        }
        Ok(())
    }

    pub fn f(&self, dx2: f64) -> f64 {
        match self.f_shape {
            FShape::Sinc => sinc(dx2 / self.sigma_s),
            FShape::Gaussian => (-0.5 * (dx2 / self.sigma_s).powi(2)).exp(),
        }
    }

    pub fn g(&self, dx2: f64) -> f64 {
        match self.g_shape {
            GShape::Gaussian => (-0.5 * (dx2 / self.sigma_t).powi(2)).exp(),
        }
    }
}

/// N₀{2 + V[f(Δx₂) + g(Δx₂) cos(2πΔx₂/λ_p)]}.
pub fn envelope_probability(model: &EnvelopeModel, dx2: f64) -> f64 {
    let carrier = (2.0 * PI * dx2 / model.lambda_p).cos();
    model.n0 * (2.0 + model.visibility * (model.f(dx2) + model.g(dx2) * carrier))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> EnvelopeModel {
        EnvelopeModel {
            n0: 1.0,
            visibility: 1.0,
            lambda_p: 775e-9,
            sigma_s: 0.384e-3,
            sigma_t: 1.17e-3 / FWHM_PER_SIGMA,
            f_shape: FShape::Sinc,
            g_shape: GShape::Gaussian,
        }
    }

    #[test]
    fn peak_and_baseline() {
        let m = model();
        assert_eq!(m.f(0.0), 1.0);
        assert_eq!(m.g(0.0), 1.0);
        assert_eq!(envelope_probability(&m, 0.0), 4.0);
        assert!((envelope_probability(&m, 20e-3) - 2.0).abs() < 0.01);
    }

    #[test]
    fn sinc_half_width_constant() {
        // Bisection for sinc(u) = ½, independent of the stored constant.
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if sinc(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((2.0 * lo - SINC_FWHM_PER_ZERO).abs() < 1e-12);
        assert!(sinc(1.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut m = model();
        assert!(m.validate().is_ok());
        m.visibility = 1.2;
        assert!(m.validate().is_err());
        m.visibility = 0.5;
        m.sigma_s = 0.0;
        assert!(m.validate().is_err());
    }
}
