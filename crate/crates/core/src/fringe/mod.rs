//! Coincidence probabilities behind the second beamsplitter as functions of
//! the input delay τ₁ = Δx₁/c and the scan delay τ₂ = Δx₂/c.
//!
//! The general integral is evaluated on the source grid with kernels built as
//! outer products of one-dimensional phase vectors, so every evaluation is a
//! handful of O(n²) bilinear forms. Closed forms valid at τ₁ = 0, near τ₂ = 0
//! with τ₁ large, and near τ₂ = ±τ₁ are provided for cross-checks and speed.

mod envelope;
mod interferogram;
mod tables;

pub use envelope::{envelope_probability, sinc, EnvelopeModel, FShape, GShape, SINC_FWHM_PER_ZERO};
pub use interferogram::{scan, Interferogram, Metadata, ScanMode, ScanRange, Scanner, CSV_HEADER};
pub use tables::{InputDelayFold, MarginalTables, PhaseComponents};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::JointSpectralAmplitude;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Exchange integrals are real for any amplitude; a larger imaginary part
/// means the quadrature has lost its symmetry.
pub const IMAGINARY_LIMIT: f64 = 1e-9;

/// Probabilities this far outside [0, 1] are clamped; beyond it they are errors.
pub const PROBABILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    /// Input-stage path difference between the photons (m).
    pub delta_x1: f64,
    /// Scanned path difference between the interferometer arms (m).
    pub delta_x2: f64,
    /// Single-photon phase on the delayed arm beyond the carrier (rad).
    #[serde(default)]
    pub phase_offset: f64,
}

impl DelayConfig {
    pub fn new(delta_x1: f64, delta_x2: f64) -> Self {
        Self {
            delta_x1,
            delta_x2,
            phase_offset: 0.0,
        }
    }

    pub fn tau1(&self) -> f64 {
        self.delta_x1 / SPEED_OF_LIGHT
    }

    pub fn tau2(&self) -> f64 {
        self.delta_x2 / SPEED_OF_LIGHT
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_x1", self.delta_x1),
            ("delta_x2", self.delta_x2),
            ("phase_offset", self.phase_offset),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

fn phase_vector(omega: &[f64], tau: f64) -> Vec<Complex64> {
    omega
        .iter()
        .map(|&w| Complex64::from_polar(1.0, w * tau))
        .collect()
}

fn conj(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|c| c.conj()).collect()
}

/// Σ_ij M_ij a_i b_j for a real row-major matrix.
fn bilinear_real(m: &[f64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let n = a.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, ai) in a.iter().enumerate() {
        let row = &m[i * n..(i + 1) * n];
        let s: Complex64 = row.iter().zip(b).map(|(&mij, bj)| bj * mij).sum();
        total += ai * s;
    }
    total
}

fn bilinear(m: &[Complex64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let n = a.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, ai) in a.iter().enumerate() {
        let row = &m[i * n..(i + 1) * n];
        let s: Complex64 = row.iter().zip(b).map(|(mij, bj)| mij * bj).sum();
        total += ai * s;
    }
    total
}

pub(crate) fn checked_probability(p: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Precomputed quadrature products for repeated evaluation on one source.
#[derive(Debug, Clone)]
pub struct FringeEvaluator {
    omega: Vec<f64>,
    /// w_i w_j |Φ_ij|²
    intensity: Vec<f64>,
    /// w_i w_j Φ*_ji Φ_ij
    exchange: Vec<Complex64>,
    symmetric: bool,
    alias_period: f64,
}

impl FringeEvaluator {
    pub fn new(jsa: &JointSpectralAmplitude) -> Self {
        Self {
            omega: jsa.grid().points().to_vec(),
            intensity: jsa.weighted_intensity(),
            exchange: jsa.weighted_exchange(),
            symmetric: jsa.is_symmetric(),
            alias_period: jsa.grid().alias_period(),
        }
    }

    fn warn_alias(&self, tau: f64) {
        if tau.abs() > 0.5 * self.alias_period {
            log::warn!(
                "delay {:.3e} s exceeds half the grid alias period {:.3e} s; results wrap",
                tau,
                self.alias_period
            );
        }
    }

    fn exchange_at(&self, tau: f64) -> Complex64 {
        let v = phase_vector(&self.omega, tau);
        bilinear(&self.exchange, &v, &conj(&v))
    }

    fn intensity_difference(&self, tau: f64) -> Complex64 {
        let v = phase_vector(&self.omega, tau);
        bilinear_real(&self.intensity, &v, &conj(&v))
    }

    fn intensity_sum(&self, tau: f64, phase: f64) -> Complex64 {
        let v = phase_vector(&self.omega, tau);
        bilinear_real(&self.intensity, &v, &v) * Complex64::from_polar(1.0, 2.0 * phase)
    }

    /// Full coincidence probability for arbitrary delays.
    pub fn full(&self, delays: &DelayConfig) -> Result<f64> {
        delays.validate()?;
        let (t1, t2, phi) = (delays.tau1(), delays.tau2(), delays.phase_offset);
        for t in [t1, t2, t1 + t2, t1 - t2] {
            self.warn_alias(t);
        }
        let bunched = Complex64::from_polar(1.0, 2.0 * phi);

        // |Φ|² terms: one photon delayed, and both photons delayed.
        let a_diff = self.intensity_difference(-t2);
        let a_sum = self.intensity_sum(t2, phi);

        // Exchange terms Φ*(ω₂,ω₁)Φ(ω₁,ω₂).
        let p = phase_vector(&self.omega, t1 + t2);
        let q = phase_vector(&self.omega, t2 - t1);
        let b_cross = bilinear(&self.exchange, &p, &q) * bunched;
        let b_plus = self.exchange_at(t1 + t2);
        let b_minus = self.exchange_at(t1 - t2);

        let mut residue = b_plus.im.abs().max(b_minus.im.abs());
        if self.symmetric {
            residue = residue.max(a_diff.im.abs());
        }
        if residue > IMAGINARY_LIMIT {
            return Err(Error::ImaginaryResidue {
                residue,
                limit: IMAGINARY_LIMIT,
            });
        }
        let total = 2.0 * (a_diff + a_sum) + 2.0 * b_cross - b_plus - b_minus;
        checked_probability(0.5 + 0.125 * total.re)
    }

    /// τ₁ = 0 limit: the fringe of the path-entangled two-photon state.
    pub fn noon(&self, tau2: f64, phase: f64) -> Result<f64> {
        self.warn_alias(tau2);
        checked_probability(0.5 * (1.0 + self.intensity_sum(tau2, phase).re))
    }

    /// Large τ₁, τ₂ = Δτ near zero: HOM peak plus the phase-sensitive fringe.
    pub fn center(&self, dtau: f64, phase: f64) -> Result<f64> {
        self.warn_alias(dtau);
        let k = self.intensity_difference(dtau) + self.intensity_sum(dtau, phase);
        checked_probability(0.5 * (1.0 + 0.5 * k.re))
    }

    /// As [`center`](Self::center) with the phase-sensitive term averaged out.
    pub fn center_phase_averaged(&self, dtau: f64) -> Result<f64> {
        self.warn_alias(dtau);
        checked_probability(0.5 * (1.0 + 0.5 * self.intensity_difference(dtau).re))
    }

    /// Large τ₁, τ₂ = ∓τ₁ + Δτ: the quarter-amplitude HOM dip.
    pub fn side(&self, dtau: f64) -> Result<f64> {
        self.warn_alias(dtau);
        checked_probability(0.5 * (1.0 - 0.25 * self.intensity_difference(-dtau).re))
    }

    /// Single balanced beamsplitter with relative delay `tau` between inputs.
    pub fn hom(&self, tau: f64) -> Result<f64> {
        self.warn_alias(tau);
        let x = self.exchange_at(-tau);
        if x.im.abs() > IMAGINARY_LIMIT {
            return Err(Error::ImaginaryResidue {
                residue: x.im.abs(),
                limit: IMAGINARY_LIMIT,
            });
        }
        checked_probability(0.5 * (1.0 - x.re))
    }
}

pub fn coincidence_full(jsa: &JointSpectralAmplitude, delays: &DelayConfig) -> Result<f64> {
    FringeEvaluator::new(jsa).full(delays)
}

pub fn coincidence_noon(jsa: &JointSpectralAmplitude, tau2: f64) -> Result<f64> {
    FringeEvaluator::new(jsa).noon(tau2, 0.0)
}

pub fn coincidence_center(jsa: &JointSpectralAmplitude, dtau: f64) -> Result<f64> {
    FringeEvaluator::new(jsa).center(dtau, 0.0)
}

pub fn coincidence_center_phase_averaged(jsa: &JointSpectralAmplitude, dtau: f64) -> Result<f64> {
    FringeEvaluator::new(jsa).center_phase_averaged(dtau)
}

pub fn coincidence_side(jsa: &JointSpectralAmplitude, dtau: f64) -> Result<f64> {
    FringeEvaluator::new(jsa).side(dtau)
}

pub fn coincidence_hom(jsa: &JointSpectralAmplitude, tau: f64) -> Result<f64> {
    FringeEvaluator::new(jsa).hom(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{summarize, SourceModel};

    fn mzi() -> JointSpectralAmplitude {
        SourceModel::mzi_standard().build().unwrap()
    }

    #[test]
    fn noon_limits() {
        let jsa = mzi();
        let ev = FringeEvaluator::new(&jsa);
        assert!((ev.noon(0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        // Half a pump period: the carrier flips sign while the envelope is ~1.
        let half = 0.5 * 775e-9 / SPEED_OF_LIGHT;
        assert!(ev.noon(half, 0.0).unwrap() < 2e-3);
        let far = 6e-3 / SPEED_OF_LIGHT;
        assert!((ev.noon(far, 0.0).unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn center_and_side_at_zero() {
        let jsa = mzi();
        let ev = FringeEvaluator::new(&jsa);
        assert!((ev.center(0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((ev.center_phase_averaged(0.0).unwrap() - 0.75).abs() < 1e-12);
        assert!((ev.side(0.0).unwrap() - 0.375).abs() < 1e-12);
        let far = 6e-3 / SPEED_OF_LIGHT;
        assert!((ev.side(far).unwrap() - 0.5).abs() < 1e-2);
    }

    #[test]
    fn full_reduces_to_noon_at_zero_input_delay() {
        let jsa = mzi();
        let ev = FringeEvaluator::new(&jsa);
        for k in -40..=40 {
            let dx2 = k as f64 * 37.3e-6;
            let full = ev.full(&DelayConfig::new(0.0, dx2)).unwrap();
            let noon = ev.noon(dx2 / SPEED_OF_LIGHT, 0.0).unwrap();
            assert!((full - noon).abs() < 1e-10, "dx2 = {dx2}: {full} vs {noon}");
        }
    }

    #[test]
    fn hom_dip_is_complete_for_symmetric_source() {
        let ev = FringeEvaluator::new(&mzi());
        assert!(ev.hom(0.0).unwrap() < 1e-12);
        let w = summarize(&mzi()).single_photon_coherence_time;
        assert!((ev.hom(0.5 * w).unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn phase_offset_shifts_the_bunched_term_only() {
        let jsa = mzi();
        let ev = FringeEvaluator::new(&jsa);
        let d = DelayConfig {
            phase_offset: std::f64::consts::FRAC_PI_2,
            ..DelayConfig::new(0.0, 0.0)
        };
        // e^{2iφ} = −1 turns the NOON maximum into a minimum.
        assert!(ev.full(&d).unwrap() < 1e-12);
    }

    #[test]
    fn non_finite_delay_is_rejected() {
        let ev = FringeEvaluator::new(&mzi());
        assert!(ev.full(&DelayConfig::new(f64::NAN, 0.0)).is_err());
    }
}
