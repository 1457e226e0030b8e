use std::f64::consts::PI;

use rand::Rng;

use super::detection::{point_rng, STREAM_PHASES};
use crate::fringe::{Interferogram, ScanMode, ScanRange, Scanner};
use crate::spectral::JointSpectralAmplitude;
use crate::{Error, Result};

pub const MIN_PHASE_SAMPLES: usize = 16;

/// Carrier phases for one scan point: one uniform draw inside each of `n`
/// equal slices of [0, 2π).
pub fn stratified_phases(n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = point_rng(seed, STREAM_PHASES, index);
    (0..n)
        .map(|j| 2.0 * PI * (j as f64 + rng.random::<f64>()) / n as f64)
        .collect()
}

/// Coincidence scan with the relative arm phase re-drawn for every sample
/// and averaged, which removes the phase-sensitive fringe.
pub fn phase_randomized_scan(
    scanner: &Scanner,
    delta_x1: f64,
    range: &ScanRange,
    n_phase_samples: usize,
    seed: u64,
) -> Result<Interferogram> {
    if n_phase_samples < MIN_PHASE_SAMPLES {
        return Err(Error::invalid(
            "n_phase_samples",
            format!("{n_phase_samples} < {MIN_PHASE_SAMPLES}"),
        ));
    }
    if !delta_x1.is_finite() {
        return Err(Error::invalid("delta_x1", "must be finite"));
    }
    let fold = scanner.fold(delta_x1);
    let (xs, ps) = scanner.map_points(range, |k, x| {
        let c = scanner.components(&fold, x)?;
        let mut total = 0.0;
        // The bunched term carries twice the single-photon phase.
        for theta in stratified_phases(n_phase_samples, seed, k as u64) {
            total += c.probability(0.5 * theta)?;
        }
        Ok(total / n_phase_samples as f64)
    })?;
    let mut out = Interferogram::new(xs, ps)?;
    out.metadata.mode = Some(ScanMode::Full);
    out.metadata.delta_x1 = Some(delta_x1);
    out.metadata.seed = Some(seed);
    out.metadata
        .notes
        .insert("phase_samples".into(), n_phase_samples.to_string());
    Ok(out)
}

pub fn phase_randomized_scan_jsa(
    jsa: &JointSpectralAmplitude,
    delta_x1: f64,
    range: &ScanRange,
    n_phase_samples: usize,
    seed: u64,
) -> Result<Interferogram> {
    phase_randomized_scan(&Scanner::new(jsa), delta_x1, range, n_phase_samples, seed)
}
