use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fringe::Interferogram;
use crate::{Error, Result};

/// Stream tags keep independent uses of one seed apart.
pub(crate) const STREAM_COUNTS: u64 = 1;
pub(crate) const STREAM_PHASES: u64 = 2;

/// Random stream for point `index` of a run; independent of evaluation order.
pub fn point_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 48) | (index & ((1 << 48) - 1)));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub efficiency: f64,
    /// Dead time after each detection (s).
    pub dead_time: f64,
    /// Gated operation: one detection opportunity per pump pulse.
    pub gated: bool,
    /// Coincidence resolving window (s).
    pub coincidence_window: f64,
    /// Dark-count probability per gate, added to every singles rate.
    #[serde(default)]
    pub dark_count_probability: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self {
            efficiency: 0.15,
            dead_time: 10e-6,
            gated: true,
            coincidence_window: 10e-9,
            dark_count_probability: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceRateSpec {
    /// Mean pair number per pump pulse.
    pub pair_probability_per_pulse: f64,
    pub repetition_rate: f64,
    /// Counting time at each scan point (s).
    pub integration_time_per_point: f64,
}

impl Default for SourceRateSpec {
    fn default() -> Self {
        Self {
            pair_probability_per_pulse: 0.24,
            repetition_rate: 20e6,
            integration_time_per_point: 1.0,
        }
    }
}

impl SourceRateSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.pair_probability_per_pulse) {
            return Err(Error::invalid(
                "pair_probability_per_pulse",
                "must lie in [0, 1)",
            ));
        }
        if !(self.repetition_rate > 0.0 && self.repetition_rate.is_finite()) {
            return Err(Error::invalid("repetition_rate", "must be positive"));
        }
        if !(self.integration_time_per_point >= 0.0 && self.integration_time_per_point.is_finite())
        {
            return Err(Error::invalid(
                "integration_time_per_point",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

impl DetectorSpec {
    pub fn validate(&self, source: &SourceRateSpec) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid("efficiency", "must lie in (0, 1]"));
        }
        if !(self.dead_time >= 0.0 && self.dead_time.is_finite()) {
            return Err(Error::invalid("dead_time", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.dark_count_probability) {
            return Err(Error::invalid(
                "dark_count_probability",
                "must lie in [0, 1)",
            ));
        }
        if !(self.coincidence_window > 0.0) {
            return Err(Error::invalid("coincidence_window", "must be positive"));
        }
        if self.gated && self.coincidence_window >= 1.0 / source.repetition_rate {
            return Err(Error::invalid(
                "coincidence_window",
                "must be shorter than the pump pulse period",
            ));
        }
        Ok(())
    }
}

/// Detection rates (Hz) at one scan point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub true_coincidences: f64,
    pub accidentals: f64,
    /// Everything the counter registers: true plus accidental.
    pub coincidences: f64,
    pub singles: f64,
    /// Dead-time rate reduction applied to each detector.
    pub dead_time_factor: f64,
    /// (true + accidental) / accidental.
    pub car: f64,
}

/// Lowest-order pair statistics: a pair gives a true coincidence with
/// probability `p_ideal · η²`; accidentals are the product of the two
/// detectors' singles probabilities per pulse.
pub fn expected_counts(p_ideal: f64, det: &DetectorSpec, src: &SourceRateSpec) -> ExpectedCounts {
    let mu = src.pair_probability_per_pulse;
    let raw_singles = mu * det.efficiency + det.dark_count_probability;
    let dead_time_factor = 1.0 / (1.0 + src.repetition_rate * raw_singles * det.dead_time);
    let eta = det.efficiency * dead_time_factor;
    let singles_per_pulse = mu * eta + det.dark_count_probability * dead_time_factor;
    let true_per_pulse = mu * eta * eta * p_ideal;
    let acc_per_pulse = singles_per_pulse * singles_per_pulse;
    let car = if acc_per_pulse > 0.0 {
        (true_per_pulse + acc_per_pulse) / acc_per_pulse
    } else if true_per_pulse > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    let r = src.repetition_rate;
    ExpectedCounts {
        true_coincidences: r * true_per_pulse,
        accidentals: r * acc_per_pulse,
        coincidences: r * (true_per_pulse + acc_per_pulse),
        singles: r * singles_per_pulse,
        dead_time_factor,
        car,
    }
}

/// Poisson-sampled coincidence counts for every point of `interferogram`.
pub fn simulate_counts(
    interferogram: &Interferogram,
    det: &DetectorSpec,
    src: &SourceRateSpec,
    seed: u64,
) -> Result<Interferogram> {
    src.validate()?;
    det.validate(src)?;
    interferogram.validate()?;
    let t = src.integration_time_per_point;
    let counts = interferogram
        .probabilities
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            let mean = expected_counts(p, det, src).coincidences * t;
            if mean <= 0.0 {
                return 0;
            }
            let dist = Poisson::new(mean).expect("mean is positive and finite");
            dist.sample(&mut point_rng(seed, STREAM_COUNTS, k as u64)) as u64
        })
        .collect();
    let mut out = interferogram.clone();
    out.counts = Some(counts);
    out.metadata.seed = Some(seed);
    Ok(out)
}
