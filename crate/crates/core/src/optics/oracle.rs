//! Brute-force reference for two-photon networks.
//!
//! Each photon is followed through the element list as an amplitude over
//! (mode, frequency sample). Delays become the phase e^{iωτ}. Pair amplitudes
//! over ordered photon labels are then symmetrized per detection outcome.
//! Nothing here uses the closed-form coincidence integrals.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::element::ElementSpec;
use super::mode::{ModeLabel, Spatial};
use crate::spectral::JointSpectralAmplitude;
use crate::{Error, Result};

/// Largest frequency grid the oracle accepts; the pair table grows as n².
pub const ORACLE_MAX_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub elements: Vec<ElementSpec>,
    /// Input mode of the photon carrying ω₁ (first JSA index) and ω₂.
    pub inputs: [ModeLabel; 2],
    /// Detectors, each collecting every polarization of one spatial mode.
    pub detectors: [Spatial; 2],
}

/// Mach-Zehnder network: delay `delta_x1` (m) on input 2, phase `phi` and
/// delay `delta_x2` (m) on arm 4, detectors on ports 5 and 6.
pub fn mzi_network(delta_x1: f64, delta_x2: f64, phi: f64) -> Network {
    let p = Spatial::Port;
    Network {
        elements: vec![
            ElementSpec::delay(p(2), delta_x1),
            ElementSpec::balanced_bs(p(1), p(2), p(3), p(4)),
            ElementSpec::phase(p(4), phi),
            ElementSpec::delay(p(4), delta_x2),
            ElementSpec::balanced_bs(p(3), p(4), p(6), p(5)),
        ],
        inputs: [ModeLabel::port(1), ModeLabel::port(2)],
        detectors: [p(5), p(6)],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcomes {
    /// Probability of one photon at each detector.
    pub coincidence: f64,
    /// Sum over every output outcome; one for a lossless network.
    pub total: f64,
    /// Probability per unordered pair of spatial output modes.
    pub by_spatial: BTreeMap<(Spatial, Spatial), f64>,
}

type SinglePhoton = BTreeMap<ModeLabel, Complex64>;

fn propagate(input: ModeLabel, omega: f64, elements: &[ElementSpec]) -> Result<SinglePhoton> {
    let mut amps = SinglePhoton::new();
    amps.insert(input, Complex64::new(1.0, 0.0));
    for element in elements {
        let mut next = SinglePhoton::new();
        for (&mode, &a) in &amps {
            match element.branches(mode)? {
                None => *next.entry(mode).or_default() += a,
                Some(branches) => {
                    for b in branches {
                        let phase = Complex64::from_polar(1.0, omega * b.delay);
                        *next.entry(b.mode).or_default() += a * b.amplitude * phase;
                    }
                }
            }
        }
        amps = next;
    }
    Ok(amps)
}

/// Detection statistics of `network` fed with the two-photon state `jsa`.
pub fn oracle_outcomes(network: &Network, jsa: &JointSpectralAmplitude) -> Result<OracleOutcomes> {
    let n = jsa.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::OracleTooLarge(n));
    }
    for e in &network.elements {
        e.validate()?;
    }
    let grid = jsa.grid();
    let (omega, w) = (grid.points(), grid.weights());

    // Single-photon transfer per input and frequency.
    let mut paths: [Vec<SinglePhoton>; 2] = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for (k, input) in network.inputs.iter().enumerate() {
        for &om in omega {
            paths[k].push(propagate(*input, om, &network.elements)?);
        }
    }
    let mut labels: Vec<ModeLabel> = paths
        .iter()
        .flatten()
        .flat_map(|m| m.keys().copied())
        .collect();
    labels.sort();
    labels.dedup();
    let m = labels.len();
    let index = |mode: &ModeLabel| labels.binary_search(mode).expect("label collected above");

    // Ordered pair amplitude c[(a, i), (b, j)]; photon one carries ω_i.
    // Frequencies never mix, so each (i, j) block is independent.
    let mut by_spatial: BTreeMap<(Spatial, Spatial), f64> = BTreeMap::new();
    let mut total = 0.0;
    let mut block = vec![Complex64::new(0.0, 0.0); m * m];
    let mut block_swapped = vec![Complex64::new(0.0, 0.0); m * m];
    let pair = |i: usize, j: usize, out: &mut [Complex64]| {
        out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let a0 = jsa.at(i, j) * (w[i] * w[j]).sqrt();
        for (ma, &ca) in &paths[0][i] {
            for (mb, &cb) in &paths[1][j] {
                out[index(ma) * m + index(mb)] += a0 * ca * cb;
            }
        }
    };
    for i in 0..n {
        for j in i..n {
            pair(i, j, &mut block);
            if i != j {
                pair(j, i, &mut block_swapped);
            }
            // Outcome {(a, ω_i), (b, ω_j)} collects c[(a,i),(b,j)] + c[(b,j),(a,i)].
            for a in 0..m {
                for b in 0..m {
                    if i == j && b < a {
                        continue;
                    }
                    let amp = if i == j {
                        block[a * m + b]
                            + if a != b {
                                block[b * m + a]
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                    } else {
                        block[a * m + b] + block_swapped[b * m + a]
                    };
                    let p = if i == j && a == b {
                        2.0 * amp.norm_sqr()
                    } else {
                        amp.norm_sqr()
                    };
                    if p == 0.0 {
                        continue;
                    }
                    total += p;
                    let (sa, sb) = (labels[a].spatial, labels[b].spatial);
                    let key = if sa <= sb { (sa, sb) } else { (sb, sa) };
                    *by_spatial.entry(key).or_default() += p;
                }
            }
        }
    }
    let [d0, d1] = network.detectors;
    let key = if d0 <= d1 { (d0, d1) } else { (d1, d0) };
    let coincidence = if d0 == d1 {
        0.0
    } else {
        by_spatial.get(&key).copied().unwrap_or(0.0)
    };
    Ok(OracleOutcomes {
        coincidence,
        total,
        by_spatial,
    })
}

pub fn oracle_coincidence(network: &Network, jsa: &JointSpectralAmplitude) -> Result<f64> {
    Ok(oracle_outcomes(network, jsa)?.coincidence)
}

pub fn oracle_mzi_coincidence(
    jsa: &JointSpectralAmplitude,
    delta_x1: f64,
    delta_x2: f64,
    phi: f64,
) -> Result<f64> {
    oracle_coincidence(&mzi_network(delta_x1, delta_x2, phi), jsa)
}
