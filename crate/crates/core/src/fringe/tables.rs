//! Fast route for scans. On a uniform grid every kernel depends on ω₁ − ω₂ or
//! ω₁ + ω₂ through integer offsets, so the double sums collapse onto 2n − 1
//! marginal samples. The one mixed kernel, e^{iτ₁(ω₁−ω₂)+iτ₂(ω₁+ω₂)}, is
//! folded once per input delay and then needs O(n) work per scan point.

use num_complex::Complex64;

use super::{checked_probability, IMAGINARY_LIMIT};
use crate::spectral::JointSpectralAmplitude;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct MarginalTables {
    n: usize,
    step: f64,
    center: f64,
    symmetric: bool,
    /// Σ_{i−j=k} w_i w_j |Φ_ij|², index k + n − 1.
    diff_intensity: Vec<f64>,
    /// Σ_{i+j=s} w_i w_j |Φ_ij|².
    sum_intensity: Vec<f64>,
    /// Σ_{i−j=k} w_i w_j Φ*_ji Φ_ij.
    diff_exchange: Vec<Complex64>,
    /// w_i w_j Φ*_ji Φ_ij, row-major; folded per input delay.
    exchange: Vec<Complex64>,
}

/// Input-delay dependent fold of the mixed exchange kernel.
#[derive(Debug, Clone)]
pub struct InputDelayFold {
    tau1: f64,
    /// Σ_{i+j=s} w_i w_j Φ*_ji Φ_ij e^{iτ₁(ω_i−ω_j)}.
    mixed: Vec<Complex64>,
}

impl InputDelayFold {
    pub fn tau1(&self) -> f64 {
        self.tau1
    }
}

/// `P(φ) = base + ⅛ Re[bunched · e^{2iφ}]` at fixed delays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseComponents {
    pub base: f64,
    pub bunched: Complex64,
}

impl PhaseComponents {
    pub fn probability(&self, phase: f64) -> Result<f64> {
        checked_probability(
            self.base + 0.125 * (self.bunched * Complex64::from_polar(1.0, 2.0 * phase)).re,
        )
    }

    /// Uniform average over the phase: the bunched term drops out.
    pub fn phase_averaged(&self) -> Result<f64> {
        checked_probability(self.base)
    }
}

impl MarginalTables {
    pub fn new(jsa: &JointSpectralAmplitude) -> Self {
        let n = jsa.len();
        let intensity = jsa.weighted_intensity();
        let exchange = jsa.weighted_exchange();
        let mut diff_intensity = vec![0.0; 2 * n - 1];
        let mut sum_intensity = vec![0.0; 2 * n - 1];
        let mut diff_exchange = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                diff_intensity[i + n - 1 - j] += intensity[k];
                sum_intensity[i + j] += intensity[k];
                diff_exchange[i + n - 1 - j] += exchange[k];
            }
        }
        Self {
            n,
            step: jsa.grid().step(),
            center: jsa.grid().center(),
            symmetric: jsa.is_symmetric(),
            diff_intensity,
            sum_intensity,
            diff_exchange,
            exchange,
        }
    }

    /// Σ_k m_k e^{iτ (k − n + 1) δω}: a kernel in ω₁ − ω₂.
    fn diff_transform<T>(&self, m: &[T], tau: f64) -> Complex64
    where
        T: Copy + Into<Complex64>,
    {
        let offset = (self.n - 1) as f64;
        m.iter()
            .enumerate()
            .map(|(k, &v)| {
                v.into() * Complex64::from_polar(1.0, tau * (k as f64 - offset) * self.step)
            })
            .sum()
    }

    /// Σ_s m_s e^{iτ (ω_c·2 + (s − n + 1) δω)}: a kernel in ω₁ + ω₂.
    fn sum_transform<T>(&self, m: &[T], tau: f64) -> Complex64
    where
        T: Copy + Into<Complex64>,
    {
        Complex64::from_polar(1.0, 2.0 * tau * self.center) * self.diff_transform(m, tau)
    }

    pub fn fold(&self, tau1: f64) -> InputDelayFold {
        let n = self.n;
        let mut mixed = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
        let phases: Vec<Complex64> = (0..2 * n - 1)
            .map(|k| Complex64::from_polar(1.0, tau1 * (k as f64 - (n - 1) as f64) * self.step))
            .collect();
        for i in 0..n {
            for j in 0..n {
                mixed[i + j] += self.exchange[i * n + j] * phases[i + n - 1 - j];
            }
        }
        InputDelayFold { tau1, mixed }
    }

    pub fn components(&self, fold: &InputDelayFold, tau2: f64) -> Result<PhaseComponents> {
        let t1 = fold.tau1;
        let a_diff = self.diff_transform(&self.diff_intensity, -tau2);
        let a_sum = self.sum_transform(&self.sum_intensity, tau2);
        let b_cross = self.sum_transform(&fold.mixed, tau2);
        let b_plus = self.diff_transform(&self.diff_exchange, t1 + tau2);
        let b_minus = self.diff_transform(&self.diff_exchange, t1 - tau2);
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
        Ok(PhaseComponents {
            base: 0.5 + 0.125 * (2.0 * a_diff - b_plus - b_minus).re,
            bunched: 2.0 * (a_sum + b_cross),
        })
    }

    pub fn noon(&self, tau2: f64, phase: f64) -> Result<f64> {
        let k =
            self.sum_transform(&self.sum_intensity, tau2) * Complex64::from_polar(1.0, 2.0 * phase);
        checked_probability(0.5 * (1.0 + k.re))
    }

    pub fn center(&self, dtau: f64, phase: f64) -> Result<f64> {
        let k = self.diff_transform(&self.diff_intensity, dtau)
            + self.sum_transform(&self.sum_intensity, dtau)
                * Complex64::from_polar(1.0, 2.0 * phase);
        checked_probability(0.5 * (1.0 + 0.5 * k.re))
    }

    pub fn center_phase_averaged(&self, dtau: f64) -> Result<f64> {
        checked_probability(0.5 * (1.0 + 0.5 * self.diff_transform(&self.diff_intensity, dtau).re))
    }

    pub fn side(&self, dtau: f64) -> Result<f64> {
        checked_probability(
            0.5 * (1.0 - 0.25 * self.diff_transform(&self.diff_intensity, -dtau).re),
        )
    }

    pub fn hom(&self, tau: f64) -> Result<f64> {
        let x = self.diff_transform(&self.diff_exchange, -tau);
        if x.im.abs() > IMAGINARY_LIMIT {
            return Err(Error::ImaginaryResidue {
                residue: x.im.abs(),
                limit: IMAGINARY_LIMIT,
            });
        }
        checked_probability(0.5 * (1.0 - x.re))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{DelayConfig, FringeEvaluator};
    use super::*;
    use crate::spectral::SourceModel;
    use crate::SPEED_OF_LIGHT;

    #[test]
    fn tables_match_direct_quadrature() {
        for model in [
            SourceModel::mzi_standard(),
            SourceModel {
                grid_points: 128,
                ..SourceModel::pmi_nondegenerate()
            },
        ] {
            let jsa = model.build().unwrap();
            let ev = FringeEvaluator::new(&jsa);
            let t = MarginalTables::new(&jsa);
            for dx1 in [0.0, 0.3e-3, 2.0e-3] {
                let fold = t.fold(dx1 / SPEED_OF_LIGHT);
                for k in -20..=20 {
                    let dx2 = k as f64 * 0.113e-3;
                    let phi = 0.37 * k as f64;
                    let direct = ev
                        .full(&DelayConfig {
                            delta_x1: dx1,
                            delta_x2: dx2,
                            phase_offset: phi,
                        })
                        .unwrap();
                    let fast = t
                        .components(&fold, dx2 / SPEED_OF_LIGHT)
                        .unwrap()
                        .probability(phi)
                        .unwrap();
                    assert!(
                        (direct - fast).abs() < 1e-12,
                        "{dx1} {dx2}: {direct} vs {fast}"
                    );
                    let tau = dx2 / SPEED_OF_LIGHT;
                    let pairs = [
                        (ev.noon(tau, phi).unwrap(), t.noon(tau, phi).unwrap()),
                        (ev.center(tau, phi).unwrap(), t.center(tau, phi).unwrap()),
                        (
                            ev.center_phase_averaged(tau).unwrap(),
                            t.center_phase_averaged(tau).unwrap(),
                        ),
                        (ev.side(tau).unwrap(), t.side(tau).unwrap()),
                        (ev.hom(tau).unwrap(), t.hom(tau).unwrap()),
                    ];
                    for (a, b) in pairs {
                        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn phase_average_is_the_mean_over_phases() {
        let jsa = SourceModel::mzi_standard().build().unwrap();
        let t = MarginalTables::new(&jsa);
        let c = t.components(&t.fold(2e-3 / SPEED_OF_LIGHT), 0.0).unwrap();
        let n = 16;
        let mean: f64 = (0..n)
            .map(|k| {
                c.probability(std::f64::consts::PI * k as f64 / n as f64)
                    .unwrap()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - c.phase_averaged().unwrap()).abs() < 1e-12);
        assert!((c.phase_averaged().unwrap() - 0.75).abs() < 5e-3);
    }
}
