use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mode::{ModeLabel, Polarization, Spatial};
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ElementKind {
    /// 50/50 splitter: port a transmits to output c, b to d; reflections carry i.
    BalancedBs,
    /// Transmits H, reflects V.
    Pbs,
    /// Half-wave plate with fast axis at `angle` (rad) from H.
    Hwp { angle: f64 },
    /// Quarter-wave plate with fast axis at `angle` (rad) from H.
    Qwp { angle: f64 },
    /// Routes input mode to output mode unchanged.
    Mirror,
    /// Extra path length (m).
    Delay { length: f64 },
    /// Frequency-independent phase (rad).
    Phase { phi: f64 },
}

/// An element together with the spatial modes it reads and writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub kind: ElementKind,
    pub input_modes: Vec<Spatial>,
    pub output_modes: Vec<Spatial>,
}

/// One outgoing path of a photon through an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub amplitude: Complex64,
    pub mode: ModeLabel,
    /// Delay (s) added along this path.
    pub delay: f64,
}

impl ElementSpec {
    pub fn balanced_bs(a: Spatial, b: Spatial, c: Spatial, d: Spatial) -> Self {
        Self {
            kind: ElementKind::BalancedBs,
            input_modes: vec![a, b],
            output_modes: vec![c, d],
        }
    }

    pub fn pbs(a: Spatial, b: Spatial, c: Spatial, d: Spatial) -> Self {
        Self {
            kind: ElementKind::Pbs,
            input_modes: vec![a, b],
            output_modes: vec![c, d],
        }
    }

    fn single(kind: ElementKind, mode: Spatial) -> Self {
        Self {
            kind,
            input_modes: vec![mode],
            output_modes: vec![mode],
        }
    }

    pub fn hwp(mode: Spatial, angle: f64) -> Self {
        Self::single(ElementKind::Hwp { angle }, mode)
    }

    pub fn qwp(mode: Spatial, angle: f64) -> Self {
        Self::single(ElementKind::Qwp { angle }, mode)
    }

    pub fn delay(mode: Spatial, length: f64) -> Self {
        Self::single(ElementKind::Delay { length }, mode)
    }

    pub fn phase(mode: Spatial, phi: f64) -> Self {
        Self::single(ElementKind::Phase { phi }, mode)
    }

    pub fn mirror(from: Spatial, to: Spatial) -> Self {
        Self {
            kind: ElementKind::Mirror,
            input_modes: vec![from],
            output_modes: vec![to],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n_in, n_out) = match self.kind {
            ElementKind::BalancedBs | ElementKind::Pbs => (2, 2),
            _ => (1, 1),
        };
        if self.input_modes.len() != n_in || self.output_modes.len() != n_out {
            return Err(Error::invalid(
                "element",
                format!(
                    "{:?} needs {n_in} input and {n_out} output modes, got {} and {}",
                    self.kind,
                    self.input_modes.len(),
                    self.output_modes.len()
                ),
            ));
        }
        if n_in == 2
            && (self.input_modes[0] == self.input_modes[1]
                || self.output_modes[0] == self.output_modes[1])
        {
            return Err(Error::invalid(
                "element",
                "two-port element with repeated mode",
            ));
        }
        match self.kind {
            ElementKind::Hwp { angle } | ElementKind::Qwp { angle } if !angle.is_finite() => {
                Err(Error::invalid("element.angle", "must be finite"))
            }
            ElementKind::Delay { length } if !length.is_finite() => {
                Err(Error::invalid("element.length", "must be finite"))
            }
            ElementKind::Phase { phi } if !phi.is_finite() => {
                Err(Error::invalid("element.phi", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn acts_on(&self, spatial: Spatial) -> bool {
        self.input_modes.contains(&spatial)
    }

    /// Paths of a single photon in `mode` through this element, or `None` when
    /// the element does not touch that mode.
    pub fn branches(&self, mode: ModeLabel) -> Result<Option<Vec<Branch>>> {
        let Some(port) = self.input_modes.iter().position(|&m| m == mode.spatial) else {
            return Ok(None);
        };
        let one = Complex64::new(1.0, 0.0);
        let branch = |amplitude: Complex64, spatial: Spatial, polarization: Polarization| Branch {
            amplitude,
            mode: ModeLabel {
                spatial,
                polarization,
            },
            delay: 0.0,
        };
        let out = match self.kind {
            ElementKind::BalancedBs => {
                let t = Complex64::new(FRAC_1_SQRT_2, 0.0);
                let r = Complex64::new(0.0, FRAC_1_SQRT_2);
                let (straight, cross) = (self.output_modes[port], self.output_modes[1 - port]);
                vec![
                    branch(t, straight, mode.polarization),
                    branch(r, cross, mode.polarization),
                ]
            }
            ElementKind::Pbs => {
                let (straight, cross) = (self.output_modes[port], self.output_modes[1 - port]);
                match mode.polarization {
                    Polarization::H => vec![branch(one, straight, Polarization::H)],
                    Polarization::V => vec![branch(one, cross, Polarization::V)],
                    Polarization::None => {
                        return Err(Error::UnknownMode(format!("{mode} (PBS needs H or V)")));
                    }
                }
            }
            ElementKind::Hwp { angle } | ElementKind::Qwp { angle } => {
                let jones = match self.kind {
                    ElementKind::Hwp { .. } => hwp_jones(angle),
                    _ => qwp_jones(angle),
                };
                let col = match mode.polarization {
                    Polarization::H => 0,
                    Polarization::V => 1,
                    Polarization::None => {
                        return Err(Error::UnknownMode(format!(
                            "{mode} (wave plate needs H or V)"
                        )));
                    }
                };
                let target = self.output_modes[0];
                vec![
                    branch(jones[0][col], target, Polarization::H),
                    branch(jones[1][col], target, Polarization::V),
                ]
            }
            ElementKind::Mirror => vec![branch(one, self.output_modes[0], mode.polarization)],
            ElementKind::Delay { length } => vec![Branch {
                delay: length / SPEED_OF_LIGHT,
                ..branch(one, self.output_modes[0], mode.polarization)
            }],
            ElementKind::Phase { phi } => {
                vec![branch(
                    Complex64::from_polar(1.0, phi),
                    self.output_modes[0],
                    mode.polarization,
                )]
            }
        };
        Ok(Some(out))
    }

    /// Single-photon transfer matrix at angular frequency `omega`, over the
    /// element's input modes in the given polarization basis. Row index is the
    /// output basis state, column the input.
    pub fn transfer_matrix(
        &self,
        polarizations: &[Polarization],
        omega: f64,
    ) -> Result<Vec<Vec<Complex64>>> {
        let inputs: Vec<ModeLabel> = self
            .input_modes
            .iter()
            .flat_map(|&s| {
                polarizations
                    .iter()
                    .map(move |&p| ModeLabel::polarized(s, p))
            })
            .collect();
        let mut outputs: Vec<ModeLabel> = self
            .output_modes
            .iter()
            .flat_map(|&s| {
                polarizations
                    .iter()
                    .map(move |&p| ModeLabel::polarized(s, p))
            })
            .collect();
        outputs.sort();
        outputs.dedup();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); inputs.len()]; outputs.len()];
        for (col, &input) in inputs.iter().enumerate() {
            for b in self.branches(input)?.unwrap_or_default() {
                let row = outputs
                    .iter()
                    .position(|&o| o == b.mode)
                    .ok_or_else(|| Error::UnknownMode(b.mode.to_string()))?;
                m[row][col] += b.amplitude * Complex64::from_polar(1.0, omega * b.delay);
            }
        }
        Ok(m)
    }
}

fn hwp_jones(angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (2.0 * angle).sin_cos();
    let r = |x: f64| Complex64::new(x, 0.0);
    [[r(c), r(s)], [r(s), r(-c)]]
}

fn qwp_jones(angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    let i = Complex64::new(0.0, 1.0);
    let global = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let off = (1.0 - i) * (s * c);
    [
        [global * (c * c + i * s * s), global * off],
        [global * off, global * (s * s + i * c * c)],
    ]
}
