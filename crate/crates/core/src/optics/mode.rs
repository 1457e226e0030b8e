use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Spatial mode: numbered ports of the Mach-Zehnder stages, or the
/// transmitted/reflected arms of the polarizing beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spatial {
    Port(u8),
    T,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    /// Polarization is not tracked (Mach-Zehnder modes).
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub spatial: Spatial,
    pub polarization: Polarization,
}

impl ModeLabel {
    pub fn port(n: u8) -> Self {
        Self {
            spatial: Spatial::Port(n),
            polarization: Polarization::None,
        }
    }

    pub fn polarized(spatial: Spatial, polarization: Polarization) -> Self {
        Self {
            spatial,
            polarization,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.spatial {
            Spatial::Port(n) => write!(f, "{n}")?,
            Spatial::T => write!(f, "T")?,
            Spatial::R => write!(f, "R")?,
        }
        match self.polarization {
            Polarization::H => write!(f, ":H"),
            Polarization::V => write!(f, ":V"),
            Polarization::None => Ok(()),
        }
    }
}

/// Spectral label of a photon in the central-frequency picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpectralSlot {
    /// Both photons share one spectrum.
    Degenerate,
    Omega1,
    Omega2,
}

/// A single photon: mode, accumulated delay (s) and spectral slot.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Photon {
    pub mode: ModeLabel,
    pub delay: f64,
    pub slot: SpectralSlot,
}

impl Photon {
    pub fn new(mode: ModeLabel, delay: f64) -> Self {
        Self {
            mode,
            delay,
            slot: SpectralSlot::Degenerate,
        }
    }

    pub fn with_slot(mode: ModeLabel, delay: f64, slot: SpectralSlot) -> Self {
        Self { mode, delay, slot }
    }
}

// Ordering is lexicographic in (mode, delay, slot); delays compare with
// `total_cmp` so the order is total.
impl Ord for Photon {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mode
            .cmp(&other.mode)
            .then(self.delay.total_cmp(&other.delay))
            .then(self.slot.cmp(&other.slot))
    }
}

impl PartialOrd for Photon {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Photon {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Photon {}

impl fmt::Display for Photon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}", self.mode)?;
        if self.delay != 0.0 {
            write!(f, " +{:.3e}s", self.delay)?;
        }
        match self.slot {
            SpectralSlot::Degenerate => write!(f, "⟩"),
            SpectralSlot::Omega1 => write!(f, " ω1⟩"),
            SpectralSlot::Omega2 => write!(f, " ω2⟩"),
        }
    }
}
