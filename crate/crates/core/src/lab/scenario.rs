use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::detection::{simulate_counts, DetectorSpec, SourceRateSpec};
use super::randomize::phase_randomized_scan;
use crate::fringe::{Interferogram, ScanMode, ScanRange, Scanner};
use crate::spectral::SourceModel;
use crate::{Error, Result};

/// Knobs for degradations the ideal model leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Imperfections {
    /// Scales every interference term about the ½ baseline.
    pub visibility_factor: f64,
    /// Power extinction ratio of the polarization optics (linear, not dB).
    /// Leakage into the wrong port makes that fraction distinguishable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extinction_ratio: Option<f64>,
}

impl Default for Imperfections {
    fn default() -> Self {
        Self {
            visibility_factor: 1.0,
            extinction_ratio: None,
        }
    }
}

impl Imperfections {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility_factor) {
            return Err(Error::invalid("visibility_factor", "must lie in [0, 1]"));
        }
        if let Some(er) = self.extinction_ratio {
            if !(er >= 1.0) {
                return Err(Error::invalid("extinction_ratio", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Overall factor on the interference terms.
    pub fn contrast(&self) -> f64 {
        let leak = self
            .extinction_ratio
            .map_or(1.0, |er| (er - 1.0) / (er + 1.0));
        self.visibility_factor * leak
    }

    pub fn apply(&self, p: f64) -> f64 {
        0.5 + self.contrast() * (p - 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    HomDip,
    Noon,
    MziTssaTssb,
    PmiDegenerate,
    PmiNondegenerate,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        Self::HomDip,
        Self::Noon,
        Self::MziTssaTssb,
        Self::PmiDegenerate,
        Self::PmiNondegenerate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::HomDip => "hom_dip",
            Self::Noon => "noon",
            Self::MziTssaTssb => "mzi_tssa_tssb",
            Self::PmiDegenerate => "pmi_degenerate",
            Self::PmiNondegenerate => "pmi_nondegenerate",
        }
    }

    /// What the scenario reproduces.
    pub fn description(&self) -> &'static str {
        match self {
            Self::HomDip => "HOM dip at the first beamsplitter versus input delay",
            Self::Noon => "MZI fringe with simultaneous photons, Δx₁ = 0",
            Self::MziTssaTssb => "MZI with Δx₁ = 2 mm: central fringe plus side dips",
            Self::PmiDegenerate => "Michelson, 1550/1550 nm CWDM filters, Δx₁ = 3.2 mm",
            Self::PmiNondegenerate => "Michelson, 1530/1570 nm CWDM filters, Δx₁ = 3.2 mm",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Fully resolved description of one simulated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub source: SourceModel,
    /// Input delay between the photons (m).
    pub delta_x1: f64,
    pub range: ScanRange,
    pub mode: ScanMode,
    /// Average over this many random arm phases per point; off when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_samples: Option<usize>,
    pub detector: DetectorSpec,
    pub rates: SourceRateSpec,
    #[serde(default)]
    pub imperfections: Imperfections,
    pub seed: u64,
}

/// Partial configuration layered over a scenario's defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    pub source: Option<SourceModel>,
    pub delta_x1: Option<f64>,
    pub range: Option<ScanRange>,
    pub mode: Option<ScanMode>,
    pub phase_samples: Option<usize>,
    pub detector: Option<DetectorSpec>,
    pub rates: Option<SourceRateSpec>,
    pub imperfections: Option<Imperfections>,
    pub seed: Option<u64>,
}

pub const DEFAULT_SEED: u64 = 20_160_501;

impl ScenarioConfig {
    pub fn defaults(name: ScenarioName) -> Self {
        let micron = 1e-6;
        let (source, delta_x1, half_width, mode) = match name {
            ScenarioName::HomDip => (SourceModel::mzi_standard(), 0.0, 1.5e-3, ScanMode::Hom),
            ScenarioName::Noon => (SourceModel::mzi_standard(), 0.0, 3.0e-3, ScanMode::Full),
            ScenarioName::MziTssaTssb => {
                (SourceModel::mzi_standard(), 2.0e-3, 3.0e-3, ScanMode::Full)
            }
            ScenarioName::PmiDegenerate => (
                SourceModel::pmi_degenerate(),
                3.2e-3,
                4.0e-3,
                ScanMode::Full,
            ),
            ScenarioName::PmiNondegenerate => (
                SourceModel::pmi_nondegenerate(),
                3.2e-3,
                4.0e-3,
                ScanMode::Full,
            ),
        };
        Self {
            scenario: name,
            source,
            delta_x1,
            range: ScanRange::symmetric(half_width, micron),
            mode,
            phase_samples: None,
            detector: DetectorSpec::default(),
            rates: SourceRateSpec::default(),
            imperfections: Imperfections::default(),
            seed: DEFAULT_SEED,
        }
    }

    pub fn with_overrides(mut self, o: &ScenarioOverrides) -> Self {
        if let Some(v) = &o.source {
            self.source = v.clone();
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        take!(delta_x1, range, mode, detector, rates, imperfections, seed);
        if o.phase_samples.is_some() {
            self.phase_samples = o.phase_samples;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        self.detector.validate(&self.rates)?;
        self.imperfections.validate()?;
        self.range.len()?;
        if !self.delta_x1.is_finite() {
            return Err(Error::invalid("delta_x1", "must be finite"));
        }
        if self.phase_samples.is_some() && self.mode != ScanMode::Full {
            return Err(Error::invalid(
                "phase_samples",
                "phase averaging needs mode `full`",
            ));
        }
        Ok(())
    }

    /// Ideal probabilities (after imperfections) without counting noise.
    pub fn ideal(&self) -> Result<Interferogram> {
        self.validate()?;
        let jsa = self.source.build()?;
        let scanner = Scanner::new(&jsa);
        let mut out = match self.phase_samples {
            Some(n) => phase_randomized_scan(&scanner, self.delta_x1, &self.range, n, self.seed)?,
            None => scanner.run(self.delta_x1, &self.range, self.mode)?,
        };
        for p in &mut out.probabilities {
            *p = self.imperfections.apply(*p);
        }
        out.metadata.scenario = Some(self.scenario.to_string());
        out.metadata.seed = Some(self.seed);
        out.metadata.source = Some(serde_json::to_value(self)?);
        Ok(out)
    }

    /// Ideal probabilities plus Poisson-sampled coincidence counts.
    pub fn run(&self) -> Result<Interferogram> {
        let ideal = self.ideal()?;
        simulate_counts(&ideal, &self.detector, &self.rates, self.seed)
    }
}

pub fn run_scenario(name: ScenarioName, overrides: &ScenarioOverrides) -> Result<Interferogram> {
    ScenarioConfig::defaults(name)
        .with_overrides(overrides)
        .run()
}
