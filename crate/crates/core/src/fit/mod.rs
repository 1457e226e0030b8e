//! Least-squares recovery of fringe parameters.
//!
//! Counts are weighted by 1/max(counts, 1); with visibilities near one the
//! near-empty bins carry most of the information, and the floor keeps them
//! finite. After accidental subtraction the weights use the raw counts,
//! which is what the Poisson variance belongs to. Noiseless probability data is fit with uniform weights and the
//! covariance scaled by the residual variance.
//!
//! Visibility is always the fitted contrast parameter (b/a for a fringe,
//! depth over baseline for a dip), never a ratio of raw extrema.

mod lm;
mod models;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fringe::Interferogram;
use crate::{Error, Result};

pub use models::{
    fit_composite, fit_composite_split, fit_dip_or_peak, fit_gaussian_envelope, fit_sinusoid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Sinusoid,
    SincDip,
    GaussianDip,
    GaussianEnvelope,
    Composite,
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

/// Profile used by [`fit_dip_or_peak`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DipShape {
    /// sin(πu)/(πu); the width parameter is the distance to the first zero.
    Sinc,
    /// exp(−u²/2); the width parameter is the standard deviation.
    Gaussian,
}

impl std::str::FromStr for DipShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinc" => Ok(Self::Sinc),
            "gaussian" => Ok(Self::Gaussian),
            _ => Err(Error::invalid(
                "shape",
                format!("`{s}` (expected sinc or gaussian)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Infinite when the data do not constrain the parameter.
    pub stderr: f64,
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e} ± {:.2e}", self.value, self.stderr)
    }
}

/// Conditions worth a look that do not invalidate the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    /// Residuals well above the noise: the chosen shape does not describe the data.
    ShapeMismatch,
    /// The scan is short compared with the feature being fit.
    NarrowSpan,
    /// The normal matrix is close to singular.
    IllConditioned,
    /// Single- and two-photon envelopes have nearly the same width.
    DegenerateEnvelopes,
    /// The data stop before the envelope reaches the baseline.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub model: FitModel,
    pub visibility: Estimate,
    /// Full width at half maximum of the fitted envelope or dip (m).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_fwhm: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_period: Option<Estimate>,
    /// Level far from any interference feature, in the units of the data.
    pub baseline: f64,
    /// RMS residual divided by the baseline.
    pub residual_rms: f64,
    pub n_points: usize,
    pub params: BTreeMap<String, f64>,
    pub stderrs: BTreeMap<String, f64>,
    pub flags: Vec<FitFlag>,
    pub iterations: usize,
    /// Of the column-equilibrated normal matrix.
    pub condition_number: f64,
}

impl FringeFit {
    pub fn param(&self, name: &str) -> Option<Estimate> {
        Some(Estimate {
            value: *self.params.get(name)?,
            stderr: *self.stderrs.get(name)?,
        })
    }

    pub fn has_flag(&self, flag: FitFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Metadata note holding the counts removed per point; fits add it back
/// when weighting.
pub const SUBTRACTED_NOTE: &str = "accidentals_subtracted_per_point";

/// Removes an estimated accidental rate (Hz) from every bin:
/// counts' = max(counts − rate·T, 0), rounded to whole counts.
pub fn subtract_accidentals(
    data: &Interferogram,
    accidental_rate: f64,
    integration_time: f64,
) -> Result<Interferogram> {
    if !(accidental_rate >= 0.0 && accidental_rate.is_finite()) {
        return Err(Error::invalid("accidental_rate", "must be non-negative"));
    }
    if !(integration_time >= 0.0 && integration_time.is_finite()) {
        return Err(Error::invalid("integration_time", "must be non-negative"));
    }
    let counts = data
        .counts
        .as_ref()
        .ok_or_else(|| Error::InsufficientData("no counts to subtract from".into()))?;
    let acc = accidental_rate * integration_time;
    let mut out = data.clone();
    out.counts = Some(
        counts
            .iter()
            .map(|&c| (c as f64 - acc).max(0.0).round() as u64)
            .collect(),
    );
    out.metadata
        .notes
        .insert(SUBTRACTED_NOTE.into(), format!("{acc}"));
    Ok(out)
}
