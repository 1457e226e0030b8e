use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::envelope::{envelope_probability, EnvelopeModel};
use super::tables::{InputDelayFold, MarginalTables, PhaseComponents};
use crate::spectral::{summarize, JointSpectralAmplitude};
use crate::{wavelength, Error, Result, SPEED_OF_LIGHT};

pub const CSV_HEADER: [&str; 3] = ["delta_x2_m", "probability", "counts"];
const METADATA_PREFIX: &str = "# metadata: ";
const JSON_SCHEMA: u32 = 1;
/// Refuse scans that would allocate absurdly long tables.
const MAX_SCAN_POINTS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// General integral, valid for every input delay.
    Full,
    /// τ₁ = 0 closed form.
    Noon,
    /// Large-τ₁ closed form around Δx₂ = 0.
    Center,
    /// Large-τ₁ closed form around Δx₂ = ±Δx₁.
    Side,
    /// Phenomenological central-fringe model.
    Envelope,
    /// Single beamsplitter, Δx₂ taken as the delay between its inputs.
    Hom,
}

impl std::str::FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "noon" => Ok(Self::Noon),
            "center" => Ok(Self::Center),
            "side" => Ok(Self::Side),
            "envelope" => Ok(Self::Envelope),
            "hom" => Ok(Self::Hom),
            other => Err(Error::invalid(
                "mode",
                format!("unknown scan mode `{other}`"),
            )),
        }
    }
}

/// Inclusive range `start, start + step, …, stop` (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl ScanRange {
    pub fn symmetric(half_width: f64, step: f64) -> Self {
        Self {
            start: -half_width,
            stop: half_width,
            step,
        }
    }

    /// Number of points; a valid range always has at least one.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Result<usize> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid("step", "must be positive and finite"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(Error::invalid("range", "needs finite start <= stop"));
        }
        let steps = ((self.stop - self.start) / self.step + 1e-9).floor();
        if steps + 1.0 > MAX_SCAN_POINTS as f64 {
            return Err(Error::invalid(
                "range",
                format!("more than {MAX_SCAN_POINTS} points"),
            ));
        }
        Ok(steps as usize + 1)
    }

    /// Sample positions, computed from the index so they never accumulate error.
    pub fn points(&self) -> Result<Vec<f64>> {
        let n = self.len()?;
        Ok((0..n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ScanMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_x1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Interferogram {
    #[serde(rename = "delta_x2_m")]
    pub delta_x2_values: Vec<f64>,
    #[serde(rename = "probability")]
    pub probabilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
    #[serde(default)]
    pub metadata: Metadata,
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    schema: u32,
    #[serde(flatten)]
    interferogram: Interferogram,
}

impl Interferogram {
    pub fn new(delta_x2_values: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        let out = Self {
            delta_x2_values,
            probabilities,
            counts: None,
            metadata: Metadata::default(),
        };
        out.validate()?;
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.delta_x2_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_x2_values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.delta_x2_values.len();
        if self.probabilities.len() != n || self.counts.as_ref().is_some_and(|c| c.len() != n) {
            return Err(Error::Format("column lengths differ".into()));
        }
        if let Some(p) = self
            .probabilities
            .iter()
            .find(|p| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::ProbabilityOutOfRange { value: *p });
        }
        if self.delta_x2_values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite delta_x2".into()));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{METADATA_PREFIX}{}",
            serde_json::to_string(&self.metadata)?
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(csv_error)?;
        for (k, (x, p)) in self
            .delta_x2_values
            .iter()
            .zip(&self.probabilities)
            .enumerate()
        {
            let c = self
                .counts
                .as_ref()
                .map(|c| c[k].to_string())
                .unwrap_or_default();
            w.write_record([x.to_string(), p.to_string(), c])
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut metadata = Metadata::default();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            if let Some(json) = line.strip_prefix(METADATA_PREFIX) {
                metadata = serde_json::from_str(json)?;
            } else if !line.starts_with('#') {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let header = r.headers().map_err(csv_error)?.clone();
        if header.len() < 2
            || header[0].trim() != CSV_HEADER[0]
            || header[1].trim() != CSV_HEADER[1]
        {
            return Err(Error::Format(format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut xs, mut ps, mut cs) = (Vec::new(), Vec::new(), Vec::new());
        let mut missing_counts = 0usize;
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            let field = |k: usize| rec.get(k).map(str::trim).unwrap_or("");
            let parse = |k: usize| -> Result<f64> {
                field(k)
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {}: column {k}: {e}", row + 1)))
            };
            xs.push(parse(0)?);
            ps.push(parse(1)?);
            match field(2) {
                "" => missing_counts += 1,
                c => cs.push(
                    c.parse::<u64>()
                        .map_err(|e| Error::Format(format!("row {}: counts: {e}", row + 1)))?,
                ),
            }
        }
        let counts = match (missing_counts, cs.len()) {
            (_, 0) => None,
            (0, _) => Some(cs),
            _ => return Err(Error::Format("counts column is only partly filled".into())),
        };
        let out = Self {
            delta_x2_values: xs,
            probabilities: ps,
            counts,
            metadata,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = JsonDocument {
            schema: JSON_SCHEMA,
            interferogram: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: JsonDocument = serde_json::from_str(s)?;
        if doc.schema != JSON_SCHEMA {
            return Err(Error::Format(format!("unsupported schema {}", doc.schema)));
        }
        doc.interferogram.validate()?;
        Ok(doc.interferogram)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Evaluates interferograms of one source, reusing the marginal tables.
#[derive(Debug, Clone)]
pub struct Scanner {
    tables: MarginalTables,
    envelope: EnvelopeModel,
    phase_offset: f64,
}

impl Scanner {
    pub fn new(jsa: &JointSpectralAmplitude) -> Self {
        let lambda_p = wavelength(2.0 * jsa.grid().center());
        Self {
            tables: MarginalTables::new(jsa),
            envelope: EnvelopeModel::from_summary(&summarize(jsa), lambda_p),
            phase_offset: 0.0,
        }
    }

    pub fn with_envelope(mut self, envelope: EnvelopeModel) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn with_phase_offset(mut self, phase_offset: f64) -> Self {
        self.phase_offset = phase_offset;
        self
    }

    pub fn tables(&self) -> &MarginalTables {
        &self.tables
    }

    pub fn envelope(&self) -> &EnvelopeModel {
        &self.envelope
    }

    pub fn fold(&self, delta_x1: f64) -> InputDelayFold {
        self.tables.fold(delta_x1 / SPEED_OF_LIGHT)
    }

    /// Phase-resolved pieces of the full probability at one scan point.
    pub fn components(&self, fold: &InputDelayFold, delta_x2: f64) -> Result<PhaseComponents> {
        self.tables.components(fold, delta_x2 / SPEED_OF_LIGHT)
    }

    fn evaluate(&self, fold: &InputDelayFold, delta_x2: f64, mode: ScanMode) -> Result<f64> {
        let (t1, t2) = (fold.tau1(), delta_x2 / SPEED_OF_LIGHT);
        let t = &self.tables;
        match mode {
            ScanMode::Full => t.components(fold, t2)?.probability(self.phase_offset),
            ScanMode::Noon => t.noon(t2, self.phase_offset),
            ScanMode::Center => t.center(t2, self.phase_offset),
            ScanMode::Side => t.side(if t2 >= 0.0 { t2 - t1 } else { -(t1 + t2) }),
            ScanMode::Envelope => Ok(envelope_probability(&self.envelope, delta_x2)),
            ScanMode::Hom => t.hom(t2),
        }
    }

    /// Coincidence probability at a single point.
    pub fn probability(&self, delta_x1: f64, delta_x2: f64, mode: ScanMode) -> Result<f64> {
        self.evaluate(&self.fold(delta_x1), delta_x2, mode)
    }

    /// Runs `f` at every point of `range` in parallel; results keep scan order
    /// and errors carry the offending Δx₂.
    pub fn map_points<F>(&self, range: &ScanRange, f: F) -> Result<(Vec<f64>, Vec<f64>)>
    where
        F: Fn(usize, f64) -> Result<f64> + Sync,
    {
        let xs = range.points()?;
        let ys = xs
            .par_iter()
            .enumerate()
            .map(|(k, &x)| {
                f(k, x).map_err(|e| Error::AtScanPoint {
                    delta_x2: x,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((xs, ys))
    }

    /// Evaluates every point of `range`.
    pub fn run(&self, delta_x1: f64, range: &ScanRange, mode: ScanMode) -> Result<Interferogram> {
        if !delta_x1.is_finite() {
            return Err(Error::invalid("delta_x1", "must be finite"));
        }
        if mode == ScanMode::Envelope {
            self.envelope.validate()?;
        }
        let fold = self.fold(delta_x1);
        let (xs, ps) = self.map_points(range, |_, x| self.evaluate(&fold, x, mode))?;
        let mut out = Interferogram::new(xs, ps)?;
        out.metadata.mode = Some(mode);
        out.metadata.delta_x1 = Some(delta_x1);
        Ok(out)
    }
}

pub fn scan(
    jsa: &JointSpectralAmplitude,
    delta_x1: f64,
    range: &ScanRange,
    mode: ScanMode,
) -> Result<Interferogram> {
    Scanner::new(jsa).run(delta_x1, range, mode)
}
