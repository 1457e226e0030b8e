use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use twinfringe::fit::{
    fit_composite, fit_dip_or_peak, fit_gaussian_envelope, fit_sinusoid, subtract_accidentals,
    DipShape, FringeFit,
};
use twinfringe::fringe::{Interferogram, Metadata};

use crate::units::parse_length;
use crate::{write_file, Failure};

/// Carrier used when neither the flag nor the data name a pump wavelength.
const DEFAULT_CARRIER: f64 = 775e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// Baseline plus one cosine.
    Sinusoid,
    /// Sinc-shaped dip or peak.
    Sinc,
    /// Gaussian dip or peak.
    Gaussian,
    /// Cosine under a Gaussian envelope.
    Envelope,
    /// Central fringe with single- and two-photon envelopes.
    Composite,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitOptions {
    /// Carrier period or pump wavelength (m).
    pub carrier: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accidental_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integration_time: Option<f64>,
}

impl FitOptions {
    /// Takes the carrier from the pump recorded in the data when not given.
    pub fn for_data(data: &Interferogram, carrier: Option<f64>) -> Self {
        let recorded = data
            .metadata
            .source
            .as_ref()
            .and_then(|s| s.pointer("/source/pump/center_wavelength"))
            .and_then(|v| v.as_f64());
        Self {
            carrier: carrier.or(recorded).unwrap_or(DEFAULT_CARRIER),
            accidental_rate: None,
            integration_time: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Interferogram CSV as written by `scan`.
    data: PathBuf,

    #[arg(long, value_enum)]
    model: FitKind,

    /// Carrier period guess, or the pump wavelength for `composite`.
    /// Defaults to the pump recorded in the file, else 775nm.
    #[arg(long, value_parser = parse_length)]
    carrier: Option<f64>,

    /// Subtract this accidental coincidence rate (Hz) before fitting.
    #[arg(long, requires = "integration_time")]
    accidental_rate: Option<f64>,

    /// Integration time per point (s) for `--accidental-rate`.
    #[arg(long, requires = "accidental_rate")]
    integration_time: Option<f64>,

    /// Report path; defaults to the data path with `.fit.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub model: FitKind,
    pub options: FitOptions,
    /// Metadata of the fitted data, including the configuration that made it.
    pub data: Metadata,
    pub fit: FringeFit,
}

impl FitReport {
    pub fn to_json(&self) -> Result<String, Failure> {
        serde_json::to_string_pretty(self).map_err(|e| Failure::usage(e.to_string()))
    }

    pub fn print_summary(&self) {
        let f = &self.fit;
        println!(
            "visibility = {:.4} ± {:.4}",
            f.visibility.value, f.visibility.stderr
        );
        if let Some(w) = f.envelope_fwhm {
            println!(
                "fwhm       = {:.4} ± {:.4} mm",
                w.value * 1e3,
                w.stderr * 1e3
            );
        }
        if let Some(p) = f.carrier_period {
            println!(
                "period     = {:.3} ± {:.3} nm",
                p.value * 1e9,
                p.stderr * 1e9
            );
        }
        if !f.flags.is_empty() {
            let names: Vec<String> = f
                .flags
                .iter()
                .map(|x| {
                    serde_json::to_value(x)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default()
                })
                .collect();
            println!("flags      = {}", names.join(", "));
        }
    }
}

pub fn fit_report(
    data: &Interferogram,
    kind: FitKind,
    options: &FitOptions,
    input: Option<&Path>,
) -> Result<FitReport, Failure> {
    let data = match (options.accidental_rate, options.integration_time) {
        (Some(rate), Some(t)) => subtract_accidentals(data, rate, t)?,
        _ => data.clone(),
    };
    let fit = match kind {
        FitKind::Sinusoid => fit_sinusoid(&data, options.carrier)?,
        FitKind::Sinc => fit_dip_or_peak(&data, DipShape::Sinc)?,
        FitKind::Gaussian => fit_dip_or_peak(&data, DipShape::Gaussian)?,
        FitKind::Envelope => fit_gaussian_envelope(&data, options.carrier)?,
        FitKind::Composite => fit_composite(&data, options.carrier)?,
    };
    Ok(FitReport {
        schema: 1,
        input: input.map(|p| p.display().to_string()),
        model: kind,
        options: options.clone(),
        data: data.metadata.clone(),
        fit,
    })
}

pub fn read_data(path: &Path) -> Result<Interferogram, Failure> {
    let file = std::fs::File::open(path)
        .map_err(|e| Failure::usage(format!("cannot open {}: {e}", path.display())))?;
    // Anything wrong with the file is an input problem, whatever its kind.
    let data = Interferogram::read_csv(BufReader::new(file))
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if data.is_empty() {
        return Err(Failure::usage(format!("{}: no data rows", path.display())));
    }
    Ok(data)
}

pub fn run(args: FitArgs) -> Result<(), Failure> {
    let data = read_data(&args.data)?;
    let mut options = FitOptions::for_data(&data, args.carrier);
    options.accidental_rate = args.accidental_rate;
    options.integration_time = args.integration_time;
    let report = fit_report(&data, args.model, &options, Some(&args.data))?;
    let out = args
        .out
        .unwrap_or_else(|| args.data.with_extension("fit.json"));
    write_file(&out, &report.to_json()?)?;
    report.print_summary();
    Ok(())
}
