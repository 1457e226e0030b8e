use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use twinfringe::fringe::{Interferogram, ScanRange};
use twinfringe::lab::{ScenarioConfig, ScenarioName, ScenarioOverrides};

use crate::fit::{fit_report, FitKind, FitOptions};
use crate::units::parse_length;
use crate::{env_seed, write_file, Failure};

/// Contents of a `--config` file. Every section is optional; missing values
/// fall back to the scenario defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<ScenarioName>,
    #[serde(default)]
    pub simulation: ScenarioOverrides,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Path prefix for `.csv`, `.json` and `.fit.json`.
    pub prefix: Option<PathBuf>,
    /// Probabilities only, no simulated counts.
    #[serde(default)]
    pub ideal: bool,
    pub fit: Option<FitKind>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// One of the names printed by `scenarios`.
    #[arg(long)]
    scenario: Option<ScenarioName>,

    /// JSON run configuration; command-line flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Input delay Δx₁ (e.g. 2.0mm).
    #[arg(long, value_parser = parse_length, allow_hyphen_values = true)]
    dx1: Option<f64>,

    /// Scan Δx₂ over ±half-width.
    #[arg(long, value_parser = parse_length)]
    half_width: Option<f64>,

    #[arg(long, value_parser = parse_length)]
    step: Option<f64>,

    /// Overrides both the config file and TWINFRINGE_SEED.
    #[arg(long)]
    seed: Option<u64>,

    /// Skip the counting simulation and write probabilities only.
    #[arg(long)]
    ideal: bool,

    /// Also fit this model to the simulated data.
    #[arg(long, value_enum)]
    fit: Option<FitKind>,

    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn load_config(path: &PathBuf) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    // serde_json errors carry "at line L column C".
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Applies flags and the environment over the file configuration.
fn resolve(args: &ScanArgs) -> Result<(ScenarioConfig, OutputSpec), Failure> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let name = args
        .scenario
        .or(file.scenario)
        .ok_or_else(|| Failure::usage("no scenario given (use --scenario or a config file)"))?;
    let mut config = ScenarioConfig::defaults(name).with_overrides(&file.simulation);
    if let Some(seed) = env_seed()? {
        config.seed = seed;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dx1) = args.dx1 {
        config.delta_x1 = dx1;
    }
    if args.half_width.is_some() || args.step.is_some() {
        let r = config.range;
        let half = args.half_width.unwrap_or(0.5 * (r.stop - r.start).abs());
        config.range = ScanRange::symmetric(half, args.step.unwrap_or(r.step));
    }
    let mut output = file.output;
    output.ideal |= args.ideal;
    if args.fit.is_some() {
        output.fit = args.fit;
    }
    if args.out.is_some() {
        output.prefix = args.out.clone();
    }
    if output.prefix.is_none() {
        output.prefix = Some(PathBuf::from(name.as_str()));
    }
    config.validate()?;
    Ok((config, output))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn run(args: ScanArgs) -> Result<(), Failure> {
    let (config, output) = resolve(&args)?;
    let data: Interferogram = if output.ideal {
        config.ideal()?
    } else {
        config.run()?
    };
    let prefix = output.prefix.as_ref().expect("resolved");
    let csv = with_suffix(prefix, ".csv");
    let json = with_suffix(prefix, ".json");
    write_file(&csv, &data.to_csv_string()?)?;
    write_file(&json, &data.to_json_string()?)?;
    println!(
        "{}: {} points, seed {} -> {}, {}",
        config.scenario,
        data.len(),
        config.seed,
        csv.display(),
        json.display()
    );
    if let Some(kind) = output.fit {
        let options = FitOptions::for_data(&data, None);
        let report = fit_report(&data, kind, &options, Some(&csv))?;
        let path = with_suffix(prefix, ".fit.json");
        write_file(&path, &report.to_json()?)?;
        report.print_summary();
    }
    Ok(())
}
