use std::f64::consts::PI;

use clap::Args;
use rand::Rng;

use twinfringe::fringe::{DelayConfig, FringeEvaluator};
use twinfringe::lab::{point_rng, DEFAULT_SEED};
use twinfringe::optics::{mzi_network, oracle_outcomes};
use twinfringe::spectral::{summarize, SourceModel};
use twinfringe::SPEED_OF_LIGHT as C;

use crate::{env_seed, Failure};

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Seed for the randomly drawn test delays.
    #[arg(long)]
    seed: Option<u64>,

    /// Force every frequency grid to this many points.
    #[arg(long, hide = true)]
    grid_points: Option<usize>,
}

pub struct Check {
    pub name: &'static str,
    /// Pass flag and detail, or the error that stopped the check.
    pub outcome: Result<(bool, String), String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Ok((true, _)))
    }
}

type Outcome = twinfringe::Result<(bool, String)>;

fn source(base: SourceModel, grid: Option<usize>, default: usize) -> SourceModel {
    SourceModel {
        grid_points: grid.unwrap_or(default),
        ..base
    }
}

fn sources(grid: Option<usize>, default: usize) -> [SourceModel; 3] {
    [
        source(SourceModel::mzi_standard(), grid, default),
        source(SourceModel::pmi_degenerate(), grid, default),
        source(SourceModel::pmi_nondegenerate(), grid, default),
    ]
}

/// Quadrature against the operator oracle, plus probability conservation
/// in the oracle, at random delays and phases.
fn oracle_checks(grid: Option<usize>, seed: u64) -> [Check; 2] {
    let run = || -> twinfringe::Result<(f64, f64)> {
        let (mut agree, mut unitary): (f64, f64) = (0.0, 0.0);
        for (s, model) in sources(grid, 32).into_iter().enumerate() {
            let jsa = model.build()?;
            let ev = FringeEvaluator::new(&jsa);
            // Every delay combination stays inside half the alias period.
            let reach = 0.2 * jsa.grid().alias_period() * C;
            for k in 0..4 {
                let mut rng = point_rng(seed, 10 + s as u64, k);
                let d = DelayConfig {
                    delta_x1: rng.random_range(-reach..reach),
                    delta_x2: rng.random_range(-reach..reach),
                    phase_offset: rng.random_range(-PI..PI),
                };
                let o =
                    oracle_outcomes(&mzi_network(d.delta_x1, d.delta_x2, d.phase_offset), &jsa)?;
                agree = agree.max((ev.full(&d)? - o.coincidence).abs());
                unitary = unitary.max((o.total - 1.0).abs());
            }
        }
        Ok((agree, unitary))
    };
    let result = run().map_err(|e| e.to_string());
    [
        Check {
            name: "quadrature matches operator oracle (1e-6)",
            outcome: result
                .clone()
                .map(|(a, _)| (a < 1e-6, format!("max deviation {a:.2e}"))),
        },
        Check {
            name: "oracle conserves probability (1e-12)",
            outcome: result.map(|(_, u)| (u < 1e-12, format!("max |total - 1| {u:.2e}"))),
        },
    ]
}

/// With simultaneous photons the general integral is the NOON form.
fn noon_limit(grid: Option<usize>, seed: u64) -> Outcome {
    let jsa = source(SourceModel::mzi_standard(), grid, 256).build()?;
    let ev = FringeEvaluator::new(&jsa);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let dx2 = point_rng(seed, 20, k).random_range(-3e-3..3e-3);
        worst = worst.max((ev.full(&DelayConfig::new(0.0, dx2))? - ev.noon(dx2 / C, 0.0)?).abs());
    }
    Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
}

/// Well separated photons: centre and side regions follow their limits.
fn separated_limit(grid: Option<usize>, seed: u64) -> Outcome {
    // Gaussian filters; the grid keeps every delay far from an alias period.
    let jsa = source(SourceModel::pmi_degenerate(), grid, 2048).build()?;
    let ev = FringeEvaluator::new(&jsa);
    let t_two = summarize(&jsa).two_photon_coherence_time;
    let mut worst: f64 = 0.0;
    for k in 0..9 {
        let mut rng = point_rng(seed, 30, k);
        let dx1 = rng.random_range(5.0..7.5) * t_two * C;
        let d = rng.random_range(-0.05e-3..0.05e-3);
        let (full, limit) = match k % 3 {
            0 => (ev.full(&DelayConfig::new(dx1, d))?, ev.center(d / C, 0.0)?),
            1 => (ev.full(&DelayConfig::new(dx1, dx1 + d))?, ev.side(d / C)?),
            _ => (ev.full(&DelayConfig::new(dx1, -dx1 + d))?, ev.side(-d / C)?),
        };
        worst = worst.max((full - limit).abs());
    }
    Ok((worst < 1e-4, format!("max deviation {worst:.2e}")))
}

/// HOM dip reaches near zero at equal delay and returns to one half.
fn hom_limits(grid: Option<usize>) -> Outcome {
    let jsa = source(SourceModel::mzi_standard(), grid, 256).build()?;
    let ev = FringeEvaluator::new(&jsa);
    let bottom = ev.hom(0.0)?;
    let far = ev.hom(3e-3 / C)?.max(ev.hom(-3e-3 / C)?);
    let pass = bottom < 0.01 && (far - 0.5).abs() < 1e-3;
    Ok((pass, format!("P(0) = {bottom:.4}, P(±3 mm) = {far:.4}")))
}

pub fn checks(grid: Option<usize>, seed: u64) -> Vec<Check> {
    let mut out: Vec<Check> = oracle_checks(grid, seed).into();
    out.push(Check {
        name: "simultaneous photons follow the NOON form (1e-10)",
        outcome: noon_limit(grid, seed).map_err(|e| e.to_string()),
    });
    out.push(Check {
        name: "separated photons follow centre/side limits (1e-4)",
        outcome: separated_limit(grid, seed).map_err(|e| e.to_string()),
    });
    out.push(Check {
        name: "HOM dip depth and baseline",
        outcome: hom_limits(grid).map_err(|e| e.to_string()),
    });
    out
}

pub fn run(args: ValidateArgs) -> Result<(), Failure> {
    let seed = args.seed.or(env_seed()?).unwrap_or(DEFAULT_SEED);
    let results = checks(args.grid_points, seed);
    let mut failed = 0;
    for c in &results {
        let (tag, detail) = match &c.outcome {
            Ok((true, d)) => ("PASS", d.clone()),
            Ok((false, d)) => ("FAIL", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        if !c.passed() {
            failed += 1;
        }
        println!("{tag}  {:<52} {detail}", c.name);
    }
    println!(
        "{} of {} checks passed (seed {seed})",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        return Err(Failure::numerical(format!("{failed} check(s) failed")));
    }
    Ok(())
}
