//! Simulated experiments: pair statistics and gated detection, accidentals,
//! Poisson counts, arm-phase randomization and canned scenarios.
//!
//! Every random draw comes from a stream keyed by (seed, purpose, point
//! index), so results do not depend on thread count or evaluation order.

mod detection;
mod randomize;
mod scenario;

pub use detection::{
    expected_counts, point_rng, simulate_counts, DetectorSpec, ExpectedCounts, SourceRateSpec,
};
pub use randomize::{
    phase_randomized_scan, phase_randomized_scan_jsa, stratified_phases, MIN_PHASE_SAMPLES,
};
pub use scenario::{
    run_scenario, Imperfections, ScenarioConfig, ScenarioName, ScenarioOverrides, DEFAULT_SEED,
};
