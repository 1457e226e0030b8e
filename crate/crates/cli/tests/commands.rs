use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use twinfringe::fringe::Interferogram;
use twinfringe::spectral::{summarize, SourceModel};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_twinfringe"));
    c.env_remove("TWINFRINGE_SEED");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read(path: PathBuf) -> Interferogram {
    Interferogram::read_csv(std::fs::read(path).unwrap().as_slice()).unwrap()
}

#[test]
fn scenarios_lists_every_name() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["scenarios"]);
    assert_eq!(code(&o), 0);
    for name in [
        "hom_dip",
        "noon",
        "mzi_tssa_tssb",
        "pmi_degenerate",
        "pmi_nondegenerate",
    ] {
        assert!(stdout(&o).contains(name), "{name} missing");
    }
}

#[test]
fn noon_scan_writes_csv_and_json_with_resolved_config() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &[
            "scan",
            "--scenario",
            "noon",
            "--dx1",
            "0",
            "--half-width",
            "0.2mm",
            "--step",
            "2um",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("noon.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "delta_x2_m,probability,counts");
    let doc = json(dir.path().join("noon.json"));
    assert_eq!(doc["schema"], 1);
    let config = &doc["metadata"]["source"];
    assert_eq!(config["scenario"], "noon");
    assert_eq!(config["delta_x1"], 0.0);
    assert_eq!(config["range"]["step"], 2e-6);
    assert!(config["detector"].is_object() && config["rates"].is_object());
    assert_eq!(doc["delta_x2_m"].as_array().unwrap().len(), 201);
    assert_eq!(doc["counts"].as_array().unwrap().len(), 201);
}

#[test]
fn separated_photons_give_central_fringe_and_side_dips() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &[
            "scan",
            "--scenario",
            "mzi_tssa_tssb",
            "--dx1",
            "2.0mm",
            "--step",
            "5um",
            "--ideal",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let data = read(dir.path().join("mzi_tssa_tssb.csv"));
    assert_eq!(data.metadata.delta_x1, Some(2e-3));
    let extreme = |lo: f64, hi: f64| {
        let p = data
            .delta_x2_values
            .iter()
            .zip(&data.probabilities)
            .filter(|(x, _)| (lo..hi).contains(*x))
            .map(|(_, p)| *p);
        p.clone().fold(f64::INFINITY, f64::min)..=p.fold(0.0, f64::max)
    };
    // Side dips of visibility one quarter: minimum near 3/8.
    for centre in [-2e-3, 2e-3] {
        let r = extreme(centre - 0.2e-3, centre + 0.2e-3);
        assert!((r.start() - 0.375).abs() < 0.01, "dip at {centre}: {r:?}");
    }
    // At zero arm delay both envelopes are one and the pair exits together;
    // nearby the carrier pulls the probability below one half.
    let mid = extreme(-0.1e-3, 0.1e-3);
    assert!(*mid.end() > 0.99 && *mid.start() < 0.48, "{mid:?}");
    // Between the features only filter tails remain; they average to one half.
    let between: Vec<f64> = data
        .delta_x2_values
        .iter()
        .zip(&data.probabilities)
        .filter(|(x, _)| (-1.6e-3..-1.2e-3).contains(*x))
        .map(|(_, p)| *p)
        .collect();
    let mean = between.iter().sum::<f64>() / between.len() as f64;
    assert!((mean - 0.5).abs() < 0.005, "{mean}");
}

#[test]
fn length_units_are_interchangeable() {
    let dir = TempDir::new().unwrap();
    let base = [
        "scan",
        "--scenario",
        "mzi_tssa_tssb",
        "--half-width",
        "0.05mm",
        "--step",
        "1um",
    ];
    let a = run(
        dir.path(),
        &[&base[..], &["--dx1", "2.0mm", "--out", "a"]].concat(),
    );
    let b = run(
        dir.path(),
        &[&base[..], &["--dx1", "2000um", "--out", "b"]].concat(),
    );
    assert_eq!((code(&a), code(&b)), (0, 0));
    let bytes = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(bytes("a.csv"), bytes("b.csv"));
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["scan", "--scenario", "noon", "--config", "nowhere.json"],
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nowhere.json"));
}

#[test]
fn unknown_config_key_is_reported_with_its_line() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        "{\n  \"scenario\": \"noon\",\n  \"simulation\": { \"seeed\": 3 }\n}\n",
    )
    .unwrap();
    let o = run(dir.path(), &["scan", "--config", "run.json"]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).contains("seeed") && stderr(&o).contains("line 3"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn invalid_physics_in_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"scenario": "noon", "simulation": {"imperfections": {"visibility_factor": 1.5}}}"#,
    )
    .unwrap();
    let o = run(dir.path(), &["scan", "--config", "run.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("visibility_factor"));
}

#[test]
fn bad_arguments_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["scan", "--scenario", "nope"])), 2);
    assert_eq!(
        code(&run(
            dir.path(),
            &["scan", "--scenario", "noon", "--dx1", "2 furlongs"]
        )),
        2
    );
    assert_eq!(code(&run(dir.path(), &["scan"])), 2);
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn config_file_and_seed_precedence() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"scenario": "noon",
            "simulation": {"seed": 5, "range": {"start": -1e-5, "stop": 1e-5, "step": 1e-7}},
            "output": {"prefix": "from_file"}}"#,
    )
    .unwrap();
    let seed_of = |name: &str| read(dir.path().join(name)).metadata.seed.unwrap();

    assert_eq!(code(&run(dir.path(), &["scan", "--config", "run.json"])), 0);
    assert_eq!(seed_of("from_file.csv"), 5);

    let o = bin()
        .current_dir(dir.path())
        .env("TWINFRINGE_SEED", "9")
        .args(["scan", "--config", "run.json", "--out", "env"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(seed_of("env.csv"), 9);
    assert_ne!(
        read(dir.path().join("env.csv")).counts,
        read(dir.path().join("from_file.csv")).counts
    );

    let o = bin()
        .current_dir(dir.path())
        .env("TWINFRINGE_SEED", "9")
        .args([
            "scan", "--config", "run.json", "--seed", "11", "--out", "flag",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(seed_of("flag.csv"), 11);

    let o = bin()
        .current_dir(dir.path())
        .env("TWINFRINGE_SEED", "many")
        .args(["scan", "--config", "run.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let args = [
        "scan",
        "--scenario",
        "pmi_degenerate",
        "--half-width",
        "0.3mm",
        "--step",
        "2um",
    ];
    for t in ["1", "3", "8"] {
        let o = run(
            dir.path(),
            &[&args[..], &["--threads", t, "--out", t]].concat(),
        );
        assert_eq!(code(&o), 0);
    }
    let bytes = |t: &str| std::fs::read(dir.path().join(format!("{t}.csv"))).unwrap();
    assert_eq!(bytes("1"), bytes("3"));
    assert_eq!(bytes("1"), bytes("8"));
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    for (scenario, extra) in [("hom_dip", "--ideal"), ("noon", "--step=7um")] {
        let o = run(dir.path(), &["scan", "--scenario", scenario, extra]);
        assert_eq!(code(&o), 0);
        let original = std::fs::read(dir.path().join(format!("{scenario}.csv"))).unwrap();
        let again = Interferogram::read_csv(original.as_slice())
            .unwrap()
            .to_csv_string()
            .unwrap();
        assert_eq!(original, again.into_bytes(), "{scenario}");
    }
}

#[test]
fn fit_of_noiseless_noon_fringe_has_unit_visibility() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &[
            "scan",
            "--scenario",
            "noon",
            "--half-width",
            "2um",
            "--step",
            "5nm",
            "--ideal",
        ],
    );
    assert_eq!(code(&o), 0);
    let o = run(dir.path(), &["fit", "noon.csv", "--model", "sinusoid"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("visibility = 1.0000"), "{}", stdout(&o));
    let report = json(dir.path().join("noon.fit.json"));
    assert_eq!(report["schema"], 1);
    assert_eq!(report["model"], "sinusoid");
    // The report carries the configuration that produced the data.
    assert_eq!(report["data"]["source"]["scenario"], "noon");
    assert_eq!(report["options"]["carrier"], 775e-9);
    let v = report["fit"]["visibility"]["value"].as_f64().unwrap();
    let period = report["fit"]["carrier_period"]["value"].as_f64().unwrap();
    // The two-photon envelope curves by a few parts per million over ±2 µm.
    assert!((v - 1.0).abs() < 1e-4, "{v}");
    assert!((period / 775e-9 - 1.0).abs() < 1e-3, "{period}");
}

#[test]
fn hom_sinc_fit_width_matches_single_photon_coherence_length() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["scan", "--scenario", "hom_dip", "--ideal", "--fit", "sinc"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fwhm = json(dir.path().join("hom_dip.fit.json"))["fit"]["envelope_fwhm"]["value"]
        .as_f64()
        .unwrap();
    let want =
        summarize(&SourceModel::mzi_standard().build().unwrap()).single_photon_coherence_length;
    assert!(
        (fwhm / want - 1.0).abs() < 0.03,
        "fit {fwhm:e} vs spectral {want:e}"
    );
}

#[test]
fn fit_with_accidental_subtraction_records_the_options() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &[
            "scan",
            "--scenario",
            "noon",
            "--half-width",
            "1.5mm",
            "--step",
            "2um",
        ],
    );
    assert_eq!(code(&o), 0);
    let raw = run(
        dir.path(),
        &[
            "fit", "noon.csv", "--model", "envelope", "--out", "raw.json",
        ],
    );
    let net = run(
        dir.path(),
        &[
            "fit",
            "noon.csv",
            "--model",
            "envelope",
            "--accidental-rate",
            "100",
            "--integration-time",
            "1",
            "--out",
            "net.json",
        ],
    );
    assert_eq!((code(&raw), code(&net)), (0, 0), "{}", stderr(&net));
    let v = |n: &str| {
        json(dir.path().join(n))["fit"]["visibility"]["value"]
            .as_f64()
            .unwrap()
    };
    assert!(v("net.json") > v("raw.json"));
    assert_eq!(
        json(dir.path().join("net.json"))["options"]["accidental_rate"],
        100.0
    );
    // Rate without a time is refused by the parser.
    let o = run(
        dir.path(),
        &[
            "fit",
            "noon.csv",
            "--model",
            "envelope",
            "--accidental-rate",
            "100",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn empty_and_malformed_csv_exit_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("empty.csv", ""),
        ("header_only.csv", "delta_x2_m,probability,counts\n"),
        ("wrong_header.csv", "x,y\n1,2\n"),
        (
            "bad_number.csv",
            "delta_x2_m,probability,counts\n0.0,half,\n",
        ),
        (
            "bad_probability.csv",
            "delta_x2_m,probability,counts\n0.0,1.5,\n",
        ),
    ];
    for (name, body) in cases {
        std::fs::write(dir.path().join(name), body).unwrap();
        let o = run(dir.path(), &["fit", name, "--model", "sinc"]);
        assert_eq!(code(&o), 2, "{name}: {}", stderr(&o));
    }
    assert_eq!(
        code(&run(dir.path(), &["fit", "absent.csv", "--model", "sinc"])),
        2
    );
}

#[test]
fn validate_passes_for_any_seed() {
    let dir = TempDir::new().unwrap();
    let a = run(dir.path(), &["validate", "--seed", "1"]);
    let b = run(dir.path(), &["validate", "--seed", "2"]);
    assert_eq!((code(&a), code(&b)), (0, 0), "{}", stdout(&a));
    let outcomes = |o: &Output| {
        stdout(o)
            .lines()
            .map(|l| l.split_whitespace().next().unwrap_or("").to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(outcomes(&a), outcomes(&b));
    assert_eq!(stdout(&a).matches("PASS").count(), 5);
}

#[test]
fn validate_fails_on_a_starved_grid() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["validate", "--grid-points", "8"]);
    assert_ne!(code(&o), 0);
    assert!(stdout(&o).contains("FAIL"));
    assert!(!stdout(&o).contains("PASS"));
}
