use num_complex::Complex64;
use proptest::prelude::*;
use twinfringe::fringe::{
    envelope_probability, scan, DelayConfig, EnvelopeModel, FringeEvaluator, ScanMode, ScanRange,
    Scanner,
};
use twinfringe::optics::{
    oracle_coincidence, oracle_mzi_coincidence, ElementSpec, ModeLabel, Network, Spatial,
};
use twinfringe::spectral::{build_grid, summarize, JointSpectralAmplitude, SourceModel};
use twinfringe::SPEED_OF_LIGHT;

fn coarse(model: SourceModel) -> JointSpectralAmplitude {
    SourceModel {
        grid_points: 32,
        ..model
    }
    .build()
    .unwrap()
}

/// Real amplitude with independent random samples, symmetric or not.
fn random_real_jsa(values: &[f64], symmetric: bool) -> JointSpectralAmplitude {
    let grid = build_grid(1550e-9, 40e-9, 32).unwrap();
    let mut a: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if symmetric {
        for i in 0..32 {
            for j in 0..i {
                a[i * 32 + j] = a[j * 32 + i];
            }
        }
    }
    JointSpectralAmplitude::from_samples(grid, a).unwrap()
}

/// FWHM of a sampled non-negative envelope peaked at its centre sample.
fn sampled_fwhm(xs: &[f64], env: &[f64]) -> f64 {
    let mid = env.len() / 2;
    let half = 0.5 * env[mid];
    let cross = |range: Box<dyn Iterator<Item = usize>>| -> f64 {
        let mut prev = mid;
        for k in range {
            if env[k] < half {
                let t = (env[prev] - half) / (env[prev] - env[k]);
                return xs[prev] + t * (xs[k] - xs[prev]);
            }
            prev = k;
        }
        panic!("envelope never fell to half");
    };
    cross(Box::new(mid + 1..env.len())) - cross(Box::new((0..mid).rev()))
}

#[test]
fn quadrature_matches_oracle_on_standard_source() {
    let jsa = coarse(SourceModel::mzi_standard());
    let ev = FringeEvaluator::new(&jsa);
    for (dx1, dx2, phi) in [
        (0.0, 0.0, 0.0),
        (0.0, 0.37e-3, 0.0),
        (0.2e-3, -0.1e-3, 0.3),
        (1.5e-3, 1.5e-3, 0.0),
        (2.0e-3, -1.9e-3, 2.5),
    ] {
        let q = ev
            .full(&DelayConfig {
                delta_x1: dx1,
                delta_x2: dx2,
                phase_offset: phi,
            })
            .unwrap();
        let o = oracle_mzi_coincidence(&jsa, dx1, dx2, phi).unwrap();
        assert!((q - o).abs() < 1e-6, "({dx1}, {dx2}, {phi}): {q} vs {o}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrature_matches_oracle_for_random_real_amplitudes(
        values in prop::collection::vec(0.0..1.0f64, 32 * 32),
        symmetric in any::<bool>(),
        dx1 in -3e-3..3e-3f64,
        dx2 in -3e-3..3e-3f64,
        phi in -3.2..3.2f64,
    ) {
        let jsa = random_real_jsa(&values, symmetric);
        let q = FringeEvaluator::new(&jsa)
            .full(&DelayConfig { delta_x1: dx1, delta_x2: dx2, phase_offset: phi });
        let o = oracle_mzi_coincidence(&jsa, dx1, dx2, phi).unwrap();
        match q {
            Ok(q) => prop_assert!((q - o).abs() < 1e-6, "{} vs {}", q, o),
            // Only a broken symmetry may be refused, never a symmetric source.
            Err(e) => prop_assert!(!symmetric, "{}", e),
        }
    }
}

#[test]
fn single_splitter_quadrature_matches_oracle() {
    let jsa = coarse(SourceModel::mzi_standard());
    let ev = FringeEvaluator::new(&jsa);
    let p = Spatial::Port;
    for dx in [0.0, 0.05e-3, 0.13e-3, 0.4e-3, -0.2e-3] {
        let net = Network {
            elements: vec![
                ElementSpec::delay(p(2), dx),
                ElementSpec::balanced_bs(p(1), p(2), p(3), p(4)),
            ],
            inputs: [ModeLabel::port(1), ModeLabel::port(2)],
            detectors: [p(3), p(4)],
        };
        let o = oracle_coincidence(&net, &jsa).unwrap();
        let q = ev.hom(dx / SPEED_OF_LIGHT).unwrap();
        assert!((q - o).abs() < 1e-10, "{dx}: {q} vs {o}");
    }
}

#[test]
fn zero_input_delay_reduces_to_noon_form() {
    let jsa = SourceModel::mzi_standard().build().unwrap();
    let ev = FringeEvaluator::new(&jsa);
    let mut worst: f64 = 0.0;
    for k in -300..=300 {
        let dx2 = k as f64 * 10.3e-6;
        let full = ev.full(&DelayConfig::new(0.0, dx2)).unwrap();
        let noon = ev.noon(dx2 / SPEED_OF_LIGHT, 0.0).unwrap();
        worst = worst.max((full - noon).abs());
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn large_input_delay_reduces_to_center_and_side_forms_gaussian_source() {
    let jsa = SourceModel {
        grid_points: 2048,
        ..SourceModel::pmi_degenerate()
    }
    .build()
    .unwrap();
    let t_two = summarize(&jsa).two_photon_coherence_time;
    let ev = FringeEvaluator::new(&jsa);
    for (k, factor) in [5.0, 6.3, 7.9].into_iter().enumerate() {
        let tau1 = factor * t_two;
        let dx1 = tau1 * SPEED_OF_LIGHT;
        for j in -4..=4 {
            let d = j as f64 * 0.011e-3 * (k + 1) as f64;
            let full = ev.full(&DelayConfig::new(dx1, d)).unwrap();
            let center = ev.center(d / SPEED_OF_LIGHT, 0.0).unwrap();
            assert!(
                (full - center).abs() < 1e-4,
                "centre {factor} {d}: {full} vs {center}"
            );
            for sign in [1.0, -1.0] {
                let full = ev.full(&DelayConfig::new(dx1, sign * dx1 + d)).unwrap();
                let side = ev.side(sign * d / SPEED_OF_LIGHT).unwrap();
                assert!(
                    (full - side).abs() < 1e-4,
                    "side {sign} {factor} {d}: {full} vs {side}"
                );
            }
        }
    }
}

#[test]
fn probabilities_stay_in_unit_interval() {
    let jsa = SourceModel::mzi_standard().build().unwrap();
    let scanner = Scanner::new(&jsa);
    for dx1 in [0.0, 0.6e-3, 2.0e-3] {
        for mode in [
            ScanMode::Full,
            ScanMode::Noon,
            ScanMode::Center,
            ScanMode::Side,
        ] {
            let i = scanner
                .run(dx1, &ScanRange::symmetric(2.5e-3, 7.7e-6), mode)
                .unwrap();
            assert!(i.probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}

#[test]
fn side_dip_width_equals_single_photon_length() {
    let jsa = SourceModel::mzi_standard().build().unwrap();
    let s = summarize(&jsa);
    let scanner = Scanner::new(&jsa);
    let dx1 = 2.0e-3;
    let range = ScanRange {
        start: dx1 - 0.6e-3,
        stop: dx1 + 0.6e-3,
        step: 1e-6,
    };
    let i = scanner.run(dx1, &range, ScanMode::Side).unwrap();
    let xs: Vec<f64> = i.delta_x2_values.iter().map(|x| x - dx1).collect();
    let env: Vec<f64> = i.probabilities.iter().map(|p| (0.5 - p) / 0.125).collect();
    let w = sampled_fwhm(&xs, &env);
    let rel = (w - s.single_photon_coherence_length).abs() / s.single_photon_coherence_length;
    assert!(rel < 0.02, "{w} vs {}", s.single_photon_coherence_length);
}

#[test]
fn noon_envelope_width_equals_two_photon_length() {
    let jsa = SourceModel::mzi_standard().build().unwrap();
    let s = summarize(&jsa);
    let ev = FringeEvaluator::new(&jsa);
    // Envelope from the fringe itself: max over one carrier period of |P − ½|.
    let period = 775e-9;
    let xs: Vec<f64> = (-60..=60).map(|k| k as f64 * 25e-6).collect();
    let env: Vec<f64> = xs
        .iter()
        .map(|&x| {
            (0..64)
                .map(|j| {
                    let dx = x + period * j as f64 / 64.0;
                    (ev.noon(dx / SPEED_OF_LIGHT, 0.0).unwrap() - 0.5).abs()
                })
                .fold(0.0, f64::max)
                * 2.0
        })
        .collect();
    let w = sampled_fwhm(&xs, &env);
    let rel = (w - s.two_photon_coherence_length).abs() / s.two_photon_coherence_length;
    assert!(rel < 0.02, "{w} vs {}", s.two_photon_coherence_length);
}

#[test]
fn carrier_period_is_pump_wavelength() {
    let jsa = SourceModel::mzi_standard().build().unwrap();
    let step = 5e-9;
    let i = Scanner::new(&jsa)
        .run(0.0, &ScanRange::symmetric(4e-6, step), ScanMode::Full)
        .unwrap();
    let p = &i.probabilities;
    let peaks: Vec<f64> = (1..p.len() - 1)
        .filter(|&k| p[k] > p[k - 1] && p[k] >= p[k + 1] && p[k] > 0.9)
        .map(|k| i.delta_x2_values[k])
        .collect();
    assert!(peaks.len() >= 8, "{peaks:?}");
    for w in peaks.windows(2) {
        assert!((w[1] - w[0] - 775e-9).abs() <= step, "{}", w[1] - w[0]);
    }
}

#[test]
fn envelope_model_tracks_full_central_fringe() {
    let jsa = SourceModel::mzi_standard().build().unwrap();
    let model = EnvelopeModel::from_summary(&summarize(&jsa), 775e-9);
    let range = ScanRange::symmetric(1.4e-3, 1e-6);
    let full = scan(&jsa, 2e-3, &range, ScanMode::Full).unwrap();
    let ss: f64 = full
        .delta_x2_values
        .iter()
        .zip(&full.probabilities)
        .map(|(&x, &p)| (envelope_probability(&model, x) - p).powi(2))
        .sum();
    let rms = (ss / full.len() as f64).sqrt();
    assert!(rms < 0.03, "rms {rms}");
}
