use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::lm::{covariance, Model, Problem};
use super::{DipShape, Estimate, FitFlag, FitModel, FringeFit};
use crate::fringe::{sinc, EnvelopeModel, FShape, GShape, Interferogram, SINC_FWHM_PER_ZERO};
use crate::spectral::FWHM_PER_SIGMA;
use crate::{Error, Result};

/// Relative RMS residual above which a noiseless fit counts as the wrong shape.
pub const SHAPE_MISMATCH_RMS: f64 = 0.05;
/// Reduced χ² above which a counts fit counts as the wrong shape.
pub const SHAPE_MISMATCH_CHI2: f64 = 4.0;
pub const ILL_CONDITIONED: f64 = 1e8;

const MIN_POINTS: usize = 8;

struct Obs {
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    poisson: bool,
    /// Counts per point already removed as accidentals.
    removed: f64,
}

impl Obs {
    fn new(data: &Interferogram) -> Result<Self> {
        data.validate()?;
        if data.len() < MIN_POINTS {
            return Err(Error::InsufficientData(format!(
                "{} points, need at least {MIN_POINTS}",
                data.len()
            )));
        }
        let x = data.delta_x2_values.clone();
        if x.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Format("delta_x2 values must increase".into()));
        }
        // After accidental subtraction the variance is still that of the raw counts.
        let removed: f64 = data
            .metadata
            .notes
            .get(super::SUBTRACTED_NOTE)
            .and_then(|v| v.parse().ok())
            .unwrap_or(0.0);
        Ok(match &data.counts {
            Some(c) => Self {
                x,
                y: c.iter().map(|&v| v as f64).collect(),
                w: c.iter()
                    .map(|&v| 1.0 / (v as f64 + removed).max(1.0))
                    .collect(),
                poisson: true,
                removed,
            },
            None => Self {
                x,
                w: vec![1.0; data.len()],
                y: data.probabilities.clone(),
                poisson: false,
                removed: 0.0,
            },
        })
    }

    fn span(&self) -> f64 {
        self.x[self.x.len() - 1] - self.x[0]
    }

    /// Median of the outer quarter of the scan.
    fn edge_level(&self) -> f64 {
        let n = self.y.len();
        let k = (n / 8).max(1);
        let mut edge: Vec<f64> = self.y[..k]
            .iter()
            .chain(&self.y[n - k..])
            .copied()
            .collect();
        edge.sort_by(f64::total_cmp);
        let m = edge.len();
        if m % 2 == 1 {
            edge[m / 2]
        } else {
            0.5 * (edge[m / 2 - 1] + edge[m / 2])
        }
    }

    fn problem(&self, scale: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Problem<'_> {
        Problem {
            x: &self.x,
            y: &self.y,
            w: &self.w,
            scale,
            lower,
            upper,
        }
    }
}

struct Fitted {
    p: Vec<f64>,
    se: Vec<f64>,
    chi2: f64,
    iterations: usize,
    condition: f64,
    residual_rms: f64,
}

/// Best of several starts, with standard errors.
fn run(
    obs: &Obs,
    prob: &Problem,
    model: &dyn Model,
    starts: &[Vec<f64>],
    level: f64,
) -> Result<Fitted> {
    let mut best: Option<super::lm::Solution> = None;
    let mut last_err = None;
    let mut iterations = 0;
    for s in starts {
        match prob.solve(model, s) {
            Ok(sol) => {
                iterations += sol.iterations;
                if best.as_ref().is_none_or(|b| sol.chi2 < b.chi2) {
                    best = Some(sol);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let mut sol = match best {
        Some(s) => s,
        None => return Err(last_err.expect("at least one start")),
    };
    if obs.poisson {
        // Weights taken from the data pull the fit towards bins that
        // fluctuated low. One pass reweighted by the fitted model removes
        // that bias without changing the fixed point for exact data.
        let w: Vec<f64> = obs
            .x
            .iter()
            .map(|&x| 1.0 / (model.eval(x, &sol.params) + obs.removed).max(1.0))
            .collect();
        let again = Problem {
            w: &w,
            ..prob.clone()
        };
        let refined = again.solve(model, &sol.params)?;
        iterations += refined.iterations;
        sol = refined;
    }
    let n = obs.x.len();
    let dof = n.saturating_sub(sol.params.len());
    let factor = if obs.poisson {
        1.0
    } else if dof > 0 {
        sol.chi2 / dof as f64
    } else {
        f64::INFINITY
    };
    let (cov, condition) = covariance(&sol.normal, factor);
    let se = (0..sol.params.len()).map(|j| cov[(j, j)].sqrt()).collect();
    let ss: f64 = obs
        .x
        .iter()
        .zip(&obs.y)
        .map(|(&x, &y)| (y - model.eval(x, &sol.params)).powi(2))
        .sum();
    Ok(Fitted {
        residual_rms: (ss / n as f64).sqrt() / level.abs(),
        chi2: sol.chi2,
        iterations,
        condition,
        se,
        p: sol.params,
    })
}

fn shape_mismatch(obs: &Obs, f: &Fitted) -> bool {
    if obs.poisson {
        let dof = obs.x.len().saturating_sub(f.p.len()).max(1);
        f.chi2 / dof as f64 > SHAPE_MISMATCH_CHI2
    } else {
        f.residual_rms > SHAPE_MISMATCH_RMS
    }
}

fn maps(names: &[&str], f: &Fitted) -> (BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let p = names
        .iter()
        .map(|n| n.to_string())
        .zip(f.p.iter().copied())
        .collect();
    let s = names
        .iter()
        .map(|n| n.to_string())
        .zip(f.se.iter().copied())
        .collect();
    (p, s)
}

fn wrap_phase(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn scaled(e: Estimate, k: f64) -> Estimate {
    Estimate {
        value: e.value * k,
        stderr: e.stderr * k,
    }
}

fn est(f: &Fitted, j: usize) -> Estimate {
    Estimate {
        value: f.p[j],
        stderr: f.se[j],
    }
}

/// Period with the most power in `[lo, hi]`, on a frequency grid eight times
/// finer than the natural resolution of the scan.
fn dominant_period(x: &[f64], r: &[f64], lo: f64, hi: f64) -> f64 {
    let span = x[x.len() - 1] - x[0];
    let (f_lo, f_hi) = (1.0 / hi, 1.0 / lo);
    let df = 1.0 / (8.0 * span);
    let trials = (((f_hi - f_lo) / df).ceil() as usize).max(1);
    let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let uniform = x
        .iter()
        .enumerate()
        .all(|(k, &v)| (v - x[0] - k as f64 * h).abs() <= 1e-6 * h);
    let power = |f: f64| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        if uniform {
            // Phasor recurrence; drift over 10⁵ steps stays near 1e-11.
            let rot = Complex64::from_polar(1.0, -TAU * f * h);
            let mut z = Complex64::from_polar(1.0, -TAU * f * x[0]);
            for &v in r {
                acc += z * v;
                z *= rot;
            }
        } else {
            for (&xv, &v) in x.iter().zip(r) {
                acc += Complex64::from_polar(v, -TAU * f * xv);
            }
        }
        acc.norm_sqr()
    };
    let mut best = (f64::NEG_INFINITY, f_lo);
    for k in 0..=trials {
        let f = f_lo + (f_hi - f_lo) * k as f64 / trials as f64;
        let p = power(f);
        if p > best.0 {
            best = (p, f);
        }
    }
    1.0 / best.1
}

/// Weighted linear fit of `y ≈ a + C·cos(2πx/Λ) + S·sin(2πx/Λ)`.
fn linear_harmonic(obs: &Obs, period: f64) -> Option<(f64, f64, f64)> {
    let mut m = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for ((&x, &y), &w) in obs.x.iter().zip(&obs.y).zip(&obs.w) {
        let (s, c) = (TAU * x / period).sin_cos();
        let v = Vector3::new(1.0, c, s);
        m += w * v * v.transpose();
        b += w * y * v;
    }
    let sol = m.lu().solve(&b)?;
    Some((sol[0], sol[1], sol[2]))
}

/// Fits `a·(1 + V·cos(2πΔx₂/Λ + θ))`. Needs at least two carrier periods.
///
/// The period is located by a periodogram within ±15% of `carrier_guess`,
/// which stays clear of sampling aliases as long as the step is below the
/// period; then each of three carrier phases seeds a local fit.
pub fn fit_sinusoid(data: &Interferogram, carrier_guess: f64) -> Result<FringeFit> {
    if !(carrier_guess > 0.0 && carrier_guess.is_finite()) {
        return Err(Error::invalid("carrier_guess", "must be positive"));
    }
    let obs = Obs::new(data)?;
    if obs.span() < 2.0 * carrier_guess {
        return Err(Error::InsufficientData(format!(
            "scan spans {:.3e} m, less than two carrier periods",
            obs.span()
        )));
    }
    let mean = obs.y.iter().sum::<f64>() / obs.y.len() as f64;
    let centred: Vec<f64> = obs.y.iter().map(|y| y - mean).collect();
    let period = dominant_period(&obs.x, &centred, 0.85 * carrier_guess, 1.15 * carrier_guess);
    let (a0, c0, s0) = linear_harmonic(&obs, period).unwrap_or((mean, 0.0, 0.0));
    let a0 = if a0 > 0.0 {
        a0
    } else {
        mean.abs().max(f64::MIN_POSITIVE)
    };
    let v0 = (c0.hypot(s0) / a0).min(2.0);
    let theta0 = (-s0).atan2(c0);

    let model = |x: f64, p: &[f64]| p[0] * (1.0 + p[1] * (TAU * x / p[2] + p[3]).cos());
    let prob = obs.problem(
        vec![a0, 1.0, period, 1.0],
        vec![0.0, 0.0, 0.5 * period, f64::NEG_INFINITY],
        vec![f64::INFINITY, 2.0, 2.0 * period, f64::INFINITY],
    );
    let starts: Vec<Vec<f64>> = [theta0, 0.0, TAU / 3.0, 2.0 * TAU / 3.0]
        .iter()
        .map(|&t| vec![a0, v0, period, t])
        .collect();
    let mut f = run(&obs, &prob, &model, &starts, a0)?;
    f.p[3] = wrap_phase(f.p[3]);
    let mut flags = Vec::new();
    if shape_mismatch(&obs, &f) {
        flags.push(FitFlag::ShapeMismatch);
    }
    let (params, stderrs) = maps(&["baseline", "visibility", "period", "phase"], &f);
    Ok(FringeFit {
        model: FitModel::Sinusoid,
        visibility: est(&f, 1),
        envelope_fwhm: None,
        carrier_period: Some(est(&f, 2)),
        baseline: f.p[0],
        residual_rms: f.residual_rms,
        n_points: obs.x.len(),
        params,
        stderrs,
        flags,
        iterations: f.iterations,
        condition_number: f.condition,
    })
}

/// Three-point running mean, enough to keep single noisy bins from
/// steering the starting guesses.
fn smooth(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 2).min(n);
            v[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Fits `c·(1 ± V·shape((Δx₂ − x₀)/w))`; the sign is taken from the data.
///
/// The reported `envelope_fwhm` is the full width at half depth of the
/// fitted profile: 1.2067·w for a sinc (w to the first zero) and 2.3548·w
/// for a Gaussian.
pub fn fit_dip_or_peak(data: &Interferogram, shape: DipShape) -> Result<FringeFit> {
    let obs = Obs::new(data)?;
    let c0 = obs.edge_level();
    if !(c0 > 0.0) {
        return Err(Error::InsufficientData(
            "baseline level is not positive".into(),
        ));
    }
    let dev = smooth(&obs.y.iter().map(|y| y - c0).collect::<Vec<_>>());
    let (k, peak) = dev
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty");
    let sign = if peak < 0.0 { -1.0 } else { 1.0 };
    let half = 0.5 * peak.abs();
    let mut l = k;
    while l > 0 && dev[l].abs() > half {
        l -= 1;
    }
    let mut r = k;
    while r + 1 < dev.len() && dev[r].abs() > half {
        r += 1;
    }
    let step = obs.span() / (obs.x.len() - 1) as f64;
    let fwhm0 = (obs.x[r] - obs.x[l]).max(2.0 * step);
    let per_width = match shape {
        DipShape::Sinc => SINC_FWHM_PER_ZERO,
        DipShape::Gaussian => FWHM_PER_SIGMA,
    };
    let w0 = fwhm0 / per_width;
    let v0 = (peak.abs() / c0).min(2.0);

    let profile = move |u: f64| match shape {
        DipShape::Sinc => sinc(u),
        DipShape::Gaussian => (-0.5 * u * u).exp(),
    };
    let model = move |x: f64, p: &[f64]| p[0] * (1.0 + sign * p[1] * profile((x - p[2]) / p[3]));
    let prob = obs.problem(
        vec![c0, 1.0, w0, w0],
        vec![0.0, 0.0, obs.x[0], step],
        vec![f64::INFINITY, 2.0, obs.x[obs.x.len() - 1], obs.span()],
    );
    let starts: Vec<Vec<f64>> = [1.0, 0.7, 1.4]
        .iter()
        .map(|m| vec![c0, v0, obs.x[k], m * w0])
        .collect();
    let f = run(&obs, &prob, &model, &starts, c0)?;

    let mut flags = Vec::new();
    if shape_mismatch(&obs, &f) {
        flags.push(FitFlag::ShapeMismatch);
    }
    let fwhm = scaled(est(&f, 3), per_width);
    if obs.span() < 3.0 * fwhm.value {
        flags.push(FitFlag::NarrowSpan);
    }
    let (mut params, mut stderrs) = maps(&["baseline", "visibility", "center", "width"], &f);
    params.insert("sign".into(), sign);
    stderrs.insert("sign".into(), 0.0);
    Ok(FringeFit {
        model: match shape {
            DipShape::Sinc => FitModel::SincDip,
            DipShape::Gaussian => FitModel::GaussianDip,
        },
        visibility: est(&f, 1),
        envelope_fwhm: Some(fwhm),
        carrier_period: None,
        baseline: f.p[0],
        residual_rms: f.residual_rms,
        n_points: obs.x.len(),
        params,
        stderrs,
        flags,
        iterations: f.iterations,
        condition_number: f.condition,
    })
}

/// Centroid and Gaussian σ of the squared deviation from `level`.
fn envelope_moments(obs: &Obs, level: f64) -> (f64, f64) {
    let e2: Vec<f64> = obs.y.iter().map(|y| (y - level).powi(2)).collect();
    let total: f64 = e2.iter().sum();
    if total <= 0.0 {
        let mid = 0.5 * (obs.x[0] + obs.x[obs.x.len() - 1]);
        return (mid, 0.25 * obs.span());
    }
    let x0 = obs.x.iter().zip(&e2).map(|(x, e)| x * e).sum::<f64>() / total;
    let var = obs
        .x
        .iter()
        .zip(&e2)
        .map(|(x, e)| (x - x0).powi(2) * e)
        .sum::<f64>()
        / total;
    // A squared Gaussian has half the variance of the Gaussian.
    (x0, (2.0 * var).sqrt().max(obs.span() * 1e-6))
}

/// Fits `c·(1 + V·exp(−(Δx₂ − x₀)²/2σ²)·cos(2π(Δx₂ − x₀)/Λ + θ))`: a
/// Gaussian-windowed fringe or beat note.
pub fn fit_gaussian_envelope(data: &Interferogram, carrier_guess: f64) -> Result<FringeFit> {
    if !(carrier_guess > 0.0 && carrier_guess.is_finite()) {
        return Err(Error::invalid("carrier_guess", "must be positive"));
    }
    let obs = Obs::new(data)?;
    let c0 = obs.edge_level();
    if !(c0 > 0.0) {
        return Err(Error::InsufficientData(
            "baseline level is not positive".into(),
        ));
    }
    let (x0, sigma0) = envelope_moments(&obs, c0);
    let near: Vec<usize> = (0..obs.x.len())
        .filter(|&k| (obs.x[k] - x0).abs() <= 2.0 * sigma0)
        .collect();
    let xs: Vec<f64> = near.iter().map(|&k| obs.x[k] - x0).collect();
    let rs: Vec<f64> = near.iter().map(|&k| obs.y[k] - c0).collect();
    let period = if xs.len() >= 4 && xs[xs.len() - 1] - xs[0] >= 2.0 * carrier_guess {
        dominant_period(&xs, &rs, 0.85 * carrier_guess, 1.15 * carrier_guess)
    } else {
        carrier_guess
    };
    // Phase and amplitude from a linear fit with the envelope held fixed.
    let (mut cc, mut cs, mut ss, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&x, &y), &w) in obs.x.iter().zip(&obs.y).zip(&obs.w) {
        let u = x - x0;
        let g = (-0.5 * (u / sigma0).powi(2)).exp();
        let (s, c) = (TAU * u / period).sin_cos();
        let (gc, gs) = (g * c, g * s);
        cc += w * gc * gc;
        cs += w * gc * gs;
        ss += w * gs * gs;
        yc += w * (y - c0) * gc;
        ys += w * (y - c0) * gs;
    }
    let det = cc * ss - cs * cs;
    let (ac, as_) = if det.abs() > 0.0 {
        ((yc * ss - ys * cs) / det, (ys * cc - yc * cs) / det)
    } else {
        (0.0, 0.0)
    };
    let v0 = (ac.hypot(as_) / c0).clamp(1e-3, 2.0);
    let theta0 = (-as_).atan2(ac);

    let model = |x: f64, p: &[f64]| {
        let u = x - p[2];
        p[0] * (1.0 + p[1] * (-0.5 * (u / p[3]).powi(2)).exp() * (TAU * u / p[4] + p[5]).cos())
    };
    let step = obs.span() / (obs.x.len() - 1) as f64;
    let prob = obs.problem(
        vec![c0, 1.0, sigma0, sigma0, period, 1.0],
        vec![0.0, 0.0, obs.x[0], step, 0.5 * period, f64::NEG_INFINITY],
        vec![
            f64::INFINITY,
            2.0,
            obs.x[obs.x.len() - 1],
            obs.span(),
            2.0 * period,
            f64::INFINITY,
        ],
    );
    let starts: Vec<Vec<f64>> = [theta0, 0.0, TAU / 3.0, 2.0 * TAU / 3.0]
        .iter()
        .map(|&t| vec![c0, v0, x0, sigma0, period, t])
        .collect();
    let mut f = run(&obs, &prob, &model, &starts, c0)?;
    f.p[5] = wrap_phase(f.p[5]);

    let mut flags = Vec::new();
    if shape_mismatch(&obs, &f) {
        flags.push(FitFlag::ShapeMismatch);
    }
    let fwhm = scaled(est(&f, 3), FWHM_PER_SIGMA);
    if obs.span() < 3.0 * fwhm.value {
        flags.push(FitFlag::NarrowSpan);
    }
    let (params, stderrs) = maps(
        &[
            "baseline",
            "visibility",
            "center",
            "sigma",
            "period",
            "phase",
        ],
        &f,
    );
    Ok(FringeFit {
        model: FitModel::GaussianEnvelope,
        visibility: est(&f, 1),
        envelope_fwhm: Some(fwhm),
        carrier_period: Some(est(&f, 4)),
        baseline: f.p[0],
        residual_rms: f.residual_rms,
        n_points: obs.x.len(),
        params,
        stderrs,
        flags,
        iterations: f.iterations,
        condition_number: f.condition,
    })
}

fn composite_envelope(n0: f64, v: f64, sigma_s: f64, sigma_t: f64, lambda_p: f64) -> EnvelopeModel {
    EnvelopeModel {
        n0,
        visibility: v,
        lambda_p,
        sigma_s,
        sigma_t,
        f_shape: FShape::Sinc,
        g_shape: GShape::Gaussian,
    }
}

/// Shared set-up of the two composite fits: returns the observations, the
/// level guess N₀ and starting widths (σ_s, σ_T).
fn composite_guess(data: &Interferogram, pump_wavelength: f64) -> Result<(Obs, f64, f64, f64)> {
    if !(pump_wavelength > 0.0 && pump_wavelength.is_finite()) {
        return Err(Error::invalid("pump_wavelength", "must be positive"));
    }
    let obs = Obs::new(data)?;
    let level = obs.edge_level();
    if !(level > 0.0) {
        return Err(Error::InsufficientData(
            "baseline level is not positive".into(),
        ));
    }
    let (_, sigma_t) = envelope_moments(&obs, level);
    Ok((obs, 0.5 * level, sigma_t, sigma_t))
}

fn composite_flags(obs: &Obs, f: &Fitted, fwhm_s: f64, fwhm_t: f64) -> Vec<FitFlag> {
    let mut flags = Vec::new();
    if shape_mismatch(obs, f) {
        flags.push(FitFlag::ShapeMismatch);
    }
    let reach = obs.x[0].abs().min(obs.x[obs.x.len() - 1].abs());
    let truncated = reach < fwhm_t;
    let degenerate = (fwhm_s - fwhm_t).abs() < 0.1 * fwhm_t;
    if f.condition > ILL_CONDITIONED || truncated || degenerate {
        flags.push(FitFlag::IllConditioned);
    }
    if truncated {
        flags.push(FitFlag::Truncated);
    }
    if degenerate {
        flags.push(FitFlag::DegenerateEnvelopes);
    }
    flags
}

/// Joint fit of N₀{2 + V[f(Δx₂) + g(Δx₂)·cos(2πΔx₂/λ_p)]} with a sinc `f`
/// and Gaussian `g`, both centred on zero delay, for N₀, V, σ_s and σ_T.
///
/// `envelope_fwhm` is the two-photon (g) width; the single-photon width is
/// in `params["fwhm_s"]`.
pub fn fit_composite(data: &Interferogram, pump_wavelength: f64) -> Result<FringeFit> {
    let (obs, n0, _, sigma_t) = composite_guess(data, pump_wavelength)?;
    let peak = obs
        .y
        .iter()
        .map(|y| (y - 2.0 * n0).abs())
        .fold(0.0, f64::max);
    let v0 = (peak / (2.0 * n0)).clamp(1e-3, 2.0);
    let model = move |x: f64, p: &[f64]| {
        crate::fringe::envelope_probability(
            &composite_envelope(p[0], p[1], p[2], p[3], pump_wavelength),
            x,
        )
    };
    let step = obs.span() / (obs.x.len() - 1) as f64;
    let prob = obs.problem(
        vec![n0, 1.0, sigma_t, sigma_t],
        vec![0.0, 0.0, 2.0 * step, 2.0 * step],
        vec![f64::INFINITY, 2.0, obs.span(), obs.span()],
    );
    let starts: Vec<Vec<f64>> = [0.3, 0.6]
        .iter()
        .map(|m| vec![n0, v0, m * sigma_t, sigma_t])
        .collect();
    let f = run(&obs, &prob, &model, &starts, 2.0 * n0)?;
    let fwhm_s = scaled(est(&f, 2), SINC_FWHM_PER_ZERO);
    let fwhm_t = scaled(est(&f, 3), FWHM_PER_SIGMA);
    let flags = composite_flags(&obs, &f, fwhm_s.value, fwhm_t.value);
    let (mut params, mut stderrs) = maps(&["n0", "visibility", "sigma_s", "sigma_t"], &f);
    params.insert("fwhm_s".into(), fwhm_s.value);
    stderrs.insert("fwhm_s".into(), fwhm_s.stderr);
    Ok(FringeFit {
        model: FitModel::Composite,
        visibility: est(&f, 1),
        envelope_fwhm: Some(fwhm_t),
        carrier_period: Some(Estimate {
            value: pump_wavelength,
            stderr: 0.0,
        }),
        baseline: 2.0 * f.p[0],
        residual_rms: f.residual_rms,
        n_points: obs.x.len(),
        params,
        stderrs,
        flags,
        iterations: f.iterations,
        condition_number: f.condition,
    })
}

/// As [`fit_composite`] but with separate amplitudes `v_f` and `v_g` on the
/// two envelopes, so data can say that one of them is absent.
pub fn fit_composite_split(data: &Interferogram, pump_wavelength: f64) -> Result<FringeFit> {
    let (obs, n0, _, sigma_t) = composite_guess(data, pump_wavelength)?;
    let model = move |x: f64, p: &[f64]| {
        let e = composite_envelope(p[0], 1.0, p[3], p[4], pump_wavelength);
        let carrier = (TAU * x / pump_wavelength).cos();
        p[0] * (2.0 + p[1] * e.f(x) + p[2] * e.g(x) * carrier)
    };
    let step = obs.span() / (obs.x.len() - 1) as f64;
    let prob = obs.problem(
        vec![n0, 1.0, 1.0, sigma_t, sigma_t],
        vec![0.0, -4.0, 0.0, 2.0 * step, 2.0 * step],
        vec![f64::INFINITY, 4.0, 4.0, obs.span(), obs.span()],
    );
    let starts: Vec<Vec<f64>> = [0.3, 0.6]
        .iter()
        .map(|m| vec![n0, 0.5, 0.5, m * sigma_t, sigma_t])
        .collect();
    let f = run(&obs, &prob, &model, &starts, 2.0 * n0)?;
    let fwhm_s = scaled(est(&f, 3), SINC_FWHM_PER_ZERO);
    let fwhm_t = scaled(est(&f, 4), FWHM_PER_SIGMA);
    let flags = composite_flags(&obs, &f, fwhm_s.value, fwhm_t.value);
    let (params, stderrs) = maps(&["n0", "v_f", "v_g", "sigma_s", "sigma_t"], &f);
    Ok(FringeFit {
        model: FitModel::Composite,
        visibility: est(&f, 2),
        envelope_fwhm: Some(fwhm_t),
        carrier_period: Some(Estimate {
            value: pump_wavelength,
            stderr: 0.0,
        }),
        baseline: 2.0 * f.p[0],
        residual_rms: f.residual_rms,
        n_points: obs.x.len(),
        params,
        stderrs,
        flags,
        iterations: f.iterations,
        condition_number: f.condition,
    })
}
