//! Frequency grids and the joint spectral amplitude of the photon pair.
//!
//! The source is modelled as
//!
//! ```text
//! Φ(ω₁, ω₂) = α(ω₁ + ω₂) · ψ(ω₁ − ω₂) · F₁(ω₁) · F₂(ω₂)
//! ```
//!
//! with a Gaussian pump envelope `α`, a broad Gaussian phase-matching factor `ψ`
//! and the two detection filters `F₁`, `F₂`. All functions are sampled on the
//! same uniform grid for both photons and integrated with the trapezoidal rule.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{angular_frequency, Error, Result, SPEED_OF_LIGHT};

/// Smallest accepted number of grid points per axis.
pub const MIN_GRID_POINTS: usize = 16;

/// Width of the phase-matching factor relative to the widest filter.
pub const PHASE_MATCHING_WIDTH_RATIO: f64 = 10.0;

/// Broadening factor that brings the two-photon coherence length of the
/// 3.5 ps / 775 nm source behind 6.25 nm rectangular filters to 1.17 mm FWHM
/// (from [`calibrate_gvd_factor`]).
pub const MZI_GVD_FACTOR: f64 = 1.041_484;

/// Same calibration for the 18 nm Gaussian CWDM channels.
pub const CWDM_GVD_FACTOR: f64 = 1.112_23;

/// Two-photon coherence length (FWHM, m) observed with the picosecond source.
pub const PAPER_TWO_PHOTON_LENGTH: f64 = 1.17e-3;

/// `2·sqrt(2·ln 2)`: ratio of FWHM to standard deviation of a Gaussian.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Uniform angular-frequency grid shared by both photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    center: f64,
    half_span: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl FrequencyGrid {
    /// Grid of `n_points` samples spanning `center ± half_span` (rad/s).
    pub fn new(center: f64, half_span: f64, n_points: usize) -> Result<Self> {
        if n_points < MIN_GRID_POINTS {
            return Err(Error::invalid(
                "n_points",
                format!("{n_points} < {MIN_GRID_POINTS}"),
            ));
        }
        if !(half_span > 0.0 && half_span.is_finite()) {
            return Err(Error::invalid(
                "span",
                format!("{half_span} is not positive"),
            ));
        }
        if !(center > 0.0 && center.is_finite()) {
            return Err(Error::invalid(
                "center",
                format!("{center} is not positive"),
            ));
        }
        let last = (n_points - 1) as f64;
        let step = 2.0 * half_span / last;
        // Integer offsets keep the grid exactly symmetric about the centre.
        let points = (0..n_points)
            .map(|k| center + half_span * (2.0 * k as f64 - last) / last)
            .collect();
        let mut weights = vec![step; n_points];
        weights[0] = 0.5 * step;
        weights[n_points - 1] = 0.5 * step;
        Ok(Self {
            center,
            half_span,
            points,
            weights,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_span(&self) -> f64 {
        self.half_span
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Spacing between neighbouring samples (rad/s).
    pub fn step(&self) -> f64 {
        2.0 * self.half_span / (self.len() - 1) as f64
    }

    /// Delay (s) at which sampled Fourier kernels alias back onto zero delay.
    pub fn alias_period(&self) -> f64 {
        2.0 * PI / self.step()
    }

    /// Trapezoidal integral of `values` sampled on the grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len(), "sample count mismatch");
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Grid centred on the photon wavelength `center_wavelength`, spanning
/// `span_wavelength` (both in metres) with `n_points` samples per axis.
pub fn build_grid(
    center_wavelength: f64,
    span_wavelength: f64,
    n_points: usize,
) -> Result<FrequencyGrid> {
    if !(center_wavelength > 0.0) {
        return Err(Error::invalid("center_wavelength", "must be positive"));
    }
    if !(span_wavelength > 0.0) {
        return Err(Error::invalid("span_wavelength", "must be positive"));
    }
    let center = angular_frequency(center_wavelength);
    let half_span = PI * SPEED_OF_LIGHT * span_wavelength / (center_wavelength * center_wavelength);
    FrequencyGrid::new(center, half_span, n_points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    /// m
    pub center_wavelength: f64,
    /// Intensity FWHM, s.
    pub pulse_duration_fwhm: f64,
    /// Hz
    pub repetition_rate: f64,
    /// W, informational only.
    #[serde(default)]
    pub average_power: f64,
}

impl PumpSpec {
    /// Picosecond fibre laser used for both interferometers.
    pub fn standard() -> Self {
        Self {
            center_wavelength: 775e-9,
            pulse_duration_fwhm: 3.5e-12,
            repetition_rate: 20e6,
            average_power: 20e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength > 0.0) {
            return Err(Error::invalid("pump.center_wavelength", "must be positive"));
        }
        if !(self.pulse_duration_fwhm > 0.0) {
            return Err(Error::invalid(
                "pump.pulse_duration_fwhm",
                "must be positive",
            ));
        }
        if !(self.repetition_rate > 0.0) {
            return Err(Error::invalid("pump.repetition_rate", "must be positive"));
        }
        Ok(())
    }

    pub fn angular_frequency(&self) -> f64 {
        angular_frequency(self.center_wavelength)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterShape {
    /// Sharp-edged passband between the wavelength edges.
    Rectangular,
    /// Gaussian intensity transmission of the given FWHM.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub shape: FilterShape,
    /// m
    pub center_wavelength: f64,
    /// m
    pub bandwidth_fwhm: f64,
}

impl FilterSpec {
    pub fn rectangular(center_wavelength: f64, bandwidth_fwhm: f64) -> Self {
        Self {
            shape: FilterShape::Rectangular,
            center_wavelength,
            bandwidth_fwhm,
        }
    }

    pub fn gaussian(center_wavelength: f64, bandwidth_fwhm: f64) -> Self {
        Self {
            shape: FilterShape::Gaussian,
            center_wavelength,
            bandwidth_fwhm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength > 0.0) {
            return Err(Error::invalid(
                "filter.center_wavelength",
                "must be positive",
            ));
        }
        if !(self.bandwidth_fwhm > 0.0) {
            return Err(Error::invalid("filter.bandwidth_fwhm", "must be positive"));
        }
        if self.bandwidth_fwhm >= 2.0 * self.center_wavelength {
            return Err(Error::invalid(
                "filter.bandwidth_fwhm",
                "wider than the centre wavelength",
            ));
        }
        Ok(())
    }

    /// Passband edges in angular frequency, low to high.
    pub fn omega_edges(&self) -> (f64, f64) {
        let half = 0.5 * self.bandwidth_fwhm;
        (
            angular_frequency(self.center_wavelength + half),
            angular_frequency(self.center_wavelength - half),
        )
    }

    /// Bandwidth expressed in angular frequency (rad/s).
    pub fn omega_bandwidth(&self) -> f64 {
        let (lo, hi) = self.omega_edges();
        hi - lo
    }

    /// Transmission amplitude at each grid point.
    ///
    /// Rectangular passbands are cell-averaged: a sample whose cell is cut by an
    /// edge carries the covered fraction of the cell as its intensity, so the
    /// integrated passband equals the exact bandwidth on any grid.
    pub fn amplitudes(&self, grid: &FrequencyGrid) -> Vec<f64> {
        match self.shape {
            FilterShape::Rectangular => {
                let (lo, hi) = self.omega_edges();
                let step = grid.step();
                grid.points()
                    .iter()
                    .map(|&w| {
                        let covered = (hi.min(w + 0.5 * step) - lo.max(w - 0.5 * step)).max(0.0);
                        (covered / step).min(1.0).sqrt()
                    })
                    .collect()
            }
            FilterShape::Gaussian => {
                let center = angular_frequency(self.center_wavelength);
                let fwhm = 2.0 * PI * SPEED_OF_LIGHT * self.bandwidth_fwhm
                    / (self.center_wavelength * self.center_wavelength);
                grid.points()
                    .iter()
                    .map(|&w| {
                        let x = (w - center) / fwhm;
                        // amplitude is the square root of the intensity profile
                        (-2.0 * LN_2 * x * x).exp()
                    })
                    .collect()
            }
        }
    }
}

/// Phase-matching bandwidth (intensity FWHM along ω₁ − ω₂, rad/s) used when
/// the filters dominate the marginal spectra.
pub fn default_phase_matching_bandwidth(filters: &[FilterSpec]) -> f64 {
    let widest = filters
        .iter()
        .map(FilterSpec::omega_bandwidth)
        .fold(0.0, f64::max);
    PHASE_MATCHING_WIDTH_RATIO * widest
}

/// Sampled two-photon wave function Φ(ω₁, ω₂), row index ω₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpectralAmplitude {
    grid: FrequencyGrid,
    amplitude: Vec<Complex64>,
    is_symmetric: bool,
}

impl JointSpectralAmplitude {
    /// Wraps a raw sample matrix (row-major, `n × n`) and normalizes it.
    pub fn from_samples(grid: FrequencyGrid, amplitude: Vec<Complex64>) -> Result<Self> {
        let n = grid.len();
        if amplitude.len() != n * n {
            return Err(Error::invalid(
                "amplitude",
                format!("expected {} samples, got {}", n * n, amplitude.len()),
            ));
        }
        let mut jsa = Self {
            grid,
            amplitude,
            is_symmetric: false,
        };
        let norm = jsa.norm_squared();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("amplitude", "zero or non-finite norm"));
        }
        let scale = 1.0 / norm.sqrt();
        jsa.amplitude.iter_mut().for_each(|a| *a *= scale);
        jsa.is_symmetric = jsa.symmetry_residual() == 0.0;
        Ok(jsa)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_symmetric
    }

    /// Φ(ω_i, ω_j).
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.amplitude[i * self.len() + j]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.amplitude
    }

    /// ∬ |Φ|² dω₁ dω₂ by the trapezoidal rule.
    pub fn norm_squared(&self) -> f64 {
        let n = self.len();
        let w = self.grid.weights();
        let mut total = 0.0;
        for i in 0..n {
            let row = &self.amplitude[i * n..(i + 1) * n];
            let s: f64 = row.iter().zip(w).map(|(a, wj)| a.norm_sqr() * wj).sum();
            total += w[i] * s;
        }
        total
    }

    /// Largest elementwise |Φ(ω₁,ω₂) − Φ(ω₂,ω₁)|.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.at(i, j) - self.at(j, i)).norm());
            }
        }
        worst
    }

    /// Quadrature-weighted |Φ|², i.e. `w_i w_j |Φ_ij|²`.
    pub fn weighted_intensity(&self) -> Vec<f64> {
        let n = self.len();
        let w = self.grid.weights();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(w[i] * w[j] * self.at(i, j).norm_sqr());
            }
        }
        out
    }

    /// Quadrature-weighted exchange overlap `w_i w_j Φ*(ω_j, ω_i) Φ(ω_i, ω_j)`.
    pub fn weighted_exchange(&self) -> Vec<Complex64> {
        let n = self.len();
        let w = self.grid.weights();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.at(j, i).conj() * self.at(i, j) * (w[i] * w[j]));
            }
        }
        out
    }

    /// Distribution of |Φ|² along ω₁ + ω₂, indexed by `i + j`.
    pub fn sum_marginal(&self) -> Vec<f64> {
        let n = self.len();
        let m = self.weighted_intensity();
        let mut out = vec![0.0; 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                out[i + j] += m[i * n + j];
            }
        }
        out
    }

    /// Distribution of |Φ|² along ω₁ − ω₂, indexed by `i − j + n − 1`.
    pub fn difference_marginal(&self) -> Vec<f64> {
        let n = self.len();
        let m = self.weighted_intensity();
        let mut out = vec![0.0; 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                out[i + n - 1 - j] += m[i * n + j];
            }
        }
        out
    }
}

/// Builds the normalized joint spectral amplitude of a pulsed SPDC source.
///
/// The pump envelope is Gaussian along ω₁ + ω₂. Its width is set so that the
/// two-photon envelope FWHM, in delay, equals `gvd_broadening_factor` times
/// the pump pulse duration.
pub fn make_jsa(
    pump: &PumpSpec,
    signal_filter: &FilterSpec,
    idler_filter: &FilterSpec,
    phase_matching_bandwidth: f64,
    gvd_broadening_factor: f64,
    grid: &FrequencyGrid,
) -> Result<JointSpectralAmplitude> {
    pump.validate()?;
    signal_filter.validate()?;
    idler_filter.validate()?;
    if !(phase_matching_bandwidth > 0.0) {
        return Err(Error::invalid(
            "phase_matching_bandwidth",
            "must be positive",
        ));
    }
    if !(gvd_broadening_factor >= 1.0 && gvd_broadening_factor.is_finite()) {
        return Err(Error::invalid(
            "gvd_broadening_factor",
            "must be finite and >= 1",
        ));
    }
    let span = 2.0 * grid.half_span();
    for f in [signal_filter, idler_filter] {
        if span < 4.0 * f.omega_bandwidth() {
            log::warn!(
                "grid span {:.3e} rad/s is less than 4x the filter bandwidth {:.3e} rad/s",
                span,
                f.omega_bandwidth()
            );
        }
    }

    let f1 = signal_filter.amplitudes(grid);
    let f2 = idler_filter.amplitudes(grid);
    let has_support =
        |f: &[f64]| grid.integrate(&f.iter().map(|a| a * a).collect::<Vec<_>>()) > 0.0;
    if !has_support(&f1) || !has_support(&f2) {
        return Err(Error::NoFilterOverlap);
    }

    // |α|² has standard deviation `sum_sigma`; its transform has FWHM
    // FWHM_PER_SIGMA / sum_sigma in delay.
    let coherence_time = gvd_broadening_factor * pump.pulse_duration_fwhm;
    let sum_sigma = FWHM_PER_SIGMA / coherence_time;
    let diff_sigma = phase_matching_bandwidth / FWHM_PER_SIGMA;
    let omega_p = pump.angular_frequency();

    let w = grid.points();
    let n = grid.len();
    let mut amplitude = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let s = (w[i] + w[j] - omega_p) / sum_sigma;
            let d = (w[i] - w[j]) / diff_sigma;
            let envelope = (-0.25 * s * s).exp() * (-0.25 * d * d).exp();
            amplitude.push(Complex64::new(envelope * (f1[i] * f2[j]), 0.0));
        }
    }
    let jsa = JointSpectralAmplitude::from_samples(grid.clone(), amplitude)?;
    if jsa.norm_squared() == 0.0 {
        return Err(Error::NoFilterOverlap);
    }
    Ok(jsa)
}

/// Exchange-symmetrized copy, `N[Φ(ω₁,ω₂) + Φ(ω₂,ω₁)]`.
pub fn symmetrize(jsa: &JointSpectralAmplitude) -> Result<JointSpectralAmplitude> {
    let n = jsa.len();
    let mut amplitude = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            amplitude.push(jsa.at(i, j) + jsa.at(j, i));
        }
    }
    let mut out = JointSpectralAmplitude {
        grid: jsa.grid.clone(),
        amplitude,
        is_symmetric: true,
    };
    let norm = out.norm_squared();
    if !(norm > 1e-20) {
        return Err(Error::DegenerateSymmetrization);
    }
    let scale = 1.0 / norm.sqrt();
    out.amplitude.iter_mut().for_each(|a| *a *= scale);
    Ok(out)
}

/// Coherence scales of a source, from the widths of its Fourier envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// FWHM of the difference-frequency envelope in path length (m).
    pub single_photon_coherence_length: f64,
    /// FWHM of the sum-frequency envelope in path length (m).
    pub two_photon_coherence_length: f64,
    pub single_photon_coherence_time: f64,
    pub two_photon_coherence_time: f64,
    /// The single-photon envelope never fell to half within the resolvable range.
    pub single_saturated: bool,
    /// The two-photon envelope never fell to half within the resolvable range.
    pub two_saturated: bool,
}

/// Measures both coherence lengths of a normalized amplitude.
pub fn summarize(jsa: &JointSpectralAmplitude) -> SpectralSummary {
    let step = jsa.grid().step();
    let (t_single, single_saturated) = envelope_fwhm(&jsa.difference_marginal(), step);
    let (t_two, two_saturated) = envelope_fwhm(&jsa.sum_marginal(), step);
    SpectralSummary {
        single_photon_coherence_length: SPEED_OF_LIGHT * t_single,
        two_photon_coherence_length: SPEED_OF_LIGHT * t_two,
        single_photon_coherence_time: t_single,
        two_photon_coherence_time: t_two,
        single_saturated,
        two_saturated,
    }
}

/// |Σ_k m_k e^{iτ k δ}| for a marginal on a lattice of spacing `step`.
fn marginal_transform(marginal: &[f64], step: f64, tau: f64) -> f64 {
    let mid = (marginal.len() as f64 - 1.0) * 0.5;
    let (re, im) = marginal
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(re, im), (k, &m)| {
            let phase = tau * step * (k as f64 - mid);
            (re + m * phase.cos(), im + m * phase.sin())
        });
    re.hypot(im)
}

/// Full width (s) at which the envelope falls to half its zero-delay value.
/// Returns the resolvable limit and `true` when it never does.
fn envelope_fwhm(marginal: &[f64], step: f64) -> (f64, bool) {
    let peak = marginal_transform(marginal, step, 0.0);
    let limit = PI / step;
    let n_scan = 8 * marginal.len();
    let dt = limit / n_scan as f64;
    let mut prev = 0.0;
    for k in 1..=n_scan {
        let tau = k as f64 * dt;
        if marginal_transform(marginal, step, tau) < 0.5 * peak {
            let (mut lo, mut hi) = (prev, tau);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if marginal_transform(marginal, step, mid) < 0.5 * peak {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return (lo + hi, false);
        }
        prev = tau;
    }
    (2.0 * limit, true)
}

/// Pump, filters and broadening that together define a source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceModel {
    pub pump: PumpSpec,
    pub signal_filter: FilterSpec,
    pub idler_filter: FilterSpec,
    /// Intensity FWHM along ω₁ − ω₂ (rad/s); defaults to ten times the widest filter.
    #[serde(default)]
    pub phase_matching_bandwidth: Option<f64>,
    pub gvd_broadening_factor: f64,
    /// Symmetrize the amplitude after construction (frequency-entangled pairs).
    #[serde(default)]
    pub symmetrize: bool,
    /// Grid centre (m), usually the degenerate photon wavelength.
    pub grid_center_wavelength: f64,
    /// Grid span (m).
    pub grid_span_wavelength: f64,
    pub grid_points: usize,
}

impl SourceModel {
    /// 6.25 nm rectangular filters at 1550 nm behind the Mach-Zehnder interferometer.
    pub fn mzi_standard() -> Self {
        Self {
            pump: PumpSpec::standard(),
            signal_filter: FilterSpec::rectangular(1550e-9, 6.25e-9),
            idler_filter: FilterSpec::rectangular(1550e-9, 6.25e-9),
            phase_matching_bandwidth: None,
            gvd_broadening_factor: MZI_GVD_FACTOR,
            symmetrize: false,
            grid_center_wavelength: 1550e-9,
            grid_span_wavelength: 40e-9,
            grid_points: 256,
        }
    }

    /// 18 nm CWDM channels at 1550 nm for both photons.
    pub fn pmi_degenerate() -> Self {
        Self {
            signal_filter: FilterSpec::gaussian(1550e-9, 18e-9),
            idler_filter: FilterSpec::gaussian(1550e-9, 18e-9),
            gvd_broadening_factor: CWDM_GVD_FACTOR,
            grid_span_wavelength: 110e-9,
            grid_points: 512,
            ..Self::mzi_standard()
        }
    }

    /// 18 nm CWDM channels at 1530 and 1570 nm, symmetrized into a
    /// frequency-entangled two-lobe amplitude.
    pub fn pmi_nondegenerate() -> Self {
        Self {
            signal_filter: FilterSpec::gaussian(1530e-9, 18e-9),
            idler_filter: FilterSpec::gaussian(1570e-9, 18e-9),
            symmetrize: true,
            gvd_broadening_factor: CWDM_GVD_FACTOR,
            grid_span_wavelength: 150e-9,
            grid_points: 512,
            ..Self::mzi_standard()
        }
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        build_grid(
            self.grid_center_wavelength,
            self.grid_span_wavelength,
            self.grid_points,
        )
    }

    pub fn phase_matching(&self) -> f64 {
        self.phase_matching_bandwidth.unwrap_or_else(|| {
            default_phase_matching_bandwidth(&[self.signal_filter, self.idler_filter])
        })
    }

    pub fn build(&self) -> Result<JointSpectralAmplitude> {
        let grid = self.grid()?;
        let jsa = make_jsa(
            &self.pump,
            &self.signal_filter,
            &self.idler_filter,
            self.phase_matching(),
            self.gvd_broadening_factor,
            &grid,
        )?;
        if self.symmetrize {
            symmetrize(&jsa)
        } else {
            Ok(jsa)
        }
    }
}

/// Finds the broadening factor for which `model` has the requested
/// two-photon coherence length (m), by bisection on [1, 20].
pub fn calibrate_gvd_factor(model: &SourceModel, target_length: f64) -> Result<f64> {
    let length_at = |factor: f64| -> Result<f64> {
        let m = SourceModel {
            gvd_broadening_factor: factor,
            ..model.clone()
        };
        Ok(summarize(&m.build()?).two_photon_coherence_length)
    };
    let (mut lo, mut hi) = (1.0, 20.0);
    if length_at(lo)? > target_length {
        return Err(Error::invalid(
            "target_length",
            "shorter than the transform-limited two-photon coherence length",
        ));
    }
    if length_at(hi)? < target_length {
        return Err(Error::invalid(
            "target_length",
            "beyond the calibration range",
        ));
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if length_at(mid)? < target_length {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
