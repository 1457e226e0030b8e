use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::element::ElementSpec;
use super::mode::{ModeLabel, Photon, Polarization, Spatial, SpectralSlot};
use crate::spectral::JointSpectralAmplitude;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Terms whose squared amplitude falls below this are dropped after a transform.
const PRUNE_THRESHOLD: f64 = 1e-28;

/// `amplitude · a†(photon_a) a†(photon_b)|0⟩` with `photon_a ≤ photon_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub amplitude: Complex64,
    pub photon_a: Photon,
    pub photon_b: Photon,
}

impl Term {
    /// Probability weight of the term on its own; a doubly occupied mode
    /// carries the bosonic factor 2.
    pub fn weight(&self) -> f64 {
        let factor = if self.photon_a == self.photon_b {
            2.0
        } else {
            1.0
        };
        factor * self.amplitude.norm_sqr()
    }
}

/// Superposition of two-photon creation terms, stored in canonical photon
/// order with equal terms merged.
#[derive(Debug, Clone, Default)]
pub struct TwoPhotonState {
    terms: Vec<Term>,
    jsa: Option<Arc<JointSpectralAmplitude>>,
}

impl PartialEq for TwoPhotonState {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl TwoPhotonState {
    /// Builds a state from `(amplitude, photon, photon)` triples in any order.
    pub fn from_terms(terms: impl IntoIterator<Item = (Complex64, Photon, Photon)>) -> Self {
        let mut acc: BTreeMap<(Photon, Photon), Complex64> = BTreeMap::new();
        for (amplitude, p, q) in terms {
            let key = if p <= q { (p, q) } else { (q, p) };
            *acc.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amplitude;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, a)| a.norm_sqr() > PRUNE_THRESHOLD)
            .map(|((photon_a, photon_b), amplitude)| Term {
                amplitude,
                photon_a,
                photon_b,
            })
            .collect();
        Self { terms, jsa: None }
    }

    /// Attaches the spectral amplitude the state refers to.
    pub fn with_jsa(mut self, jsa: Arc<JointSpectralAmplitude>) -> Self {
        self.jsa = Some(jsa);
        self
    }

    pub fn jsa(&self) -> Option<&Arc<JointSpectralAmplitude>> {
        self.jsa.as_ref()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.terms.iter().map(Term::weight).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_squared();
        if n > 0.0 {
            let s = 1.0 / n.sqrt();
            self.terms.iter_mut().for_each(|t| t.amplitude *= s);
        }
        self
    }

    /// Amplitude of the canonical term for the given photon pair.
    pub fn amplitude(&self, a: Photon, b: Photon) -> Complex64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.terms
            .iter()
            .find(|t| t.photon_a == a && t.photon_b == b)
            .map(|t| t.amplitude)
            .unwrap_or_default()
    }

    /// ⟨self|other⟩ with the bosonic normalization of doubly occupied modes.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let factor = if t.photon_a == t.photon_b { 2.0 } else { 1.0 };
                t.amplitude.conj() * other.amplitude(t.photon_a, t.photon_b) * factor
            })
            .sum()
    }

    /// Largest term-amplitude difference after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let overlap = self.inner(other);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut worst: f64 = 0.0;
        for t in &self.terms {
            let d = t.amplitude * phase - other.amplitude(t.photon_a, t.photon_b);
            worst = worst.max(d.norm());
        }
        for t in &other.terms {
            let d = self.amplitude(t.photon_a, t.photon_b) * phase - t.amplitude;
            worst = worst.max(d.norm());
        }
        worst
    }

    fn modes(&self) -> impl Iterator<Item = Spatial> + '_ {
        self.terms
            .iter()
            .flat_map(|t| [t.photon_a.mode.spatial, t.photon_b.mode.spatial])
    }
}

impl fmt::Display for TwoPhotonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "({:+.6}{:+.6}i) {}{}",
                t.amplitude.re, t.amplitude.im, t.photon_a, t.photon_b
            )?;
        }
        Ok(())
    }
}

fn transform_photon(photon: &Photon, element: &ElementSpec) -> Result<Vec<(Complex64, Photon)>> {
    match element.branches(photon.mode)? {
        None => Ok(vec![(Complex64::new(1.0, 0.0), *photon)]),
        Some(branches) => Ok(branches
            .into_iter()
            .map(|b| {
                (
                    b.amplitude,
                    Photon {
                        mode: b.mode,
                        delay: photon.delay + b.delay,
                        slot: photon.slot,
                    },
                )
            })
            .collect()),
    }
}

/// Sends both photons of every term through `element`.
pub fn apply_element(state: &TwoPhotonState, element: &ElementSpec) -> Result<TwoPhotonState> {
    element.validate()?;
    if !state.modes().any(|m| element.acts_on(m)) {
        return Err(Error::UnknownMode(format!(
            "none of {:?} is occupied in the state",
            element.input_modes
        )));
    }
    let mut out = Vec::new();
    for t in &state.terms {
        let a = transform_photon(&t.photon_a, element)?;
        let b = transform_photon(&t.photon_b, element)?;
        for (ca, pa) in &a {
            for (cb, pb) in &b {
                out.push((t.amplitude * ca * cb, *pa, *pb));
            }
        }
    }
    let mut next = TwoPhotonState::from_terms(out);
    next.jsa = state.jsa.clone();
    Ok(next)
}

pub fn apply_network(state: &TwoPhotonState, network: &[ElementSpec]) -> Result<TwoPhotonState> {
    network
        .iter()
        .try_fold(state.clone(), |s, e| apply_element(&s, e))
}

/// Split into spatially anti-bunched and spatially bunched parts.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Photons in different spatial modes, normalized (empty if absent).
    pub tssa: TwoPhotonState,
    /// Photons in the same spatial mode, normalized (empty if absent).
    pub tssb: TwoPhotonState,
    pub p_tssa: f64,
    pub p_tssb: f64,
}

pub fn decompose_tssa_tssb(state: &TwoPhotonState) -> Decomposition {
    let (bunched, split): (Vec<Term>, Vec<Term>) = state
        .terms
        .iter()
        .partition(|t| t.photon_a.mode.spatial == t.photon_b.mode.spatial);
    let wrap = |terms: Vec<Term>| TwoPhotonState {
        terms,
        jsa: state.jsa.clone(),
    };
    let tssa = wrap(split);
    let tssb = wrap(bunched);
    let (na, nb) = (tssa.norm_squared(), tssb.norm_squared());
    let total = na + nb;
    let (p_tssa, p_tssb) = if total > 0.0 {
        (na / total, nb / total)
    } else {
        (0.0, 0.0)
    };
    Decomposition {
        tssa: tssa.normalized(),
        tssb: tssb.normalized(),
        p_tssa,
        p_tssb,
    }
}

/// `|1⟩₁|1⟩₂` with the photon in port 2 delayed by `delta_x1` (m).
pub fn mzi_input_state(delta_x1: f64) -> TwoPhotonState {
    TwoPhotonState::from_terms([(
        Complex64::new(1.0, 0.0),
        Photon::new(ModeLabel::port(1), 0.0),
        Photon::new(ModeLabel::port(2), delta_x1 / SPEED_OF_LIGHT),
    )])
}

/// Closed-form output of the Mach-Zehnder interferometer over ports 5 and 6
/// for input photons separated by `delta_x1` (m) and arm phase `phi`.
///
/// Only meaningful when the delay exceeds the single-photon coherence length;
/// a warning is logged below three coherence lengths.
pub fn mzi_output_state(delta_x1: f64, phi: f64, coherence_length: f64) -> TwoPhotonState {
    if delta_x1.abs() < 3.0 * coherence_length {
        log::warn!(
            "delta_x1 = {delta_x1:e} m is below 3x the single-photon coherence length {coherence_length:e} m"
        );
    }
    let tau = delta_x1 / SPEED_OF_LIGHT;
    let undelayed = |p| Photon::new(ModeLabel::port(p), 0.0);
    let delayed = |p| Photon::new(ModeLabel::port(p), tau);
    let (s, c) = phi.sin_cos();
    let r = |x: f64| Complex64::new(x, 0.0);
    TwoPhotonState::from_terms([
        // phase-sensitive bunched part
        (r(0.5 * s), undelayed(6), delayed(6)),
        (r(-0.5 * s), undelayed(5), delayed(5)),
        // anti-bunched parts
        (r(0.5 * (1.0 - c)), delayed(5), undelayed(6)),
        (r(-0.5 * (1.0 + c)), undelayed(5), delayed(6)),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmiOptions {
    /// Relative single-photon phase between the arms (rad).
    pub phase: f64,
    /// Drop the nondegenerate amplitudes whose undelayed photon carries ω₂.
    pub drop_swapped_terms: bool,
}

impl Default for PmiOptions {
    fn default() -> Self {
        Self {
            phase: 0.0,
            drop_swapped_terms: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PmiStates {
    pub tssa: TwoPhotonState,
    pub tssb: TwoPhotonState,
}

/// Polarization-labelled states inside the Michelson arms for photons
/// separated by `delta_x1` (m).
pub fn pmi_intra_state(delta_x1: f64, degenerate: bool, options: PmiOptions) -> Result<PmiStates> {
    if !(delta_x1 >= 0.0 && delta_x1.is_finite()) {
        return Err(Error::invalid(
            "delta_x1",
            "must be finite and non-negative",
        ));
    }
    let tau = delta_x1 / SPEED_OF_LIGHT;
    let h_t = ModeLabel::polarized(Spatial::T, Polarization::H);
    let v_r = ModeLabel::polarized(Spatial::R, Polarization::V);
    let bunch_phase = Complex64::from_polar(1.0, 2.0 * options.phase);
    let one = Complex64::new(1.0, 0.0);

    let (tssa, tssb) = if degenerate {
        let p = |m, d| Photon::new(m, d);
        (
            vec![
                (one, p(h_t, 0.0), p(v_r, tau)),
                (one, p(v_r, 0.0), p(h_t, tau)),
            ],
            vec![
                (one, p(h_t, 0.0), p(h_t, tau)),
                (bunch_phase, p(v_r, 0.0), p(v_r, tau)),
            ],
        )
    } else {
        let p = |m, d, s| Photon::with_slot(m, d, s);
        let (w1, w2) = (SpectralSlot::Omega1, SpectralSlot::Omega2);
        let mut tssa = vec![
            (one, p(h_t, 0.0, w1), p(v_r, tau, w2)),
            (one, p(v_r, 0.0, w1), p(h_t, tau, w2)),
        ];
        let mut tssb = vec![
            (one, p(h_t, 0.0, w1), p(h_t, tau, w2)),
            (bunch_phase, p(v_r, 0.0, w1), p(v_r, tau, w2)),
        ];
        if !options.drop_swapped_terms {
            tssa.push((one, p(h_t, 0.0, w2), p(v_r, tau, w1)));
            tssa.push((one, p(v_r, 0.0, w2), p(h_t, tau, w1)));
            tssb.push((one, p(h_t, 0.0, w2), p(h_t, tau, w1)));
            tssb.push((bunch_phase, p(v_r, 0.0, w2), p(v_r, tau, w1)));
        }
        (tssa, tssb)
    };
    Ok(PmiStates {
        tssa: TwoPhotonState::from_terms(tssa).normalized(),
        tssb: TwoPhotonState::from_terms(tssb).normalized(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    const X_COH: f64 = 0.384e-3;

    fn port(n: u8) -> Spatial {
        Spatial::Port(n)
    }

    fn bs1() -> ElementSpec {
        ElementSpec::balanced_bs(port(1), port(2), port(3), port(4))
    }

    fn bs2() -> ElementSpec {
        ElementSpec::balanced_bs(port(3), port(4), port(6), port(5))
    }

    fn mzi_chain(delta_x1: f64, phi: f64) -> Vec<ElementSpec> {
        vec![
            ElementSpec::delay(port(2), delta_x1),
            bs1(),
            ElementSpec::phase(port(4), phi),
            bs2(),
        ]
    }

    #[test]
    fn hom_at_zero_delay_gives_noon() {
        let out = apply_element(&mzi_input_state(0.0), &bs1()).unwrap();
        let u = |p| Photon::new(ModeLabel::port(p), 0.0);
        assert_eq!(out.terms().len(), 2);
        // i/2 a†₃² + i/2 a†₄² = i(|2,0⟩ + |0,2⟩)/√2
        assert!((out.amplitude(u(3), u(3)) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((out.amplitude(u(4), u(4)) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((out.norm_squared() - 1.0).abs() < 1e-12);
        let d = decompose_tssa_tssb(&out);
        assert!((d.p_tssa - 0.0).abs() < 1e-12 && (d.p_tssb - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delayed_input_splits_into_four_equal_terms() {
        let input = mzi_input_state(2e-3);
        let out = apply_element(&input, &bs1()).unwrap();
        assert_eq!(out.terms().len(), 4);
        for t in out.terms() {
            assert!((t.amplitude.norm() - 0.5).abs() < 1e-15);
        }
        let tau = 2e-3 / SPEED_OF_LIGHT;
        let u = |p| Photon::new(ModeLabel::port(p), 0.0);
        let d = |p| Photon::new(ModeLabel::port(p), tau);
        // anti-bunched: (|1⟩₃|1(Δx₁)⟩₄ − |1(Δx₁)⟩₃|1⟩₄)/2
        assert!((out.amplitude(u(3), d(4)) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((out.amplitude(d(3), u(4)) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        // bunched: i(|1(Δx₁),1⟩₃ + |1(Δx₁),1⟩₄)/2
        assert!((out.amplitude(u(3), d(3)) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((out.amplitude(u(4), d(4)) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        let dec = decompose_tssa_tssb(&out);
        assert!((dec.p_tssa - 0.5).abs() < 1e-12);
        assert!((dec.p_tssb - 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_input_is_fully_anti_bunched() {
        let dec = decompose_tssa_tssb(&mzi_input_state(1e-3));
        assert!((dec.p_tssa - 1.0).abs() < 1e-12);
        assert_eq!(dec.p_tssb, 0.0);
    }

    #[test]
    fn phase_element_doubles_on_bunched_arm() {
        let phi = 0.3;
        let s = apply_network(&mzi_input_state(0.0), &mzi_chain(1e-3, phi)[..3]).unwrap();
        let tau = 1e-3 / SPEED_OF_LIGHT;
        let u = |p| Photon::new(ModeLabel::port(p), 0.0);
        let d = |p| Photon::new(ModeLabel::port(p), tau);
        let ratio = s.amplitude(u(4), d(4)) / s.amplitude(u(3), d(3));
        assert!((ratio - Complex64::from_polar(1.0, 2.0 * phi)).norm() < 1e-12);
    }

    #[test]
    fn identity_elements_leave_state_bitwise_unchanged() {
        let s = apply_element(&mzi_input_state(1e-3), &bs1()).unwrap();
        for e in [
            ElementSpec::phase(port(3), 0.0),
            ElementSpec::delay(port(4), 0.0),
        ] {
            let t = apply_element(&s, &e).unwrap();
            assert_eq!(s.terms().len(), t.terms().len());
            for (a, b) in s.terms().iter().zip(t.terms()) {
                assert_eq!(a.amplitude.re.to_bits(), b.amplitude.re.to_bits());
                assert_eq!(a.amplitude.im.to_bits(), b.amplitude.im.to_bits());
                assert_eq!(a.photon_a, b.photon_a);
                assert_eq!(a.photon_b, b.photon_b);
            }
        }
    }

    #[test]
    fn unknown_mode_is_an_error() {
        let e = ElementSpec::phase(port(7), 1.0);
        assert!(matches!(
            apply_element(&mzi_input_state(0.0), &e),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn mzi_with_zero_delay_and_phase_is_identity() {
        let input = TwoPhotonState::from_terms([(
            Complex64::new(1.0, 0.0),
            Photon::new(ModeLabel::port(1), 0.0),
            Photon::new(ModeLabel::port(2), 0.0),
        )]);
        let out = apply_network(&input, &mzi_chain(0.0, 0.0)).unwrap();
        let relabelled = TwoPhotonState::from_terms([(
            Complex64::new(1.0, 0.0),
            Photon::new(ModeLabel::port(5), 0.0),
            Photon::new(ModeLabel::port(6), 0.0),
        )]);
        assert!(out.distance_up_to_phase(&relabelled) < 1e-10);
    }

    #[test]
    fn chain_reproduces_closed_form_output() {
        for &phi in &[0.0, 0.4, FRAC_PI_2, 2.0, PI, -1.1] {
            for &dx1 in &[1.5e-3, 2.0e-3, 3.2e-3] {
                let chain = apply_network(&mzi_input_state(0.0), &mzi_chain(dx1, phi)).unwrap();
                let closed = mzi_output_state(dx1, phi, X_COH);
                assert!(
                    chain.distance_up_to_phase(&closed) < 1e-8,
                    "phi = {phi}, dx1 = {dx1}\n{chain}\nvs\n{closed}"
                );
                assert!((chain.norm_squared() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_limits() {
        let dx1 = 2e-3;
        let tau = dx1 / SPEED_OF_LIGHT;
        let u = |p| Photon::new(ModeLabel::port(p), 0.0);
        let d = |p| Photon::new(ModeLabel::port(p), tau);
        let at0 = mzi_output_state(dx1, 0.0, X_COH);
        assert_eq!(at0.terms().len(), 1);
        assert!((at0.amplitude(u(5), d(6)).norm() - 1.0).abs() < 1e-15);
        let at_pi = mzi_output_state(dx1, PI, X_COH);
        assert_eq!(at_pi.terms().len(), 1);
        assert!((at_pi.amplitude(d(5), u(6)).norm() - 1.0).abs() < 1e-15);
        // At φ = π/2 the cos φ channel vanishes: the two coincidence terms
        // are equal and opposite, leaving the pure anti-bunched TSSA pair.
        let half = mzi_output_state(dx1, FRAC_PI_2, X_COH);
        let a = half.amplitude(d(5), u(6));
        let b = half.amplitude(u(5), d(6));
        assert!((a + b).norm() < 1e-15);
        assert!((a.norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pmi_degenerate_matches_expected_terms() {
        let s = pmi_intra_state(3.2e-3, true, PmiOptions::default()).unwrap();
        assert_eq!(s.tssa.terms().len(), 2);
        assert_eq!(s.tssb.terms().len(), 2);
        assert!((s.tssa.norm_squared() - 1.0).abs() < 1e-12);
        for t in s.tssa.terms() {
            assert_ne!(t.photon_a.mode.spatial, t.photon_b.mode.spatial);
            assert_ne!(t.photon_a.mode.polarization, t.photon_b.mode.polarization);
            assert!((t.amplitude.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        for t in s.tssb.terms() {
            assert_eq!(t.photon_a.mode, t.photon_b.mode);
        }
    }

    #[test]
    fn pmi_bunched_phase_is_doubled() {
        let phi = 0.7;
        let s = pmi_intra_state(
            3.2e-3,
            true,
            PmiOptions {
                phase: phi,
                ..Default::default()
            },
        )
        .unwrap();
        let t = s.tssb.terms();
        let ratio = t[1].amplitude / t[0].amplitude;
        assert!((ratio - Complex64::from_polar(1.0, 2.0 * phi)).norm() < 1e-12);
    }

    #[test]
    fn pmi_nondegenerate_dropping_swapped_terms() {
        let full = pmi_intra_state(3.2e-3, false, PmiOptions::default()).unwrap();
        assert_eq!(full.tssa.terms().len(), 4);
        assert_eq!(full.tssb.terms().len(), 4);
        for t in full.tssa.terms() {
            assert!((t.amplitude.norm() - 0.5).abs() < 1e-15);
        }
        let dropped = pmi_intra_state(
            3.2e-3,
            false,
            PmiOptions {
                drop_swapped_terms: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(dropped.tssa.terms().len(), 2);
        assert_eq!(dropped.tssb.terms().len(), 2);
        for t in dropped.tssa.terms().iter().chain(dropped.tssb.terms()) {
            let undelayed = if t.photon_a.delay == 0.0 {
                t.photon_a
            } else {
                t.photon_b
            };
            assert_eq!(undelayed.slot, SpectralSlot::Omega1);
        }
        assert!((dropped.tssb.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pmi_zero_delay_is_polarization_hom_input() {
        let s = pmi_intra_state(0.0, true, PmiOptions::default()).unwrap();
        assert_eq!(s.tssa.terms().len(), 1);
        let t = s.tssa.terms()[0];
        assert!((t.amplitude.norm() - 1.0).abs() < 1e-15);
        assert_eq!(
            t.photon_a.mode,
            ModeLabel::polarized(Spatial::T, Polarization::H)
        );
        assert_eq!(
            t.photon_b.mode,
            ModeLabel::polarized(Spatial::R, Polarization::V)
        );
        assert!(pmi_intra_state(-1.0, true, PmiOptions::default()).is_err());
    }

    #[test]
    fn swapping_photons_gives_the_same_state() {
        let a = Photon::new(ModeLabel::port(3), 1e-12);
        let b = Photon::new(ModeLabel::port(4), 0.0);
        let one = Complex64::new(1.0, 0.0);
        let s1 = TwoPhotonState::from_terms([(one, a, b)]);
        let s2 = TwoPhotonState::from_terms([(one, b, a)]);
        assert_eq!(s1, s2);
        assert!(s1.terms()[0].photon_a <= s1.terms()[0].photon_b);
    }
}
