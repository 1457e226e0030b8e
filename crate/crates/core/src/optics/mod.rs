//! Two-photon states over labelled spatial/polarization modes, linear-optical
//! elements acting on them, and a brute-force operator oracle.
//!
//! Beamsplitters transmit with amplitude 1/√2 and reflect with i/√2. With the
//! first splitter mapping ports (1, 2) → (3, 4) and the second mapping
//! (3, 4) → (6, 5), the element chain reproduces the Mach-Zehnder output state
//! term by term, up to a global phase.

mod element;
mod mode;
mod oracle;
mod state;

pub use element::{Branch, ElementKind, ElementSpec};
pub use mode::{ModeLabel, Photon, Polarization, Spatial, SpectralSlot};
pub use oracle::{
    mzi_network, oracle_coincidence, oracle_mzi_coincidence, oracle_outcomes, Network,
    OracleOutcomes, ORACLE_MAX_POINTS,
};
pub use state::{
    apply_element, apply_network, decompose_tssa_tssb, mzi_input_state, mzi_output_state,
    pmi_intra_state, Decomposition, PmiOptions, PmiStates, Term, TwoPhotonState,
};
