//! Mode labels of the generation network.

use crate::fock::ModeLabel;

/// DV output (time-bin qubit).
pub const A_E: ModeLabel = ModeLabel::early("A");
pub const A_L: ModeLabel = ModeLabel::late("A");
/// CV output.
pub const B: ModeLabel = ModeLabel::plain("B");

pub const C_E: ModeLabel = ModeLabel::early("C");
pub const C_L: ModeLabel = ModeLabel::late("C");
pub const D_E: ModeLabel = ModeLabel::early("D");
pub const D_L: ModeLabel = ModeLabel::late("D");
pub const E_E: ModeLabel = ModeLabel::early("E");
pub const E_L: ModeLabel = ModeLabel::late("E");
pub const F_E: ModeLabel = ModeLabel::early("F");
pub const F_L: ModeLabel = ModeLabel::late("F");

/// The eight heralding detectors, early bin first.
pub const HERALD_MODES: [ModeLabel; 8] = [C_E, D_E, E_E, F_E, C_L, D_L, E_L, F_L];

/// Modes that survive heralding.
pub const KEPT_MODES: [ModeLabel; 3] = [A_E, A_L, B];

/// Pair-source modes before the network.
pub const S1_E: ModeLabel = ModeLabel::early("1");
pub const S1_L: ModeLabel = ModeLabel::late("1");
pub const S2_E: ModeLabel = ModeLabel::early("2");
pub const S2_L: ModeLabel = ModeLabel::late("2");

/// Cat input, BS1 reflected port, injection port and BS2 outputs.
pub const M3: ModeLabel = ModeLabel::plain("3");
pub const M4: ModeLabel = ModeLabel::plain("4");
pub const M5: ModeLabel = ModeLabel::plain("5");
pub const M6: ModeLabel = ModeLabel::plain("6");
pub const M7: ModeLabel = ModeLabel::plain("7");

/// Vacuum port of BS1.
pub const M0: ModeLabel = ModeLabel::plain("0");
/// Vacuum port of BS4, one per bin.
pub const AUX_E: ModeLabel = ModeLabel::early("aux");
pub const AUX_L: ModeLabel = ModeLabel::late("aux");
