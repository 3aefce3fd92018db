//! Detector POVMs and heralding strategies.

use alloc::vec::Vec;

use crate::fock::{cross_trace, FockRegister, ModeLabel, StateKind};
use crate::labels::{E_L, F_E, HERALD_MODES, KEPT_MODES};
use crate::linalg::{CMatrix, ONE};
use crate::{math, Error, Result, C64};

/// Heralding probabilities below this are reported as degenerate.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub enum PovmKind {
    Identity,
    /// `|n⟩⟨n|`.
    Projector(usize),
    /// No click: `Σ_k (1−η)^k |k⟩⟨k|`.
    Off(f64),
    /// Click: identity minus the no-click element.
    On(f64),
    /// Arbitrary Hermitian PSD matrix at a fixed dimension.
    Matrix(CMatrix),
}

/// One measurement operator attached to one mode. Materialised at whatever
/// cutoff the mode carries in the state being measured.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub mode: ModeLabel,
    pub kind: PovmKind,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange { name: "eta", value: eta });
    }
    Ok(())
}

impl PovmElement {
    pub fn identity(mode: ModeLabel) -> Self {
        Self { mode, kind: PovmKind::Identity }
    }

    pub fn projector(mode: ModeLabel, n: usize) -> Self {
        Self { mode, kind: PovmKind::Projector(n) }
    }

    /// Diagonal entries when the element is diagonal in the Fock basis.
    pub fn diagonal(&self, cutoff: usize) -> Option<Vec<f64>> {
        let d = cutoff + 1;
        match &self.kind {
            PovmKind::Identity => Some(alloc::vec![1.0; d]),
            PovmKind::Projector(n) => Some((0..d).map(|k| if k == *n { 1.0 } else { 0.0 }).collect()),
            PovmKind::Off(eta) => Some((0..d).map(|k| math::powi(1.0 - eta, k as u32)).collect()),
            PovmKind::On(eta) => Some((0..d).map(|k| 1.0 - math::powi(1.0 - eta, k as u32)).collect()),
            PovmKind::Matrix(_) => None,
        }
    }

    /// Dense matrix on `cutoff + 1` levels.
    pub fn matrix(&self, cutoff: usize) -> Result<CMatrix> {
        if let PovmKind::Matrix(m) = &self.kind {
            if m.nrows() != cutoff + 1 || m.ncols() != cutoff + 1 {
                return Err(Error::DimensionMismatch { expected: cutoff + 1, found: m.nrows() });
            }
            return Ok(m.clone());
        }
        let diag = self.diagonal(cutoff).expect("diagonal kinds");
        let mut m = CMatrix::zeros(cutoff + 1, cutoff + 1);
        for (k, v) in diag.into_iter().enumerate() {
            m[(k, k)] = C64::new(v, 0.0);
        }
        Ok(m)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, PovmKind::Identity)
    }
}

/// `(off, on)` elements of an on-off detector of efficiency `eta`.
pub fn onoff_povm(eta: f64, mode: ModeLabel) -> Result<(PovmElement, PovmElement)> {
    check_eta(eta)?;
    Ok((PovmElement { mode, kind: PovmKind::Off(eta) }, PovmElement { mode, kind: PovmKind::On(eta) }))
}

/// Per-mode measurement assignments plus the modes left unmeasured.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldStrategy {
    assignments: Vec<PovmElement>,
    kept: Vec<ModeLabel>,
}

impl HeraldStrategy {
    pub fn new(assignments: Vec<PovmElement>, kept: Vec<ModeLabel>) -> Result<Self> {
        for (i, a) in assignments.iter().enumerate() {
            if assignments[..i].iter().any(|b| b.mode == a.mode) || kept.contains(&a.mode) {
                return Err(Error::DuplicateMode(a.mode));
            }
        }
        for (i, k) in kept.iter().enumerate() {
            if kept[..i].contains(k) {
                return Err(Error::DuplicateMode(*k));
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyKeep);
        }
        Ok(Self { assignments, kept })
    }

    /// Keep `kept`, trace every other mode without measuring it.
    pub fn identity(kept: Vec<ModeLabel>) -> Result<Self> {
        Self::new(Vec::new(), kept)
    }

    pub fn assignments(&self) -> &[PovmElement] {
        &self.assignments
    }

    pub fn kept(&self) -> &[ModeLabel] {
        &self.kept
    }

    /// Element assigned to `mode`; unassigned modes measure the identity.
    pub fn element(&self, mode: ModeLabel) -> PovmElement {
        self.assignments
            .iter()
            .find(|a| a.mode == mode)
            .cloned()
            .unwrap_or_else(|| PovmElement::identity(mode))
    }

    /// Check that every assigned and kept mode exists in `modes`.
    pub fn validate(&self, modes: &[ModeLabel]) -> Result<()> {
        for m in self.assignments.iter().map(|a| &a.mode).chain(&self.kept) {
            if !modes.contains(m) {
                return Err(Error::MissingMode(*m));
            }
        }
        Ok(())
    }
}

/// Photon-number-resolving herald: one photon in `(E, l)` and `(F, e)`,
/// vacuum in the six other detectors.
pub fn ideal_herald() -> HeraldStrategy {
    let assignments = HERALD_MODES
        .iter()
        .map(|&m| PovmElement::projector(m, usize::from(m == E_L || m == F_E)))
        .collect();
    HeraldStrategy { assignments, kept: KEPT_MODES.to_vec() }
}

/// On-off herald: clicks on `(E, l)` and `(F, e)`, identity on the six
/// other detectors.
pub fn simple_herald(eta: f64) -> Result<HeraldStrategy> {
    check_eta(eta)?;
    let assignments = HERALD_MODES
        .iter()
        .map(|&m| {
            if m == E_L || m == F_E {
                PovmElement { mode: m, kind: PovmKind::On(eta) }
            } else {
                PovmElement::identity(m)
            }
        })
        .collect();
    Ok(HeraldStrategy { assignments, kept: KEPT_MODES.to_vec() })
}

/// Normalised conditional state on the kept modes and its probability.
#[derive(Debug, Clone)]
pub struct HeraldOutcome {
    pub state: FockRegister,
    pub probability: f64,
}

/// Apply every non-identity element of `strategy` to the ket side.
pub(crate) fn apply_povm_left(state: &FockRegister, strategy: &HeraldStrategy) -> Result<FockRegister> {
    let mut out = state.clone();
    for a in strategy.assignments.iter().filter(|a| !a.is_identity()) {
        let c = out.cutoff(a.mode)?;
        out = out.apply_left(&a.matrix(c)?, &[a.mode])?;
    }
    Ok(out)
}

/// `Tr_detected[Π ρ]` on the kept modes, unnormalised.
pub fn herald_unnormalized(state: &FockRegister, strategy: &HeraldStrategy) -> Result<FockRegister> {
    strategy.validate(state.modes())?;
    let measured = apply_povm_left(state, strategy)?;
    match state.kind() {
        StateKind::Pure => cross_trace(&measured, state, &strategy.kept),
        StateKind::Mixed => measured.partial_trace(&strategy.kept),
    }
}

/// Herald with the default probability floor.
pub fn herald(state: &FockRegister, strategy: &HeraldStrategy) -> Result<HeraldOutcome> {
    herald_with_floor(state, strategy, PROBABILITY_FLOOR)
}

pub fn herald_with_floor(state: &FockRegister, strategy: &HeraldStrategy, floor: f64) -> Result<HeraldOutcome> {
    let rho = herald_unnormalized(state, strategy)?;
    normalize_outcome(rho, floor)
}

pub(crate) fn normalize_outcome(rho: FockRegister, floor: f64) -> Result<HeraldOutcome> {
    let probability = rho.trace().re;
    if !(probability >= floor) || probability == 0.0 {
        return Err(Error::DegenerateOutcome { probability });
    }
    let state = rho.scaled(ONE / probability);
    Ok(HeraldOutcome { state, probability })
}
