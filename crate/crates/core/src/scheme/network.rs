use alloc::vec;
use alloc::vec::Vec;

use crate::branch::{BranchState, Monomial};
use crate::fock::{ModeLabel, TimeBin};
use crate::labels::{A_E, A_L, AUX_E, AUX_L, B, M0, M3, M4, M5, M6, M7, S2_E, S2_L};
use crate::sources::{DvComponent, DvSource};
use crate::{math, Error, Result, C64};

use super::{CvInput, NetworkConfig};

/// Input modes of one bin's detection network: the two Mach-Zehnder
/// outputs, the pair photon and the BS4 vacuum port, and the four
/// detectors they end up in.
pub struct BinModes {
    pub m6: ModeLabel,
    pub m7: ModeLabel,
    pub m2: ModeLabel,
    pub aux: ModeLabel,
    pub detectors: [ModeLabel; 4],
}

pub fn bin_modes(bin: TimeBin) -> BinModes {
    let (m2, aux) = match bin {
        TimeBin::Early => (S2_E, AUX_E),
        _ => (S2_L, AUX_L),
    };
    BinModes {
        m6: M6.in_bin(bin),
        m7: M7.in_bin(bin),
        m2,
        aux,
        detectors: [
            ModeLabel::new("C", bin),
            ModeLabel::new("D", bin),
            ModeLabel::new("E", bin),
            ModeLabel::new("F", bin),
        ],
    }
}

/// BS3 to BS6 of one bin as `(in1, in2)` pairs, acting in place: BS3
/// leaves `y` on mode 7 and `x` on mode 6, BS4 leaves `a` on mode 2 and
/// `b` on the auxiliary port; BS5 sends `(a, x)` to `(C, D)` and BS6 sends
/// `(b, y)` to `(E, F)`.
pub(crate) fn bin_splitters(m: &BinModes) -> [(ModeLabel, ModeLabel); 4] {
    [(m.m7, m.m6), (m.m2, m.aux), (m.m2, m.m6), (m.aux, m.m7)]
}

/// Final label of each in-place slot after [`bin_splitters`].
pub(crate) fn bin_relabels(m: &BinModes) -> [(ModeLabel, ModeLabel); 4] {
    let [c, d, e, f] = m.detectors;
    [(m.m2, c), (m.m6, d), (m.aux, e), (m.m7, f)]
}

/// Creation-operator polynomial of a DV component on `(A_e, A_l, 2e, 2l)`.
pub fn dv_polynomial(dv: &DvSource, component: DvComponent) -> Vec<(Monomial, C64)> {
    let c = |x: f64| C64::new(x, 0.0);
    match component {
        DvComponent::Vacuum => vec![(vec![0, 0, 0, 0], c(1.0))],
        DvComponent::Pair => {
            let h = math::FRAC_1_SQRT_2;
            vec![(vec![1, 0, 1, 0], c(h)), (vec![0, 1, 0, 1], c(h))]
        }
        DvComponent::Multipair => {
            let eps = dv.epsilon_state();
            // |2,2⟩ = (a†)²(a†)²/2
            let d = eps.double * math::FRAC_1_SQRT_2 / 2.0;
            vec![(vec![2, 0, 2, 0], c(d)), (vec![0, 2, 0, 2], c(d)), (vec![1, 1, 1, 1], c(eps.quad))]
        }
    }
}

fn add_vacuum(s: BranchState, modes: &[ModeLabel]) -> Result<BranchState> {
    let limit = s.limit();
    Ok(s.tensor(&BranchState::vacuum(modes)?)?.with_limit(limit))
}

/// Branch-engine state in front of the detectors, over `(A_e, A_l, B)` and
/// the eight detector modes.
pub fn branch_state(cfg: &NetworkConfig, component: DvComponent) -> Result<BranchState> {
    if let CvInput::SqueezedVacuum { .. } = cfg.cv {
        return Err(Error::Capability("squeezed input has no finite branch form"));
    }
    let (r, t) = (cfg.r, cfg.t());
    let h = math::FRAC_1_SQRT_2;

    // BS1: vacuum and cat in, mode 5 and B out.
    let cat = BranchState::cat_plus(M3, cfg.alpha)?.with_limit(cfg.branch_limit);
    let mut s = BranchState::vacuum(&[M0])?.with_limit(cfg.branch_limit).tensor(&cat)?;
    s = s.apply_beam_splitter(r, t, (M0, M3))?;
    s.relabel(M0, M5)?;
    s.relabel(M3, B)?;

    // BS2 with the phase-locked injection rα on mode 4.
    s = s.tensor(&BranchState::coherent(M4, C64::new(cfg.r_alpha(), 0.0)))?;
    s = s.apply_beam_splitter(h, h, (M5, M4))?;
    s.relabel(M5, M6.in_bin(TimeBin::Late))?;
    s.relabel(M4, M7.in_bin(TimeBin::Early))?;
    s = add_vacuum(s, &[M6.in_bin(TimeBin::Early), M7.in_bin(TimeBin::Late)])?;

    let mut dv = BranchState::from_polynomial(vec![A_E, A_L, S2_E, S2_L], &dv_polynomial(&cfg.dv, component))?;
    dv = dv.with_limit(cfg.branch_limit);
    s = s.tensor(&dv)?;
    s = add_vacuum(s, &[AUX_E, AUX_L])?;

    for bin in [TimeBin::Early, TimeBin::Late] {
        let m = bin_modes(bin);
        for (a, b) in bin_splitters(&m) {
            s = s.apply_beam_splitter(h, h, (a, b))?;
        }
        for (from, to) in bin_relabels(&m) {
            s.relabel(from, to)?;
        }
    }
    Ok(s)
}
