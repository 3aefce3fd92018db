//! Input states for the CV and DV arms.

use alloc::vec;
use alloc::vec::Vec;

use crate::elements::squeeze_matrix;
use crate::fock::{poisson_tail, squeezed_amplitudes, FockRegister, TruncationPolicy};
use crate::labels::{S1_E, S1_L, S2_E, S2_L};
use crate::linalg::{ONE, ZERO};
use crate::{math, Error, Result, C64};

/// Weights tolerance for `p0 + p1 + p_eps = 1`.
const WEIGHT_TOL: f64 = 1e-12;

/// Largest squeezing magnitude accepted by [`squeezed_vacuum`].
pub const MAX_SQUEEZING: f64 = 1.5;

/// Two-photon-per-mode multipair component
/// `double · (|2,2⟩_e + |2,2⟩_l)/√2 + quad · |1,1,1,1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonState {
    pub double: f64,
    pub quad: f64,
}

impl EpsilonState {
    /// The SPDC double-pair state `(|2,2⟩_e + |2,2⟩_l + |1,1,1,1⟩)/√3`.
    pub fn spdc() -> Self {
        Self { double: math::sqrt(2.0 / 3.0), quad: math::sqrt(1.0 / 3.0) }
    }

    /// Dense state on `(1e, 1l, 2e, 2l)` with cutoff 2 per mode.
    pub fn register(&self) -> FockRegister {
        let mut data = vec![ZERO; 81];
        let idx = |n: [usize; 4]| ((n[0] * 3 + n[1]) * 3 + n[2]) * 3 + n[3];
        let d = self.double * math::FRAC_1_SQRT_2;
        data[idx([2, 0, 2, 0])] = C64::new(d, 0.0);
        data[idx([0, 2, 0, 2])] = C64::new(d, 0.0);
        data[idx([1, 1, 1, 1])] = C64::new(self.quad, 0.0);
        FockRegister::from_pure(dv_modes().to_vec(), vec![2; 4], data).expect("fixed layout")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DvSource {
    IdealPair,
    TruncatedMultipair { p0: f64, p1: f64, p_eps: f64, eps: EpsilonState },
    Spdc { lambda2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DvComponent {
    Vacuum,
    Pair,
    Multipair,
}

/// Incoherent DV source components with their weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceWeights {
    pub p0: f64,
    pub p1: f64,
    pub p_eps: f64,
}

impl DvSource {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DvSource::IdealPair => Ok(()),
            DvSource::TruncatedMultipair { p0, p1, p_eps, eps } => {
                for (name, v) in [("p0", p0), ("p1", p1), ("p_eps", p_eps)] {
                    if !(v >= 0.0) {
                        return Err(Error::OutOfRange { name, value: v });
                    }
                }
                let s = p0 + p1 + p_eps;
                if (s - 1.0).abs() > WEIGHT_TOL {
                    return Err(Error::OutOfRange { name: "p0 + p1 + p_eps", value: s });
                }
                let n = eps.double * eps.double + eps.quad * eps.quad;
                if (n - 1.0).abs() > WEIGHT_TOL {
                    return Err(Error::OutOfRange { name: "epsilon-state norm", value: n });
                }
                Ok(())
            }
            DvSource::Spdc { lambda2 } => spdc_multipair(lambda2).map(|_| ()),
        }
    }

    pub fn weights(&self) -> Result<SourceWeights> {
        self.validate()?;
        Ok(match *self {
            DvSource::IdealPair => SourceWeights { p0: 0.0, p1: 1.0, p_eps: 0.0 },
            DvSource::TruncatedMultipair { p0, p1, p_eps, .. } => SourceWeights { p0, p1, p_eps },
            DvSource::Spdc { lambda2 } => spdc_multipair(lambda2)?.0,
        })
    }

    pub fn epsilon_state(&self) -> EpsilonState {
        match *self {
            DvSource::TruncatedMultipair { eps, .. } => eps,
            _ => EpsilonState::spdc(),
        }
    }

    /// Components with nonzero weight, in a fixed order.
    pub fn components(&self) -> Result<Vec<(DvComponent, f64)>> {
        let w = self.weights()?;
        Ok([(DvComponent::Vacuum, w.p0), (DvComponent::Pair, w.p1), (DvComponent::Multipair, w.p_eps)]
            .into_iter()
            .filter(|c| c.1 > 0.0)
            .collect())
    }

    /// Largest photon number per DV mode in any component.
    pub fn max_photons(&self) -> usize {
        match self {
            DvSource::IdealPair => 1,
            _ => 2,
        }
    }

    /// Dense state of one component on `(1e, 1l, 2e, 2l)`.
    pub fn component_state(&self, c: DvComponent) -> FockRegister {
        match c {
            DvComponent::Vacuum => dv_vacuum(1),
            DvComponent::Pair => timebin_pair(1),
            DvComponent::Multipair => self.epsilon_state().register(),
        }
    }
}

pub fn dv_modes() -> [crate::fock::ModeLabel; 4] {
    [S1_E, S1_L, S2_E, S2_L]
}

/// `(|1⟩_{1,e}|1⟩_{2,e} + |1⟩_{1,l}|1⟩_{2,l})/√2` with the given cutoff per
/// mode.
pub fn timebin_pair(cutoff: usize) -> FockRegister {
    let c = cutoff.max(1);
    let d = c + 1;
    let mut data = vec![ZERO; d * d * d * d];
    let idx = |n: [usize; 4]| ((n[0] * d + n[1]) * d + n[2]) * d + n[3];
    let s = C64::new(math::FRAC_1_SQRT_2, 0.0);
    data[idx([1, 0, 1, 0])] = s;
    data[idx([0, 1, 0, 1])] = s;
    FockRegister::from_pure(dv_modes().to_vec(), vec![c; 4], data).expect("fixed layout")
}

pub fn dv_vacuum(cutoff: usize) -> FockRegister {
    let d = cutoff + 1;
    let mut data = vec![ZERO; d * d * d * d];
    data[0] = ONE;
    FockRegister::from_pure(dv_modes().to_vec(), vec![cutoff; 4], data).expect("fixed layout")
}

/// SPDC weights `(p0, p1, p2)` and the double-pair state. The state is
/// `None` at `λ² = 0`, where it carries no weight.
pub fn spdc_multipair(lambda2: f64) -> Result<(SourceWeights, Option<EpsilonState>)> {
    if !(0.0..1.0).contains(&lambda2) {
        return Err(Error::OutOfRange { name: "lambda2", value: lambda2 });
    }
    let q = (1.0 - lambda2) * (1.0 - lambda2);
    let w = SourceWeights { p0: q, p1: 2.0 * q * lambda2, p_eps: 3.0 * q * lambda2 * lambda2 };
    let eps = (lambda2 > 0.0).then(EpsilonState::spdc);
    Ok((w, eps))
}

/// Two identical per-bin sources with photon-number weights `pm[k]`,
/// kept to two photons per spatial mode.
pub fn combine_two_sources(pm0: f64, pm1: f64, pm2: f64) -> (SourceWeights, EpsilonState) {
    let p2 = 2.0 * pm0 * pm2 + pm1 * pm1;
    let w = SourceWeights { p0: pm0 * pm0, p1: 2.0 * pm0 * pm1, p_eps: p2 };
    let eps = if p2 > 0.0 {
        EpsilonState { double: math::sqrt(2.0 * pm0 * pm2 / p2), quad: pm1 / math::sqrt(p2) }
    } else {
        EpsilonState::spdc()
    };
    (w, eps)
}

/// Even cat `(|α⟩ + |−α⟩)/𝒩` with `𝒩 = √2 √(1 + e^{−2α²})`. Odd
/// amplitudes are exactly zero.
fn cat_norm(alpha: f64) -> f64 {
    math::SQRT_2 * math::sqrt(1.0 + math::exp(-2.0 * alpha * alpha))
}

/// Upper bound on the cat mass above `cutoff`: both branches' Poisson
/// tails folded onto the even levels.
fn cat_tail_bound(alpha: f64, cutoff: usize) -> f64 {
    let norm = cat_norm(alpha);
    4.0 * poisson_tail(alpha * alpha, cutoff) / (norm * norm)
}

pub fn cat_plus(alpha: f64, cutoff: usize, tol: f64) -> Result<Vec<C64>> {
    if !(alpha >= 0.0) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha });
    }
    let mut out = vec![ZERO; cutoff + 1];
    if alpha == 0.0 {
        out[0] = ONE;
        return Ok(out);
    }
    let norm = cat_norm(alpha);
    let mut c = math::exp(-0.5 * alpha * alpha);
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            c *= alpha / math::sqrt(k as f64);
        }
        if k % 2 == 0 {
            *slot = C64::new(2.0 * c / norm, 0.0);
        }
    }
    let deficit = cat_tail_bound(alpha, cutoff);
    if deficit > tol {
        return Err(Error::Truncation { deficit, tolerance: tol });
    }
    Ok(out)
}

/// `S(ζ)|0⟩` from the dense squeeze matrix, with the closed-form tail as
/// the truncation deficit.
pub fn squeezed_vacuum(zeta: f64, cutoff: usize, tol: f64) -> Result<Vec<C64>> {
    if !(zeta.abs() <= MAX_SQUEEZING) {
        return Err(Error::OutOfRange { name: "zeta", value: zeta });
    }
    let exact = squeezed_amplitudes(zeta, cutoff);
    let deficit = (1.0 - exact.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0);
    if deficit > tol {
        return Err(Error::Truncation { deficit, tolerance: tol });
    }
    let s = squeeze_matrix(zeta, cutoff);
    let mut out: Vec<C64> = s.column(0).iter().copied().collect();
    for (k, c) in out.iter_mut().enumerate() {
        if k % 2 == 1 {
            *c = ZERO;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CvSource {
    CatPlus(f64),
    SqueezedVacuum(f64),
}

impl CvSource {
    pub fn cutoff(&self, policy: &TruncationPolicy) -> usize {
        match *self {
            CvSource::CatPlus(a) => {
                let mut n = policy.coherent_cutoff(a);
                while a > 0.0 && cat_tail_bound(a, n) > policy.eps {
                    n += 1;
                }
                n
            }
            CvSource::SqueezedVacuum(z) => policy.squeezed_cutoff(z),
        }
    }

    pub fn amplitudes(&self, policy: &TruncationPolicy) -> Result<Vec<C64>> {
        let c = self.cutoff(policy);
        match *self {
            CvSource::CatPlus(a) => cat_plus(a, c, policy.eps),
            CvSource::SqueezedVacuum(z) => squeezed_vacuum(z, c, policy.eps),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CvSource::CatPlus(a) if !(a >= 0.0) || !a.is_finite() => {
                Err(Error::OutOfRange { name: "alpha", value: a })
            }
            CvSource::SqueezedVacuum(z) if !(z.abs() <= MAX_SQUEEZING) => {
                Err(Error::OutOfRange { name: "zeta", value: z })
            }
            _ => Ok(()),
        }
    }
}
