//! Optical elements and channels, and their dense matrices.
//!
//! Beam-splitter convention (real `r`, `t`):
//! `a_out1 = t·a_in1 − r·a_in2`, `a_out2 = r·a_in1 + t·a_in2`, so coherent
//! amplitudes map as `(β1, β2) → (tβ1 − rβ2, rβ1 + tβ2)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::fock::{FockRegister, ModeLabel};
use crate::linalg::{self, CMatrix, ZERO};
use crate::{math, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    BeamSplitter { r: f64, t: f64 },
    Displacement(C64),
    Squeeze(f64),
    Loss { transmission: f64 },
    Depolarize { z_km: f64, lc_km: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementSpec {
    pub kind: ElementKind,
    pub targets: Vec<ModeLabel>,
}

const UNITARITY_TOL: f64 = 1e-12;

pub fn check_beam_splitter(r: f64, t: f64) -> Result<()> {
    if (r * r + t * t - 1.0).abs() > UNITARITY_TOL || !r.is_finite() || !t.is_finite() {
        return Err(Error::NotUnitary { r, t });
    }
    Ok(())
}

impl ElementSpec {
    pub fn beam_splitter(r: f64, t: f64, modes: (ModeLabel, ModeLabel)) -> Result<Self> {
        check_beam_splitter(r, t)?;
        Ok(Self { kind: ElementKind::BeamSplitter { r, t }, targets: vec![modes.0, modes.1] })
    }

    pub fn balanced(modes: (ModeLabel, ModeLabel)) -> Self {
        let s = math::FRAC_1_SQRT_2;
        Self { kind: ElementKind::BeamSplitter { r: s, t: s }, targets: vec![modes.0, modes.1] }
    }

    /// Polarization rotation by `theta`: `H → cos θ H − sin θ V`,
    /// `V → sin θ H + cos θ V`.
    pub fn rotation(theta: f64, modes: (ModeLabel, ModeLabel)) -> Self {
        Self {
            kind: ElementKind::BeamSplitter { r: -math::sin(theta), t: math::cos(theta) },
            targets: vec![modes.0, modes.1],
        }
    }

    pub fn displacement(beta: C64, mode: ModeLabel) -> Self {
        Self { kind: ElementKind::Displacement(beta), targets: vec![mode] }
    }

    pub fn squeeze(zeta: f64, mode: ModeLabel) -> Result<Self> {
        if !zeta.is_finite() {
            return Err(Error::OutOfRange { name: "zeta", value: zeta });
        }
        Ok(Self { kind: ElementKind::Squeeze(zeta), targets: vec![mode] })
    }

    pub fn loss_channel(transmission: f64, mode: ModeLabel) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmission) {
            return Err(Error::OutOfRange { name: "transmission", value: transmission });
        }
        Ok(Self { kind: ElementKind::Loss { transmission }, targets: vec![mode] })
    }

    /// Polarization drift over `z_km` of fiber with correlation length
    /// `lc_km`, acting on the `(H, V)` pair.
    pub fn depolarize_channel(z_km: f64, lc_km: f64, modes: (ModeLabel, ModeLabel)) -> Result<Self> {
        if !(z_km >= 0.0) || !z_km.is_finite() {
            return Err(Error::OutOfRange { name: "z", value: z_km });
        }
        if !(lc_km > 0.0) {
            return Err(Error::OutOfRange { name: "L_C", value: lc_km });
        }
        Ok(Self { kind: ElementKind::Depolarize { z_km, lc_km }, targets: vec![modes.0, modes.1] })
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self.kind, ElementKind::Loss { .. } | ElementKind::Depolarize { .. })
    }

    /// Apply to a dense register at its current cutoffs.
    pub fn apply(&self, reg: &FockRegister) -> Result<FockRegister> {
        match self.kind {
            ElementKind::BeamSplitter { r, t } => {
                let (a, b) = (self.targets[0], self.targets[1]);
                let (ca, cb) = (reg.cutoff(a)?, reg.cutoff(b)?);
                let m = beam_splitter_matrix(r, t, [ca, cb], [ca, cb])?;
                reg.apply_operator(&m, &[a, b])
            }
            ElementKind::Displacement(beta) => {
                let m = self.targets[0];
                reg.apply_operator(&displacement_matrix(beta, reg.cutoff(m)?), &[m])
            }
            ElementKind::Squeeze(zeta) => {
                let m = self.targets[0];
                reg.apply_operator(&squeeze_matrix(zeta, reg.cutoff(m)?), &[m])
            }
            ElementKind::Loss { transmission } => apply_loss(reg, self.targets[0], transmission),
            ElementKind::Depolarize { z_km, lc_km } => {
                apply_depolarize(reg, (self.targets[0], self.targets[1]), z_km, lc_km)
            }
        }
    }
}

/// Photon-number-conserving beam-splitter matrix from input cutoffs to
/// output cutoffs. Exact whenever every output cutoff is at least the
/// largest total photon number present at the input.
pub fn beam_splitter_matrix(r: f64, t: f64, in_cut: [usize; 2], out_cut: [usize; 2]) -> Result<CMatrix> {
    check_beam_splitter(r, t)?;
    let (o1, o2) = (out_cut[0] + 1, out_cut[1] + 1);
    let (i1, i2) = (in_cut[0] + 1, in_cut[1] + 1);
    let mut m = CMatrix::zeros(o1 * o2, i1 * i2);
    for n1 in 0..i1 {
        for n2 in 0..i2 {
            let col = n1 * i2 + n2;
            let norm_in = math::sqrt_factorial(n1) * math::sqrt_factorial(n2);
            let mut acc = vec![0.0f64; n1 + n2 + 1];
            for i in 0..=n1 {
                let a = math::binomial(n1, i) * math::powi(t, i as u32) * math::powi(r, (n1 - i) as u32);
                if a == 0.0 {
                    continue;
                }
                for j in 0..=n2 {
                    let b = math::binomial(n2, j) * math::powi(-r, j as u32) * math::powi(t, (n2 - j) as u32);
                    acc[i + j] += a * b;
                }
            }
            for (m1, &v) in acc.iter().enumerate() {
                let m2 = n1 + n2 - m1;
                if v == 0.0 || m1 >= o1 || m2 >= o2 {
                    continue;
                }
                let amp = v * math::sqrt_factorial(m1) * math::sqrt_factorial(m2) / norm_in;
                m[(m1 * o2 + m2, col)] = C64::new(amp, 0.0);
            }
        }
    }
    Ok(m)
}

fn padded_exp(generator: impl Fn(usize) -> CMatrix, cutoff: usize, pad: usize) -> CMatrix {
    let n = cutoff + 1 + pad;
    let full = linalg::expm_anti_hermitian(&generator(n));
    full.view((0, 0), (cutoff + 1, cutoff + 1)).into_owned()
}

/// `D(β) = exp(β a† − β* a)` on `cutoff + 1` levels, from a padded
/// exponentiation of the generator.
pub fn displacement_matrix(beta: C64, cutoff: usize) -> CMatrix {
    if beta == ZERO {
        return CMatrix::identity(cutoff + 1, cutoff + 1);
    }
    let b = beta.norm();
    let pad = math::ceil(b * b + 6.0 * b * math::sqrt(cutoff as f64 + 1.0)) as usize + 16;
    padded_exp(
        |n| {
            let a = linalg::annihilation(n);
            a.adjoint() * beta - a * beta.conj()
        },
        cutoff,
        pad,
    )
}

/// `S(ζ) = exp(½(ζ a² − ζ a†²))` for real `ζ`.
pub fn squeeze_matrix(zeta: f64, cutoff: usize) -> CMatrix {
    if zeta == 0.0 {
        return CMatrix::identity(cutoff + 1, cutoff + 1);
    }
    let g = math::exp(2.0 * zeta.abs());
    let pad = math::ceil((cutoff as f64 + 1.0) * (g - 1.0)) as usize + 48;
    padded_exp(
        |n| {
            let a = linalg::annihilation(n);
            let a2 = &a * &a;
            (&a2 - a2.adjoint()) * C64::new(0.5 * zeta, 0.0)
        },
        cutoff,
        pad,
    )
}

/// Intensity transmission of `z_km` of fiber with attenuation given in
/// dB/km.
pub fn fiber_transmission(z_km: f64, beta_db_per_km: f64) -> f64 {
    math::pow(10.0, -beta_db_per_km * z_km / 10.0)
}

fn fresh_ancilla(reg: &FockRegister) -> ModeLabel {
    let mut i = 0u16;
    loop {
        let m = ModeLabel::ancilla(i);
        if !reg.modes().contains(&m) {
            return m;
        }
        i += 1;
    }
}

/// Loss as a beam splitter of intensity transmission `transmission` onto a
/// vacuum ancilla, which is then traced out. Exact on the truncated space.
pub fn apply_loss(reg: &FockRegister, mode: ModeLabel, transmission: f64) -> Result<FockRegister> {
    if !(0.0..=1.0).contains(&transmission) {
        return Err(Error::OutOfRange { name: "transmission", value: transmission });
    }
    let c = reg.cutoff(mode)?;
    let anc = fresh_ancilla(reg);
    let ext = reg.tensor(&FockRegister::vacuum(&[(anc, c)])?)?;
    let t = math::sqrt(transmission);
    let r = math::sqrt(1.0 - transmission);
    let bs = beam_splitter_matrix(r, t, [c, c], [c, c])?;
    let out = ext.apply_operator(&bs, &[mode, anc])?;
    let keep: Vec<ModeLabel> = reg.modes().to_vec();
    out.partial_trace(&keep)
}

/// Weight `½(1 + e^{−2σ²z})` kept by the unrotated state, `σ² = 2/L_C`.
pub fn depolarization_weight(z_km: f64, lc_km: f64) -> f64 {
    let sigma2 = 2.0 / lc_km;
    0.5 * (1.0 + math::exp(-2.0 * sigma2 * z_km))
}

/// `ρ → p ρ + (1 − p) J ρ J^†` with `J` the rotation by −π/2 on `(H, V)`.
pub fn apply_depolarize(
    reg: &FockRegister,
    modes: (ModeLabel, ModeLabel),
    z_km: f64,
    lc_km: f64,
) -> Result<FockRegister> {
    if !(z_km >= 0.0) {
        return Err(Error::OutOfRange { name: "z", value: z_km });
    }
    if !(lc_km > 0.0) {
        return Err(Error::OutOfRange { name: "L_C", value: lc_km });
    }
    let (ch, cv) = (reg.cutoff(modes.0)?, reg.cutoff(modes.1)?);
    if ch != cv {
        return Err(Error::DimensionMismatch { expected: ch, found: cv });
    }
    let p = depolarization_weight(z_km, lc_km);
    let rho = reg.to_mixed();
    let j = beam_splitter_matrix(1.0, 0.0, [ch, cv], [ch, cv])?;
    let rotated = rho.apply_operator(&j, &[modes.0, modes.1])?;
    let data: Vec<C64> = rho
        .data()
        .iter()
        .zip(rotated.data())
        .map(|(a, b)| a * p + b * (1.0 - p))
        .collect();
    FockRegister::from_density(rho.modes().to_vec(), rho.cutoffs().to_vec(), data)
}
