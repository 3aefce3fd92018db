//! Closed-form heralding probabilities, fidelities and loss models.
//!
//! Everything here is a scalar function of an [`OperatingPoint`]; the
//! engines in [`crate::fock`] and [`crate::branch`] are the cross-check.

use alloc::vec;
use alloc::vec::Vec;

use crate::fock::{coherent_amplitudes, FockRegister};
use crate::labels::{A_E, A_L, B};
use crate::linalg::{CMatrix, CVector, ZERO};
use crate::sources::{spdc_multipair, SourceWeights, MAX_SQUEEZING};
use crate::{math, Error, Result, C64};

/// Scalar parameters of one operating point of the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub alpha: f64,
    /// Reflection of the cat-splitting beam splitter.
    pub r: f64,
    pub t: f64,
    pub eta: f64,
    pub zeta: Option<f64>,
    pub lambda2: Option<f64>,
    pub z_km: Option<f64>,
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange { name, value: v });
    }
    Ok(())
}

impl OperatingPoint {
    pub fn new(alpha: f64, r: f64, eta: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::OutOfRange { name: "alpha", value: alpha });
        }
        check_unit("r", r)?;
        check_unit("eta", eta)?;
        Ok(Self { alpha, r, t: math::sqrt(1.0 - r * r), eta, zeta: None, lambda2: None, z_km: None })
    }

    /// Point fixed by the product `rα` rather than `r`.
    pub fn from_r_alpha(alpha: f64, r_alpha: f64, eta: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::OutOfRange { name: "alpha", value: alpha });
        }
        Self::new(alpha, r_alpha / alpha, eta)
    }

    pub fn with_zeta(mut self, zeta: f64) -> Result<Self> {
        if !(zeta.abs() <= MAX_SQUEEZING) {
            return Err(Error::OutOfRange { name: "zeta", value: zeta });
        }
        self.zeta = Some(zeta);
        Ok(self)
    }

    pub fn with_lambda2(mut self, lambda2: f64) -> Result<Self> {
        spdc_multipair(lambda2)?;
        self.lambda2 = Some(lambda2);
        Ok(self)
    }

    pub fn with_distance(mut self, z_km: f64) -> Result<Self> {
        if !(z_km >= 0.0) {
            return Err(Error::OutOfRange { name: "z", value: z_km });
        }
        self.z_km = Some(z_km);
        Ok(self)
    }

    pub fn r_alpha(&self) -> f64 {
        self.r * self.alpha
    }

    /// Amplitude of the CV qubit, `tα`.
    pub fn alpha_f(&self) -> f64 {
        self.t * self.alpha
    }

    pub fn zeta(&self) -> Result<f64> {
        self.zeta.ok_or(Error::MissingParameter("zeta"))
    }

    pub fn lambda2(&self) -> Result<f64> {
        self.lambda2.ok_or(Error::MissingParameter("lambda2"))
    }

    fn cat_norm(&self) -> f64 {
        1.0 + math::exp(-2.0 * self.alpha * self.alpha)
    }

    fn x(&self) -> f64 {
        self.r_alpha() * self.r_alpha()
    }
}

/// Ideal photon-number-resolving herald probability.
pub fn p_ideal(pt: &OperatingPoint) -> f64 {
    let x = pt.x();
    x * math::exp(-2.0 * x) / (16.0 * pt.cat_norm())
}

/// `u / (1 − e^{−u})`, equal to 1 at `u = 0`.
fn click_ratio(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        -u / math::expm1(-u)
    }
}

/// Off-diagonal magnitude of the on-off heralded state.
pub fn coherence1(pt: &OperatingPoint) -> f64 {
    let x = pt.x();
    math::exp(-2.0 * x) * click_ratio(0.5 * pt.eta * x)
}

/// Fidelity of the on-off heralded state to the target.
pub fn fidelity1(pt: &OperatingPoint) -> f64 {
    0.5 * (1.0 + coherence1(pt))
}

/// On-off herald probability with one pair at the DV input.
pub fn p1(pt: &OperatingPoint) -> f64 {
    let u = 0.5 * pt.eta * pt.x();
    pt.eta / 8.0 * -math::expm1(-u) / pt.cat_norm()
}

/// On-off herald probability with the double-pair DV component.
pub fn p2(pt: &OperatingPoint) -> f64 {
    let (eta, x) = (pt.eta, pt.x());
    let e2 = math::exp(-2.0 * pt.alpha * pt.alpha);
    let bracket = 12.0 - eta - (12.0 - 2.0 * eta + 0.5 * eta * eta * x) * math::exp(-0.5 * eta * x) + eta * e2;
    eta / 48.0 * bracket / (1.0 + e2)
}

/// `num / den`, infinite when the denominator underflows.
fn guarded_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den > f64::MIN_POSITIVE {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Fidelity with multipair contamination for arbitrary source weights.
pub fn fidelity_with_weights(pt: &OperatingPoint, w: &SourceWeights) -> f64 {
    let ratio = guarded_ratio(w.p_eps * p2(pt), w.p1 * p1(pt));
    fidelity1(pt) / (1.0 + ratio)
}

/// Fidelity with an SPDC source of excitation `λ²`.
pub fn fidelity_multipair(pt: &OperatingPoint) -> Result<f64> {
    let (w, _) = spdc_multipair(pt.lambda2()?)?;
    Ok(fidelity_with_weights(pt, &w))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcRatio {
    /// `p_ε P⁽²⁾ / (p₁ P⁽¹⁾)`.
    pub exact: f64,
    /// Small-`rα` estimate `λ² / |rα|²`.
    pub asymptote: f64,
}

pub fn ratio_spdc(pt: &OperatingPoint) -> Result<SpdcRatio> {
    let lambda2 = pt.lambda2()?;
    let (w, _) = spdc_multipair(lambda2)?;
    Ok(SpdcRatio {
        exact: guarded_ratio(w.p_eps * p2(pt), w.p1 * p1(pt)),
        asymptote: guarded_ratio(lambda2, pt.x()),
    })
}

/// Value of a truncated series with its certified tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Outer-index terms summed.
    pub terms: usize,
    pub tail_bound: f64,
}

/// Largest outer index tried before giving up.
pub const P0_MAX_ORDER: usize = 200;

/// Consecutive decaying term pairs required before the tail is bounded.
const DECAY_RUN: usize = 5;

/// Terminating `₂F₁(a, b; c; −1)` with `a` or `b` a nonpositive integer.
fn hyp2f1_neg1(a: i64, b: i64, c: i64) -> f64 {
    let (mut sum, mut term, mut n) = (0.0, 1.0, 0i64);
    loop {
        sum += term;
        if a + n == 0 || b + n == 0 {
            return sum;
        }
        term *= -((a + n) * (b + n)) as f64 / (((c + n) * (n + 1)) as f64);
        n += 1;
    }
}

/// Balanced beam-splitter amplitude `C_{k,l,x}` taking `|k⟩|l⟩` to
/// `|x⟩|k+l−x⟩`, up to the `2^{−(k+l)/2}` normalisation.
fn bs_coefficient(k: usize, l: usize, x: usize) -> f64 {
    let (ki, li, xi) = (k as i64, l as i64, x as i64);
    if x <= l {
        let b = 0.5 * (math::ln_binomial(k + l - x, k) + math::ln_binomial(l, x));
        math::exp(b) * hyp2f1_neg1(-ki, -xi, li - xi + 1)
    } else if x <= k + l {
        let sign = if (x - l).is_multiple_of(2) { 1.0 } else { -1.0 };
        let b = 0.5 * (math::ln_binomial(x, l) + math::ln_binomial(k, x - l));
        sign * math::exp(b) * hyp2f1_neg1(-li, -(ki + li - xi), xi - li + 1)
    } else {
        0.0
    }
}

/// Herald probability with a squeezed-vacuum CV input and vacuum at the DV
/// input, as a triple series over the photon number `y` leaving the
/// squeezer and injector, the number `z` reaching the detectors, and the
/// split `q` between the two heralding modes.
pub fn p0_squeezed(zeta: f64, r: f64, alpha: f64, eta: f64, tol: f64) -> Result<SeriesValue> {
    if !(zeta.abs() <= MAX_SQUEEZING) {
        return Err(Error::OutOfRange { name: "zeta", value: zeta });
    }
    check_unit("r", r)?;
    check_unit("eta", eta)?;
    if !(alpha >= 0.0) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha });
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfRange { name: "tol", value: tol });
    }
    let ra = r * alpha;
    let t = math::sqrt(1.0 - r * r);
    let th = -math::tanh(zeta) / 2.0;
    let prefactor = math::exp(-ra * ra) / math::cosh(zeta);
    let keep = 1.0 - eta / 4.0;
    let (ln_t, ln_r, ln_ra, ln_th) = (math::ln(t), math::ln(r), math::ln(ra), math::ln(th.abs()));
    let half_ln2 = 0.5 * math::ln(2.0);

    // ctable[z][k][q] = C_{k, z−k, q}
    let mut ctable: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut sum = 0.0;
    let mut pairs: Vec<f64> = Vec::new();
    let mut pending = 0.0;
    for y in 0..=P0_MAX_ORDER {
        while ctable.len() <= y {
            let z = ctable.len();
            ctable.push((0..=z).map(|k| (0..=z).map(|q| bs_coefficient(k, z - k, q)).collect()).collect());
        }
        let mut term = 0.0;
        for (z, table) in ctable.iter().enumerate().take(y + 1) {
            // amplitude of k photons from the injector among the z detected
            let mut amp = vec![0.0; z + 1];
            for (k, a) in amp.iter_mut().enumerate() {
                if (y - k) % 2 != 0 {
                    continue;
                }
                let m = (y - k) / 2;
                let ln = ln_pow_checked(ln_t, y - z)
                    + ln_pow_checked(ln_r, z - k)
                    + 0.5 * math::ln_binomial(y - k, z - k)
                    + ln_pow_checked(ln_ra, k)
                    - 0.5 * math::ln_factorial(k)
                    + 0.5 * math::ln_binomial(y - k, m)
                    + ln_pow_checked(ln_th, m)
                    - z as f64 * half_ln2;
                let sign = if th < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
                *a = sign * math::exp(ln);
            }
            for q in 0..=z {
                let w = (1.0 - math::powi(keep, (z - q) as u32)) * (1.0 - math::powi(keep, q as u32));
                if w == 0.0 {
                    continue;
                }
                let s: f64 = amp.iter().zip(table).map(|(a, row)| a * row[q]).sum();
                term += w * s * s;
            }
        }
        term *= prefactor;
        sum += term;
        if y % 2 == 0 {
            pending = term;
            continue;
        }
        pairs.push(pending + term);
        if let Some(bound) = geometric_tail(&pairs) {
            if bound <= tol {
                return Ok(SeriesValue { value: sum, terms: y + 1, tail_bound: bound });
            }
        }
    }
    Err(Error::NonConvergence { terms: P0_MAX_ORDER + 1 })
}

/// `n ln x` from a precomputed `ln x`, with `x⁰ = 1` even when `x = 0`.
fn ln_pow_checked(ln_x: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * ln_x
    }
}

/// Geometric bound on the remainder of a series whose last
/// [`DECAY_RUN`] terms decay monotonically.
fn geometric_tail(terms: &[f64]) -> Option<f64> {
    if terms.len() <= DECAY_RUN {
        return None;
    }
    let recent = &terms[terms.len() - DECAY_RUN - 1..];
    let mut rho: f64 = 0.0;
    for w in recent.windows(2) {
        if w[1] == 0.0 {
            continue;
        }
        if !(w[1] < w[0]) {
            return None;
        }
        rho = rho.max(w[1] / w[0]);
    }
    let last = recent[DECAY_RUN];
    Some(last * rho / (1.0 - rho))
}

/// Fidelity with both vacuum and multipair contamination, given `P⁽⁰⁾`.
pub fn fidelity_squeezed(pt: &OperatingPoint, p0_value: f64) -> Result<f64> {
    let (w, _) = spdc_multipair(pt.lambda2()?)?;
    Ok(fidelity_squeezed_with_weights(pt, &w, p0_value))
}

pub fn fidelity_squeezed_with_weights(pt: &OperatingPoint, w: &SourceWeights, p0_value: f64) -> f64 {
    let den = w.p1 * p1(pt);
    let ratio = guarded_ratio(w.p0 * p0_value, den) + guarded_ratio(w.p_eps * p2(pt), den);
    fidelity1(pt) / (1.0 + ratio)
}

/// Total herald probability `p₀P⁽⁰⁾ + p₁P⁽¹⁾ + p_εP⁽²⁾`.
pub fn total_probability(pt: &OperatingPoint, w: &SourceWeights, p0_value: f64) -> f64 {
    w.p0 * p0_value + w.p1 * p1(pt) + w.p_eps * p2(pt)
}

/// Range of `p₁` in which neither vacuum nor multipair events dominate.
pub fn p1_window(pt: &OperatingPoint) -> Result<(f64, f64)> {
    let x = pt.x();
    let lower = pt.r * pt.r * math::powi(pt.alpha, 6);
    if !(lower < x) {
        return Err(Error::EmptyWindow { lower, upper: x });
    }
    Ok((lower, x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedOptimum {
    pub lambda2: f64,
    pub p1: f64,
    pub fidelity: f64,
    pub probability: f64,
}

/// Maximise the squeezed-input fidelity over `λ² ∈ [lo, hi]`: a log grid of
/// `n` points followed by golden-section refinement in `ln λ²`.
pub fn squeezed_optimum(pt: &OperatingPoint, p0_value: f64, lo: f64, hi: f64, n: usize) -> Result<SqueezedOptimum> {
    if !(lo > 0.0 && hi > lo && hi < 1.0) || n < 3 {
        return Err(Error::OutOfRange { name: "lambda2 range", value: lo });
    }
    let f = |ln_l: f64| -> f64 {
        let (w, _) = spdc_multipair(math::exp(ln_l)).expect("inside (0, 1)");
        fidelity_squeezed_with_weights(pt, &w, p0_value)
    };
    let (a, b) = (math::ln(lo), math::ln(hi));
    let step = (b - a) / (n - 1) as f64;
    let best = (0..n)
        .map(|i| a + step * i as f64)
        .map(|x| (x, f(x)))
        .fold((a, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
    let (mut l, mut h) = ((best.0 - step).max(a), (best.0 + step).min(b));
    let g = 0.5 * (math::sqrt(5.0) - 1.0);
    let (mut c, mut d) = (h - g * (h - l), l + g * (h - l));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc > fd {
            h = d;
            d = c;
            fd = fc;
            c = h - g * (h - l);
            fc = f(c);
        } else {
            l = c;
            c = d;
            fc = fd;
            d = l + g * (h - l);
            fd = f(d);
        }
    }
    let lambda2 = math::exp(0.5 * (l + h));
    let (w, _) = spdc_multipair(lambda2)?;
    Ok(SqueezedOptimum {
        lambda2,
        p1: w.p1,
        fidelity: fidelity_squeezed_with_weights(pt, &w, p0_value),
        probability: total_probability(pt, &w, p0_value),
    })
}

/// DV encoding of a hybrid state whose DV half travels through fibre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Encoding {
    TimeBin,
    /// Polarization with birefringence correlation length `lc_km`.
    Polarization { lc_km: f64 },
    /// Photon presence or absence, fibre attenuation in dB/km.
    SingleRail { beta_db_per_km: f64 },
}

/// Natural-log attenuation coefficient (1/km) from dB/km.
pub fn db_to_nepers(beta_db_per_km: f64) -> f64 {
    beta_db_per_km * math::ln(10.0) / 10.0
}

/// Fidelity of the odd cat prepared remotely by projecting the DV half,
/// after `z_km` of fibre.
pub fn remote_fidelity(encoding: Encoding, z_km: f64, alpha_f: f64) -> Result<f64> {
    if !(z_km >= 0.0) {
        return Err(Error::OutOfRange { name: "z", value: z_km });
    }
    let decay = match encoding {
        Encoding::TimeBin => return Ok(1.0),
        Encoding::Polarization { lc_km } => {
            if !(lc_km > 0.0) {
                return Err(Error::OutOfRange { name: "lc_km", value: lc_km });
            }
            math::exp(-z_km / lc_km)
        }
        Encoding::SingleRail { beta_db_per_km } => math::exp(-0.5 * db_to_nepers(beta_db_per_km) * z_km),
    };
    if decay == 1.0 {
        return Ok(1.0);
    }
    let e = math::exp(-2.0 * alpha_f * alpha_f);
    Ok(0.5 + (decay - e) / (2.0 * (1.0 - decay * e)))
}

/// Target state `(|1⟩_{A,e}|α_f⟩ − |1⟩_{A,l}|−α_f⟩)/√2` over `(A_e, A_l, B)`.
pub fn target_state(alpha_f: f64, cutoff: usize) -> FockRegister {
    let v = (hybrid_ket(1, 0, alpha_f, cutoff) - hybrid_ket(0, 1, -alpha_f, cutoff)) * C64::new(math::FRAC_1_SQRT_2, 0.0);
    FockRegister::from_pure(KEPT.to_vec(), vec![1, 1, cutoff], v.iter().copied().collect()).expect("fixed layout")
}

const KEPT: [crate::fock::ModeLabel; 3] = [A_E, A_L, B];

/// `|a_e, a_l⟩ ⊗ |β⟩` on `(A_e, A_l, B)` with DV cutoffs 1.
fn hybrid_ket(ae: usize, al: usize, beta: f64, cutoff: usize) -> CVector {
    let d = cutoff + 1;
    let mut v = CVector::from_element(4 * d, ZERO);
    let base = (ae * 2 + al) * d;
    for (n, c) in coherent_amplitudes(C64::new(beta, 0.0), cutoff).into_iter().enumerate() {
        v[base + n] = c;
    }
    v
}

/// `Σ c_ij |u_i⟩⟨u_j|` as a mixed register on `(A_e, A_l, B)`.
fn hybrid_density(kets: &[CVector], coeffs: &[&[f64]], cutoff: usize) -> FockRegister {
    let n = kets[0].len();
    let mut m = CMatrix::zeros(n, n);
    for (i, ui) in kets.iter().enumerate() {
        for (j, uj) in kets.iter().enumerate() {
            if coeffs[i][j] != 0.0 {
                m += ui * uj.adjoint() * C64::new(coeffs[i][j], 0.0);
            }
        }
    }
    FockRegister::from_matrix(KEPT.to_vec(), vec![1, 1, cutoff], &m).expect("fixed layout")
}

/// Closed-form state heralded by the on-off strategy with an ideal pair.
pub fn heralded_state_simple(pt: &OperatingPoint, cutoff: usize) -> FockRegister {
    let af = pt.alpha_f();
    let c = coherence1(pt);
    let kets = [hybrid_ket(1, 0, af, cutoff), hybrid_ket(0, 1, -af, cutoff)];
    hybrid_density(&kets, &[&[0.5, -0.5 * c], &[-0.5 * c, 0.5]], cutoff)
}

/// Target state after a loss beam splitter of reflection `r_cv` on `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvLossRecord {
    /// Weight of each diagonal block.
    pub diagonal: f64,
    /// Off-diagonal factor `e^{−2|r_CV α_f|²}`.
    pub coherence: f64,
    /// Surviving amplitude `√(1−r_CV²) α_f`.
    pub amplitude: f64,
}

/// Target state after a loss beam splitter of reflection `r_dv` on `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvLossRecord {
    pub alpha_f: f64,
    /// Weight `t_DV²` of the intact target.
    pub target_weight: f64,
    /// Weight `r_DV²` of the vacuum-DV cat mixture.
    pub vacuum_weight: f64,
}

pub fn cv_loss(alpha_f: f64, r_cv: f64) -> Result<CvLossRecord> {
    check_unit("r_cv", r_cv)?;
    let rc = r_cv * alpha_f;
    Ok(CvLossRecord {
        diagonal: 0.5,
        coherence: math::exp(-2.0 * rc * rc),
        amplitude: math::sqrt(1.0 - r_cv * r_cv) * alpha_f,
    })
}

pub fn dv_loss(alpha_f: f64, r_dv: f64) -> Result<DvLossRecord> {
    check_unit("r_dv", r_dv)?;
    Ok(DvLossRecord { alpha_f, target_weight: 1.0 - r_dv * r_dv, vacuum_weight: r_dv * r_dv })
}

impl CvLossRecord {
    pub fn density(&self, cutoff: usize) -> FockRegister {
        let a = self.amplitude;
        let (d, c) = (self.diagonal, self.diagonal * self.coherence);
        let kets = [hybrid_ket(1, 0, a, cutoff), hybrid_ket(0, 1, -a, cutoff)];
        hybrid_density(&kets, &[&[d, -c], &[-c, d]], cutoff)
    }
}

impl DvLossRecord {
    pub fn density(&self, cutoff: usize) -> FockRegister {
        let a = self.alpha_f;
        let (t2, v) = (self.target_weight, 0.5 * self.vacuum_weight);
        let kets = [
            hybrid_ket(1, 0, a, cutoff),
            hybrid_ket(0, 1, -a, cutoff),
            hybrid_ket(0, 0, a, cutoff),
            hybrid_ket(0, 0, -a, cutoff),
        ];
        let h = 0.5 * t2;
        hybrid_density(
            &kets,
            &[&[h, -h, 0.0, 0.0], &[-h, h, 0.0, 0.0], &[0.0, 0.0, v, 0.0], &[0.0, 0.0, 0.0, v]],
            cutoff,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op_point() -> OperatingPoint {
        OperatingPoint::from_r_alpha(2.0, 0.075 * math::SQRT_2, 0.95).unwrap()
    }

    #[test]
    fn headline_operating_point() {
        let pt = op_point();
        assert!((fidelity1(&pt) - 0.99).abs() < 0.005);
        assert!((p1(&pt) / 6.4e-4 - 1.0).abs() < 0.05);
        assert!((pt.alpha_f() - 2.0).abs() < 0.01);
    }

    #[test]
    fn limits_at_zero_r_alpha() {
        let pt = OperatingPoint::new(2.0, 0.0, 0.95).unwrap();
        assert_eq!(p_ideal(&pt), 0.0);
        assert_eq!(p1(&pt), 0.0);
        assert_eq!(fidelity1(&pt), 1.0);
        assert!((p2(&pt) - 0.95 * 0.95 / 48.0).abs() < 1e-15);
        let pt = OperatingPoint::new(2.0, 0.5, 0.0).unwrap();
        assert_eq!(p2(&pt), 0.0);
    }

    #[test]
    fn ideal_probability_peaks_at_inverse_sqrt_two() {
        let f = |ra: f64| p_ideal(&OperatingPoint::from_r_alpha(2.0, ra, 1.0).unwrap());
        let peak = math::FRAC_1_SQRT_2;
        assert!(f(peak) > f(peak - 1e-3) && f(peak) > f(peak + 1e-3));
    }

    #[test]
    fn multipair_reduces_to_single_pair() {
        let pt = op_point().with_lambda2(0.0).unwrap();
        assert_eq!(fidelity_multipair(&pt).unwrap(), fidelity1(&pt));
        let pt = OperatingPoint::from_r_alpha(2.0, 0.01, 0.95).unwrap();
        let pt = pt.with_lambda2(pt.r_alpha().powi(2)).unwrap();
        let ratio = ratio_spdc(&pt).unwrap();
        assert!((ratio.asymptote - 1.0).abs() < 1e-12);
        // exact small-rα limit carries the cat normalisation: (1 + e^{−2α²})/2
        let limit = 0.5 * (1.0 + math::exp(-8.0));
        assert!((ratio.exact / limit - 1.0).abs() < 1e-3, "{ratio:?}");
    }

    #[test]
    fn hypergeometric_coefficients_are_unitary() {
        for n in 0..8usize {
            for k in 0..=n {
                let norm: f64 = (0..=n).map(|x| bs_coefficient(k, n - k, x).powi(2)).sum();
                assert!((norm / math::powi(2.0, n as u32) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn p0_headline_value() {
        let ra = 0.075 * math::SQRT_2;
        let v = p0_squeezed(-0.061, ra / 0.25, 0.25, 0.95, 1e-14).unwrap();
        assert!((v.value / 1.2969e-8 - 1.0).abs() < 1e-3, "{v:?}");
        assert!(v.tail_bound <= 1e-14);
    }

    #[test]
    fn p0_without_squeezing_is_coherent_crosstalk() {
        // With ζ = 0 only the injected coherent state reaches the detectors,
        // split evenly over both bins of every detector.
        let (r, alpha, eta) = (0.4, 0.25, 0.95);
        let v = p0_squeezed(0.0, r, alpha, eta, 1e-16).unwrap();
        let ra = r * alpha;
        let click = -math::expm1(-eta * ra * ra / 8.0);
        assert!((v.value / (click * click) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn window_and_remote() {
        let pt = OperatingPoint::from_r_alpha(0.25, 0.075 * math::SQRT_2, 0.95).unwrap();
        let (lo, hi) = p1_window(&pt).unwrap();
        assert!(lo < hi);
        assert!(p1_window(&OperatingPoint::new(2.0, 1.0, 0.9).unwrap()).is_err());
        let sr = Encoding::SingleRail { beta_db_per_km: 0.2 };
        assert_eq!(remote_fidelity(Encoding::TimeBin, 500.0, 2.0).unwrap(), 1.0);
        assert_eq!(remote_fidelity(sr, 0.0, 2.0).unwrap(), 1.0);
        let far = remote_fidelity(sr, 1e5, 2.0).unwrap();
        assert!((far - (0.5 - 0.5 * math::exp(-8.0))).abs() < 1e-12);
    }

    #[test]
    fn loss_records_reduce_to_target() {
        let c = 24;
        let target = target_state(2.0, c).to_mixed();
        let cv = cv_loss(2.0, 0.0).unwrap().density(c);
        let dv = dv_loss(2.0, 0.0).unwrap().density(c);
        for ((a, b), d) in target.data().iter().zip(cv.data()).zip(dv.data()) {
            assert!((a - b).norm() < 1e-14 && (a - d).norm() < 1e-14);
        }
        assert!((cv_loss(2.0, 0.5).unwrap().coherence - math::exp(-2.0)).abs() < 1e-15);
        let full = dv_loss(2.0, 1.0).unwrap().density(c);
        assert!(full.entry(&[1, 0, 0], &[1, 0, 0]).unwrap().norm() == 0.0);
    }
}
