//! Remote preparation of an odd cat by projecting the DV half of a hybrid
//! state after fibre transmission, computed with the Fock-space channels.

use hybrid_core::analytic::target_state;
use hybrid_core::detectors::PROBABILITY_FLOOR;
use hybrid_core::elements::{apply_depolarize, apply_loss, fiber_transmission};
use hybrid_core::fock::{coherent_amplitudes, FockRegister, TruncationPolicy};
use hybrid_core::labels::{A_E, A_L, B};
use hybrid_core::metrics::{dv_superposition, fidelity, project_dv};
use hybrid_core::{Result, C64};

/// Cutoff of the CV mode, with a Poisson tail below 1e-14.
pub fn cv_cutoff(alpha_f: f64) -> usize {
    TruncationPolicy { eps: 1e-14, ..TruncationPolicy::default() }.coherent_cutoff(alpha_f.abs())
}

/// `(|α_f⟩ − |−α_f⟩)/𝒩` on `B`.
pub fn odd_cat(alpha_f: f64, cutoff: usize) -> Result<FockRegister> {
    let plus = coherent_amplitudes(C64::new(alpha_f, 0.0), cutoff);
    let minus = coherent_amplitudes(C64::new(-alpha_f, 0.0), cutoff);
    let v = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
    FockRegister::single_mode(B, v).normalized()
}

fn balanced_timebin() -> Result<FockRegister> {
    dv_superposition(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
}

fn remote_fidelity_of(rho: &FockRegister, dv: &FockRegister, alpha_f: f64, cutoff: usize) -> Result<f64> {
    let cond = project_dv(rho, dv, PROBABILITY_FLOOR)?;
    fidelity(&cond.state, &odd_cat(alpha_f, cutoff)?)
}

/// Equal loss on both time bins.
pub fn timebin(z_km: f64, beta_db_per_km: f64, alpha_f: f64) -> Result<f64> {
    let c = cv_cutoff(alpha_f);
    let t = fiber_transmission(z_km, beta_db_per_km);
    let rho = apply_loss(&apply_loss(&target_state(alpha_f, c).to_mixed(), A_E, t)?, A_L, t)?;
    remote_fidelity_of(&rho, &balanced_timebin()?, alpha_f, c)
}

/// `(|1⟩_A|α_f⟩ − |0⟩_A|−α_f⟩)/√2`, loss on `A`, projection on `(|0⟩+|1⟩)/√2`.
pub fn single_rail(z_km: f64, beta_db_per_km: f64, alpha_f: f64) -> Result<f64> {
    let c = cv_cutoff(alpha_f);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = Vec::with_capacity(2 * (c + 1));
    amps.extend(coherent_amplitudes(C64::new(-alpha_f, 0.0), c).into_iter().map(|x| -x * s));
    amps.extend(coherent_amplitudes(C64::new(alpha_f, 0.0), c).into_iter().map(|x| x * s));
    let phi = FockRegister::from_pure(vec![A_E, B], vec![1, c], amps)?;
    let rho = apply_loss(&phi.to_mixed(), A_E, fiber_transmission(z_km, beta_db_per_km))?;
    let plus = FockRegister::from_pure(vec![A_E], vec![1], vec![C64::new(s, 0.0); 2])?;
    remote_fidelity_of(&rho, &plus, alpha_f, c)
}

/// `(A_e, A_l)` standing in for `(H, V)`, depolarised by birefringence.
pub fn polarization(z_km: f64, lc_km: f64, alpha_f: f64) -> Result<f64> {
    let c = cv_cutoff(alpha_f);
    let rho = apply_depolarize(&target_state(alpha_f, c).to_mixed(), (A_E, A_L), z_km, lc_km)?;
    remote_fidelity_of(&rho, &balanced_timebin()?, alpha_f, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hybrid_core::analytic::{remote_fidelity, Encoding};

    #[test]
    fn lossless_links_are_perfect() {
        assert!((timebin(0.0, 0.2, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((single_rail(0.0, 0.2, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((polarization(0.0, 10.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_rail_matches_closed_form() {
        for z in [10.0, 60.0, 300.0] {
            let want = remote_fidelity(Encoding::SingleRail { beta_db_per_km: 0.2 }, z, 2.0).unwrap();
            assert!((single_rail(z, 0.2, 2.0).unwrap() - want).abs() < 1e-10, "z={z}");
        }
    }
}
