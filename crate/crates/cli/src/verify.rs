use std::io::Write;

use hybrid_core::analytic::{
    fidelity1, p0_squeezed, p1, p2, p_ideal, remote_fidelity, target_state, Encoding, OperatingPoint,
};
use hybrid_core::fock::{FockRegister, TruncationPolicy};
use hybrid_core::labels::{A_E, A_L, B};
use hybrid_core::metrics::{hybrid_npt, wigner_negativity};
use hybrid_core::scheme::{
    engine_overlap, heralded_component_probabilities, overlap_defect, run, CvInput, Engine, HeraldKind, NetworkConfig,
};
use hybrid_core::sources::{DvComponent, DvSource, EpsilonState};
use hybrid_core::C64;
use rayon::prelude::*;

use crate::error::CliResult;
use crate::experiments::{param, projected_cv, P0_TOL};
use crate::output::{format_number, Cell, Table};
use crate::remote;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub params: String,
    pub analytic: f64,
    pub engine: f64,
    /// Absolute deviation unless `relative`.
    pub deviation: f64,
    pub tolerance: f64,
    pub relative: bool,
}

impl Check {
    fn new(name: &'static str, params: String, analytic: f64, engine: f64, tolerance: f64, relative: bool) -> Self {
        let diff = (analytic - engine).abs();
        let deviation = if relative { diff / analytic.abs() } else { diff };
        Self { name, params, analytic, engine, deviation, tolerance, relative }
    }

    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

fn tight() -> TruncationPolicy {
    TruncationPolicy { eps: 1e-14, ..TruncationPolicy::default() }
}

fn cfg(alpha: f64, ra: f64, eta: f64) -> CliResult<NetworkConfig> {
    param(NetworkConfig::from_r_alpha(alpha, ra, eta))
}

fn only(c: DvComponent) -> DvSource {
    let (p0, p1, p_eps) = match c {
        DvComponent::Vacuum => (1.0, 0.0, 0.0),
        DvComponent::Pair => (0.0, 1.0, 0.0),
        DvComponent::Multipair => (0.0, 0.0, 1.0),
    };
    DvSource::TruncatedMultipair { p0, p1, p_eps, eps: EpsilonState::spdc() }
}

type Job = Box<dyn Fn() -> CliResult<Vec<Check>> + Send + Sync>;

fn jobs() -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for (alpha, ra) in [(0.5, 0.05), (1.0, 0.7), (2.0, 1.5)] {
        jobs.push(Box::new(move || {
            let c = cfg(alpha, ra, 1.0)?.with_herald(HeraldKind::Ideal).with_engine(Engine::Dense).with_policy(tight());
            let out = run(&c)?;
            let pt = param(OperatingPoint::from_r_alpha(alpha, ra, 1.0))?;
            let p = format!("alpha={alpha} r_alpha={ra}");
            Ok(vec![
                Check::new("ideal_fidelity", p.clone(), 1.0, out.fidelity()?, 1e-10, false),
                Check::new("ideal_probability", p, p_ideal(&pt), out.outcome.probability, 1e-10, false),
            ])
        }));
    }
    for (alpha, ra, eta) in [(2.0, 0.075 * std::f64::consts::SQRT_2, 0.95), (1.5, 0.3, 0.8), (1.0, 0.8, 0.5)] {
        jobs.push(Box::new(move || {
            let out = run(&cfg(alpha, ra, eta)?.with_engine(Engine::Branch).with_policy(tight()))?;
            let pt = param(OperatingPoint::from_r_alpha(alpha, ra, eta))?;
            let p = format!("alpha={alpha} r_alpha={} eta={eta}", format_number(ra));
            Ok(vec![
                Check::new("onoff_fidelity", p.clone(), fidelity1(&pt), out.fidelity()?, 1e-8, true),
                Check::new("onoff_probability", p, p1(&pt), out.outcome.probability, 1e-8, true),
            ])
        }));
    }
    for ra in [0.05, 0.2, 0.5] {
        jobs.push(Box::new(move || {
            let c = cfg(2.0, ra, 0.9)?.with_dv(only(DvComponent::Multipair))?.with_engine(Engine::Dense);
            let got = heralded_component_probabilities(&c)?.p_eps;
            let pt = param(OperatingPoint::from_r_alpha(2.0, ra, 0.9))?;
            Ok(vec![Check::new("double_pair_probability", format!("alpha=2 r_alpha={ra} eta=0.9"), p2(&pt), got, 1e-6, false)])
        }));
    }
    jobs.push(Box::new(|| {
        let ra = 0.075 * std::f64::consts::SQRT_2;
        let c = cfg(0.25, ra, 0.95)?.with_cv(CvInput::SqueezedVacuum { zeta: -0.061 })?;
        let dense = heralded_component_probabilities(&c)?.p0;
        let series = p0_squeezed(-0.061, c.r, 0.25, 0.95, P0_TOL)?.value;
        Ok(vec![Check::new("squeezed_vacuum_probability", format!("zeta=-0.061 alpha=0.25 r_alpha={} eta=0.95", format_number(ra)), series, dense, 1e-3, true)])
    }));
    for c in [DvComponent::Vacuum, DvComponent::Pair, DvComponent::Multipair] {
        jobs.push(Box::new(move || {
            let ov = engine_overlap(&cfg(2.0, 0.106, 0.95)?, c)?;
            Ok(vec![Check::new("engine_overlap", format!("{c:?} alpha=2 r_alpha=0.106"), 1.0, 1.0 - overlap_defect(ov), 1e-9, false)])
        }));
    }
    for z in [50.0, 200.0] {
        jobs.push(Box::new(move || {
            let p = format!("z_km={z} alpha_f=2 beta_db_per_km=0.2");
            Ok(vec![
                Check::new("remote_timebin", p.clone(), remote_fidelity(Encoding::TimeBin, z, 2.0)?, remote::timebin(z, 0.2, 2.0)?, 1e-10, false),
                Check::new(
                    "remote_single_rail",
                    p,
                    remote_fidelity(Encoding::SingleRail { beta_db_per_km: 0.2 }, z, 2.0)?,
                    remote::single_rail(z, 0.2, 2.0)?,
                    1e-10,
                    false,
                ),
            ])
        }));
    }
    jobs.push(Box::new(|| {
        let cat = projected_cv(&target_state(2.0, remote::cv_cutoff(2.0)).to_mixed())?;
        Ok(vec![Check::new("odd_cat_negativity", "alpha_f=2".into(), 2.0 / std::f64::consts::PI, wigner_negativity(&cat)?, 1e-3, false)])
    }));
    jobs.push(Box::new(|| {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // (|1,0⟩|0⟩ + |0,1⟩|1⟩)/√2 on (A_e, A_l, B).
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[4] = C64::new(s, 0.0);
        amps[3] = C64::new(s, 0.0);
        let bell = FockRegister::from_pure(vec![A_E, A_L, B], vec![1, 1, 1], amps)?;
        let product = FockRegister::fock_state(&[(A_E, 1, 1), (A_L, 1, 0), (B, 1, 1)])?;
        Ok(vec![
            Check::new("npt_bell", "two-qubit embedding".into(), 1.0, hybrid_npt(&bell)?, 1e-10, false),
            Check::new("npt_product", "|1,0>|1>".into(), 0.0, hybrid_npt(&product)?, 1e-10, false),
        ])
    }));
    jobs
}

pub fn checks() -> CliResult<Vec<Check>> {
    let groups = jobs().par_iter().map(|j| j()).collect::<CliResult<Vec<_>>>()?;
    Ok(groups.into_iter().flatten().collect())
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new(vec!["check", "params", "analytic", "engine", "deviation", "tolerance", "measure", "pass"]);
    for c in checks {
        t.push(vec![
            c.name.into(),
            c.params.clone().into(),
            c.analytic.into(),
            c.engine.into(),
            c.deviation.into(),
            c.tolerance.into(),
            Cell::from(if c.relative { "relative" } else { "absolute" }),
            c.passed().into(),
        ]);
    }
    t
}

/// Human-readable summary, one line per check.
pub fn print_summary(checks: &[Check], mut w: impl Write) -> std::io::Result<()> {
    for c in checks {
        let status = if c.passed() { "ok  " } else { "FAIL" };
        writeln!(w, "{status} {:<28} {:<44} dev {:.3e} tol {:.0e}", c.name, c.params, c.deviation, c.tolerance)?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    writeln!(w, "{} checks, {failed} failed", checks.len())
}
