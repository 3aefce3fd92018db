use hybrid_core::analytic::{
    fidelity1, fidelity_squeezed_with_weights, fidelity_with_weights, heralded_state_simple, p0_squeezed, p1, p2,
    p_ideal, remote_fidelity, squeezed_optimum, target_state, total_probability, Encoding, OperatingPoint,
};
use hybrid_core::detectors::PROBABILITY_FLOOR;
use hybrid_core::fock::FockRegister;
use hybrid_core::labels::B;
use hybrid_core::metrics::{dv_superposition, hybrid_npt, project_dv, wigner, wigner_negativity, PhaseSpaceGrid};
use hybrid_core::scheme::{component_set, run, CvInput, Engine, HeraldKind, NetworkConfig};
use hybrid_core::sources::{spdc_multipair, DvSource, EpsilonState};
use hybrid_core::C64;
use rayon::prelude::*;

use crate::config::{Settings, Sweep, SweepParam, WignerState};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};
use crate::remote;

pub const HEADLINE_ALPHA: f64 = 2.0;
pub const HEADLINE_ETA: f64 = 0.95;
/// `rα/√2 = 0.075`.
pub const HEADLINE_R_ALPHA: f64 = 0.075 * std::f64::consts::SQRT_2;
pub const SQUEEZED_ALPHA: f64 = 0.25;
pub const SQUEEZED_ZETA: f64 = -0.061;
pub const FIG3_ETAS: [f64; 5] = [0.6, 0.8, 0.9, 0.95, 1.0];
/// Relative tolerance of the `P⁽⁰⁾` series.
pub const P0_TOL: f64 = 1e-12;
/// Search range and grid size of the λ² optimisation.
pub const LAMBDA2_RANGE: (f64, f64) = (1e-6, 1e-1);
pub const LAMBDA2_GRID: usize = 200;

/// Parameter errors raised by core constructors are configuration errors.
pub fn param<T>(r: hybrid_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::config(e.to_string()))
}

fn sweep_values(s: &Settings, param: SweepParam, default: Sweep) -> CliResult<Vec<f64>> {
    match s.sweep {
        None => Ok(default.values()),
        Some(sw) if sw.param == param => Ok(sw.values()),
        Some(sw) => Err(CliError::config(format!(
            "{:?} sweeps {}, not {}",
            s.experiment,
            param.name(),
            sw.param.name()
        ))),
    }
}

fn r_alpha(s: &Settings, alpha: f64) -> f64 {
    s.r_alpha.or(s.r.map(|r| r * alpha)).unwrap_or(HEADLINE_R_ALPHA)
}

fn check_r_alphas(alpha: f64, ras: &[f64]) -> CliResult<()> {
    match ras.iter().find(|&&ra| !(ra >= 0.0 && ra <= alpha)) {
        Some(ra) => Err(CliError::config(format!("rα = {ra} needs 0 ≤ rα ≤ α = {alpha}"))),
        None => Ok(()),
    }
}

fn herald_name(h: HeraldKind) -> &'static str {
    match h {
        HeraldKind::Ideal => "ideal",
        HeraldKind::Simple => "simple",
    }
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Dense => "dense",
        Engine::Branch => "branch",
        Engine::Auto => "auto",
    }
}

/// Herald curves of the fig3/fig4 sweeps: one on-off curve per `η` and
/// the ideal herald.
fn curves(s: &Settings) -> Vec<(HeraldKind, f64)> {
    let etas: Vec<f64> = s.eta.map(|e| vec![e]).unwrap_or_else(|| FIG3_ETAS.to_vec());
    let mut c: Vec<(HeraldKind, f64)> = etas.into_iter().map(|e| (HeraldKind::Simple, e)).collect();
    c.push((HeraldKind::Ideal, 1.0));
    c
}

/// One curve point: herald, `η`, `rα`.
type Job = (HeraldKind, f64, f64);

fn sweep_jobs(s: &Settings, default: Sweep) -> CliResult<(f64, Vec<Job>)> {
    let alpha = s.alpha.unwrap_or(HEADLINE_ALPHA);
    let ras = sweep_values(s, SweepParam::RAlpha, default)?;
    check_r_alphas(alpha, &ras)?;
    let jobs = curves(s).into_iter().flat_map(|(h, e)| ras.iter().map(move |&ra| (h, e, ra))).collect();
    Ok((alpha, jobs))
}

fn network(alpha: f64, ra: f64, eta: f64, h: HeraldKind, engine: Engine) -> CliResult<NetworkConfig> {
    Ok(param(NetworkConfig::from_r_alpha(alpha, ra, eta))?.with_herald(h).with_engine(engine))
}

pub fn fig3_default_sweep() -> Sweep {
    Sweep { param: SweepParam::RAlpha, start: 0.01, stop: 1.5, count: 100, log: false }
}

pub fn fig3(s: &Settings) -> CliResult<Table> {
    let (alpha, jobs) = sweep_jobs(s, fig3_default_sweep())?;
    let rows = jobs
        .par_iter()
        .map(|&(h, eta, ra)| -> CliResult<Vec<Cell>> {
            let pt = param(OperatingPoint::from_r_alpha(alpha, ra, eta))?;
            let out = run(&network(alpha, ra, eta, h, s.engine)?)?;
            let (fa, pa) = match h {
                HeraldKind::Ideal => (1.0, p_ideal(&pt)),
                HeraldKind::Simple => (fidelity1(&pt), p1(&pt)),
            };
            Ok(vec![
                herald_name(h).into(),
                eta.into(),
                ra.into(),
                fa.into(),
                out.fidelity()?.into(),
                pa.into(),
                out.outcome.probability.into(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut t = Table::new(vec![
        "herald",
        "eta",
        "r_alpha",
        "fidelity_analytic",
        "fidelity_engine",
        "prob_analytic",
        "prob_engine",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// CV state left by projecting the DV qubit onto `(|1⟩_e + |1⟩_l)/√2`.
pub fn projected_cv(rho: &FockRegister) -> hybrid_core::Result<FockRegister> {
    let dv = dv_superposition(C64::new(1.0, 0.0), C64::new(1.0, 0.0))?;
    Ok(project_dv(rho, &dv, PROBABILITY_FLOOR)?.state)
}

pub fn fig4_default_sweep() -> Sweep {
    Sweep { param: SweepParam::RAlpha, start: 0.01, stop: 1.5, count: 50, log: false }
}

pub fn fig4(s: &Settings) -> CliResult<Table> {
    let (alpha, jobs) = sweep_jobs(s, fig4_default_sweep())?;
    let rows = jobs
        .par_iter()
        .map(|&(h, eta, ra)| -> CliResult<Vec<Cell>> {
            let pt = param(OperatingPoint::from_r_alpha(alpha, ra, eta))?;
            let out = run(&network(alpha, ra, eta, h, s.engine)?)?;
            let engine_state = out.outcome.state;
            let c = engine_state.cutoff(B)?;
            let analytic_state = match h {
                HeraldKind::Ideal => target_state(pt.alpha_f(), c).to_mixed(),
                HeraldKind::Simple => heralded_state_simple(&pt, c),
            };
            Ok(vec![
                herald_name(h).into(),
                eta.into(),
                ra.into(),
                wigner_negativity(&projected_cv(&analytic_state)?)?.into(),
                wigner_negativity(&projected_cv(&engine_state)?)?.into(),
                hybrid_npt(&analytic_state)?.into(),
                hybrid_npt(&engine_state)?.into(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut t = Table::new(vec![
        "herald",
        "eta",
        "r_alpha",
        "negativity_analytic",
        "negativity_engine",
        "npt_analytic",
        "npt_engine",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Pair-only source carrying the SPDC double-pair state, so the component
/// set can be reweighted for any λ².
fn spdc_components() -> DvSource {
    DvSource::TruncatedMultipair { p0: 0.0, p1: 1.0, p_eps: 0.0, eps: EpsilonState::spdc() }
}

pub fn fig5(s: &Settings) -> CliResult<Table> {
    let alpha = s.alpha.unwrap_or(HEADLINE_ALPHA);
    let ra = r_alpha(s, alpha);
    let eta = s.eta.unwrap_or(HEADLINE_ETA);
    let zeta = s.zeta.unwrap_or(SQUEEZED_ZETA);
    check_r_alphas(alpha.min(SQUEEZED_ALPHA), &[ra])?;
    let default = Sweep { param: SweepParam::Lambda2, start: 1e-5, stop: 1e-1, count: 100, log: true };
    let lambdas = sweep_values(s, SweepParam::Lambda2, default)?;
    if let Some(l) = lambdas.iter().find(|l| !(0.0..1.0).contains(*l)) {
        return Err(CliError::config(format!("λ² = {l} is outside [0, 1)")));
    }

    let pt = param(OperatingPoint::from_r_alpha(alpha, ra, eta))?;
    let cat = param(NetworkConfig::from_r_alpha(alpha, ra, eta))?.with_dv(spdc_components())?.with_engine(s.engine);
    let pt_s = param(OperatingPoint::from_r_alpha(SQUEEZED_ALPHA, ra, eta).and_then(|p| p.with_zeta(zeta)))?;
    let sq = param(NetworkConfig::from_r_alpha(SQUEEZED_ALPHA, ra, eta))?
        .with_dv(spdc_components())?
        .with_cv(CvInput::SqueezedVacuum { zeta })?
        .with_engine(s.engine);
    let (cat_set, sq_set) = rayon::join(|| component_set(&cat), || component_set(&sq));
    let (cat_set, sq_set) = (cat_set?, sq_set?);
    let p0 = p0_squeezed(zeta, pt_s.r, SQUEEZED_ALPHA, eta, P0_TOL)?.value;

    let rows = lambdas
        .par_iter()
        .map(|&l| -> CliResult<Vec<Cell>> {
            let (w, _) = spdc_multipair(l)?;
            let cat_out = cat_set.outcome(&w)?;
            let sq_out = sq_set.outcome(&w)?;
            Ok(vec![
                l.into(),
                w.p1.into(),
                fidelity_with_weights(&pt, &w).into(),
                cat_set.fidelity(&w)?.into(),
                total_probability(&pt, &w, 0.0).into(),
                cat_out.probability.into(),
                fidelity_squeezed_with_weights(&pt_s, &w, p0).into(),
                sq_set.fidelity(&w)?.into(),
                total_probability(&pt_s, &w, p0).into(),
                sq_out.probability.into(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut t = Table::new(vec![
        "lambda2",
        "p1_weight",
        "fidelity_multipair_analytic",
        "fidelity_multipair_engine",
        "prob_multipair_analytic",
        "prob_multipair_engine",
        "fidelity_squeezed_analytic",
        "fidelity_squeezed_engine",
        "prob_squeezed_analytic",
        "prob_squeezed_engine",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn fig2(s: &Settings) -> CliResult<Table> {
    let lc = s.lc_km.ok_or_else(|| CliError::config("fig2 needs --lc-km (birefringence correlation length)"))?;
    let alpha_f = s.alpha.unwrap_or(HEADLINE_ALPHA);
    let beta = s.beta_db_per_km;
    let default = Sweep { param: SweepParam::ZKm, start: 0.0, stop: 500.0, count: 101, log: false };
    let zs = sweep_values(s, SweepParam::ZKm, default)?;
    if let Some(z) = zs.iter().find(|z| z.is_nan() || **z < 0.0) {
        return Err(CliError::config(format!("z = {z} km is negative")));
    }
    let rows = zs
        .par_iter()
        .map(|&z| -> CliResult<Vec<Cell>> {
            Ok(vec![
                z.into(),
                remote_fidelity(Encoding::TimeBin, z, alpha_f)?.into(),
                remote::timebin(z, beta, alpha_f)?.into(),
                remote_fidelity(Encoding::SingleRail { beta_db_per_km: beta }, z, alpha_f)?.into(),
                remote::single_rail(z, beta, alpha_f)?.into(),
                remote_fidelity(Encoding::Polarization { lc_km: lc }, z, alpha_f)?.into(),
                remote::polarization(z, lc, alpha_f)?.into(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut t = Table::new(vec![
        "z_km",
        "fidelity_timebin_analytic",
        "fidelity_timebin_engine",
        "fidelity_single_rail_analytic",
        "fidelity_single_rail_engine",
        "fidelity_polarization_analytic",
        "fidelity_polarization_engine",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn point(s: &Settings) -> CliResult<Table> {
    if s.sweep.is_some() {
        return Err(CliError::config("point takes no sweep"));
    }
    match s.zeta {
        Some(zeta) => point_squeezed(s, zeta),
        None => point_cat(s),
    }
}

fn point_cat(s: &Settings) -> CliResult<Table> {
    let alpha = s.alpha.unwrap_or(HEADLINE_ALPHA);
    let ra = r_alpha(s, alpha);
    let eta = s.eta.unwrap_or(HEADLINE_ETA);
    check_r_alphas(alpha, &[ra])?;
    let pt = param(OperatingPoint::from_r_alpha(alpha, ra, eta))?;
    let mut cfg = param(NetworkConfig::from_r_alpha(alpha, ra, eta))?.with_engine(s.engine);
    let (fidelity, prob) = match s.lambda2 {
        Some(l) => {
            cfg = cfg.with_dv(DvSource::Spdc { lambda2: l })?;
            let (w, _) = spdc_multipair(l)?;
            (fidelity_with_weights(&pt, &w), total_probability(&pt, &w, 0.0))
        }
        None => (fidelity1(&pt), p1(&pt)),
    };
    let out = run(&cfg)?;
    let mut rec: Vec<(&'static str, Cell)> = vec![
        ("input", "cat".into()),
        ("alpha", alpha.into()),
        ("r", pt.r.into()),
        ("r_alpha", ra.into()),
        ("eta", eta.into()),
        ("alpha_f", pt.alpha_f().into()),
    ];
    if let Some(l) = s.lambda2 {
        rec.push(("lambda2", l.into()));
    }
    rec.extend([
        ("fidelity", fidelity.into()),
        ("fidelity_engine", out.fidelity()?.into()),
        ("herald_prob", prob.into()),
        ("herald_prob_engine", out.outcome.probability.into()),
        ("p1", p1(&pt).into()),
        ("p2", p2(&pt).into()),
        ("p_ideal", p_ideal(&pt).into()),
        ("engine", engine_name(out.diagnostics.engine).into()),
    ]);
    if let Some(n) = out.diagnostics.branch_count {
        rec.push(("branch_count", n.into()));
    }
    Ok(Table::record(rec))
}

fn point_squeezed(s: &Settings, zeta: f64) -> CliResult<Table> {
    let alpha = s.alpha.unwrap_or(SQUEEZED_ALPHA);
    let ra = r_alpha(s, alpha);
    let eta = s.eta.unwrap_or(HEADLINE_ETA);
    check_r_alphas(alpha, &[ra])?;
    let pt = param(OperatingPoint::from_r_alpha(alpha, ra, eta).and_then(|p| p.with_zeta(zeta)))?;
    let series = p0_squeezed(zeta, pt.r, alpha, eta, P0_TOL)?;
    let (lambda2, optimized) = match s.lambda2 {
        Some(l) => (l, false),
        None => (squeezed_optimum(&pt, series.value, LAMBDA2_RANGE.0, LAMBDA2_RANGE.1, LAMBDA2_GRID)?.lambda2, true),
    };
    let cfg = param(NetworkConfig::from_r_alpha(alpha, ra, eta))?
        .with_dv(spdc_components())?
        .with_cv(CvInput::SqueezedVacuum { zeta })?
        .with_engine(s.engine);
    let set = component_set(&cfg)?;
    let (w, _) = spdc_multipair(lambda2)?;
    let out = set.outcome(&w)?;
    let [e0, e1, e2] = set.probabilities();
    Ok(Table::record(vec![
        ("input", "squeezed".into()),
        ("alpha", alpha.into()),
        ("zeta", zeta.into()),
        ("r", pt.r.into()),
        ("r_alpha", ra.into()),
        ("eta", eta.into()),
        ("alpha_f", pt.alpha_f().into()),
        ("lambda2", lambda2.into()),
        ("lambda2_optimized", optimized.into()),
        ("p1_weight", w.p1.into()),
        ("fidelity", fidelity_squeezed_with_weights(&pt, &w, series.value).into()),
        ("fidelity_engine", set.fidelity(&w)?.into()),
        ("herald_prob", total_probability(&pt, &w, series.value).into()),
        ("herald_prob_engine", out.probability.into()),
        ("p0", series.value.into()),
        ("p0_engine", e0.into()),
        ("p0_terms", series.terms.into()),
        ("p0_tail_bound", series.tail_bound.into()),
        ("p1", p1(&pt).into()),
        ("p1_engine", e1.into()),
        ("p2", p2(&pt).into()),
        ("p2_engine", e2.into()),
    ]))
}

pub fn wigner_field(s: &Settings) -> CliResult<Table> {
    if s.sweep.is_some() {
        return Err(CliError::config("wigner takes no sweep"));
    }
    let alpha = s.alpha.unwrap_or(HEADLINE_ALPHA);
    let ra = r_alpha(s, alpha);
    let eta = s.eta.unwrap_or(HEADLINE_ETA);
    check_r_alphas(alpha, &[ra])?;
    let cfg = network(alpha, ra, eta, HeraldKind::Simple, s.engine)?;
    let alpha_f = cfg.alpha_f();
    let extent = s.grid_extent.unwrap_or(alpha_f.abs() + 4.0);
    let n = s.grid_points.unwrap_or(hybrid_core::metrics::MIN_GRID_POINTS);
    let grid = param(PhaseSpaceGrid::new(extent, extent, n, n))?;
    let rho = match s.wigner_state {
        WignerState::Vacuum => FockRegister::single_mode(B, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        WignerState::Ideal => projected_cv(&target_state(alpha_f, remote::cv_cutoff(alpha_f)).to_mixed())?,
        WignerState::Heralded => projected_cv(&run(&cfg)?.outcome.state)?,
    };
    let field = wigner(&rho, &grid)?;
    let mut t = Table::new(vec!["x", "p", "W"]);
    for (i, x) in field.xs.iter().enumerate() {
        for (j, p) in field.ps.iter().enumerate() {
            t.push(vec![(*x).into(), (*p).into(), field.values[i * field.ps.len() + j].into()]);
        }
    }
    Ok(t)
}
