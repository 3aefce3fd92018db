//! Experiment runner for the hybrid entanglement simulator: figure sweeps,
//! single operating points, Wigner grids and the analytic-vs-engine
//! verification battery.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod remote;
pub mod verify;

use config::{Experiment, Settings};
use error::{CliError, CliResult};
use output::{write_output, Table};

pub fn build_table(s: &Settings) -> CliResult<Table> {
    match s.experiment {
        Experiment::Fig2 => experiments::fig2(s),
        Experiment::Fig3 => experiments::fig3(s),
        Experiment::Fig4 => experiments::fig4(s),
        Experiment::Fig5 => experiments::fig5(s),
        Experiment::Point => experiments::point(s),
        Experiment::Wigner => experiments::wigner_field(s),
        Experiment::Verify => Ok(verify::table(&verify::checks()?)),
    }
}

/// Default fig3 table, the regression reference written by `verify --golden`.
pub fn golden_fig3() -> CliResult<Table> {
    let s = Settings::resolve(config::Args {
        experiment: Some(Experiment::Fig3),
        ..Default::default()
    })?;
    experiments::fig3(&s)
}

pub fn execute(s: &Settings) -> CliResult<()> {
    if s.experiment != Experiment::Verify {
        let t = build_table(s)?;
        return write_output(&t.render(s.format)?, s.out.as_deref());
    }
    if s.sweep.is_some() {
        return Err(CliError::config("verify takes no sweep"));
    }
    let checks = verify::checks()?;
    write_output(&verify::table(&checks).render(s.format)?, s.out.as_deref())?;
    verify::print_summary(&checks, std::io::stderr().lock())?;
    if let Some(p) = &s.golden {
        write_output(&golden_fig3()?.to_csv()?, Some(p))?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::Verify { failed, total: checks.len() });
    }
    Ok(())
}
