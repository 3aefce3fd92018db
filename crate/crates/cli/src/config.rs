use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use hybrid_core::scheme::Engine;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Remote preparation fidelity against fibre length.
    Fig2,
    /// Fidelity and herald probability against rα.
    Fig3,
    /// Wigner negativity and NPT against rα.
    Fig4,
    /// Fidelities against the SPDC excitation λ².
    Fig5,
    /// Single operating point.
    Point,
    /// Analytic formulas against the engines.
    Verify,
    /// Wigner function of the projected CV state on a grid.
    Wigner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineArg {
    Dense,
    Branch,
    Auto,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Dense => Engine::Dense,
            EngineArg::Branch => Engine::Branch,
            EngineArg::Auto => Engine::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WignerState {
    /// Engine output projected onto the balanced time-bin superposition.
    Heralded,
    /// Same projection of the target state.
    Ideal,
    Vacuum,
}

/// Simulator for heralded time-bin / coherent-state hybrid entanglement.
#[derive(Debug, Default, Parser)]
#[command(name = "hybrid", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Cat amplitude at the network input.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// BS1 reflection coefficient.
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Alternative to --r: the product rα.
    #[arg(long, allow_negative_numbers = true)]
    pub r_alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Squeezing parameter of the CV input; switches to squeezed vacuum.
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda2: Option<f64>,
    /// Birefringence correlation length (km). Required by fig2.
    #[arg(long, allow_negative_numbers = true)]
    pub lc_km: Option<f64>,
    /// Fibre attenuation (dB/km) [default: 0.2].
    #[arg(long, allow_negative_numbers = true)]
    pub beta_db_per_km: Option<f64>,
    /// param:start:stop:count:lin|log
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Flat JSON object with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// verify: also write the default fig3 table to this path.
    #[arg(long)]
    pub golden: Option<PathBuf>,
    /// wigner: points per axis (odd, at least 101).
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// wigner: half-width of both axes [default: |α_f| + 4].
    #[arg(long)]
    pub grid_extent: Option<f64>,
    #[arg(long, value_enum)]
    pub wigner_state: Option<WignerState>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<Experiment>,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
    pub r_alpha: Option<f64>,
    pub eta: Option<f64>,
    pub zeta: Option<f64>,
    pub lambda2: Option<f64>,
    pub lc_km: Option<f64>,
    pub beta_db_per_km: Option<f64>,
    pub sweep: Option<String>,
    pub engine: Option<EngineArg>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub golden: Option<PathBuf>,
    pub grid_points: Option<usize>,
    pub grid_extent: Option<f64>,
    pub wigner_state: Option<WignerState>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    RAlpha,
    Lambda2,
    ZKm,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::RAlpha => "r_alpha",
            SweepParam::Lambda2 => "lambda2",
            SweepParam::ZKm => "z_km",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl Sweep {
    pub fn new(param: SweepParam, start: f64, stop: f64, count: usize, log: bool) -> CliResult<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(CliError::config("sweep endpoints must be finite"));
        }
        if count < 2 {
            return Err(CliError::config("sweep count must be at least 2"));
        }
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(CliError::config("log sweeps need positive endpoints"));
        }
        Ok(Self { param, start, stop, count, log })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 5 {
            return Err(CliError::config(format!("sweep {text:?} is not param:start:stop:count:lin|log")));
        }
        let param = match parts[0] {
            "r_alpha" => SweepParam::RAlpha,
            "lambda2" => SweepParam::Lambda2,
            "z_km" => SweepParam::ZKm,
            p => return Err(CliError::config(format!("unknown sweep parameter {p:?}"))),
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::config(format!("bad sweep number {s:?}")));
        let count = parts[3].parse::<usize>().map_err(|_| CliError::config(format!("bad sweep count {:?}", parts[3])))?;
        let log = match parts[4] {
            "lin" => false,
            "log" => true,
            s => return Err(CliError::config(format!("sweep scale must be lin or log, got {s:?}"))),
        };
        Self::new(param, num(parts[1])?, num(parts[2])?, count, log)
    }

    /// Sample points; both endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        let (a, b) = if self.log { (self.start.ln(), self.stop.ln()) } else { (self.start, self.stop) };
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n - 1 {
                    return self.stop;
                }
                let x = a + (b - a) * i as f64 / (n - 1) as f64;
                if self.log {
                    x.exp()
                } else {
                    x
                }
            })
            .collect()
    }
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub experiment: Experiment,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
    pub r_alpha: Option<f64>,
    pub eta: Option<f64>,
    pub zeta: Option<f64>,
    pub lambda2: Option<f64>,
    pub lc_km: Option<f64>,
    pub beta_db_per_km: f64,
    pub sweep: Option<Sweep>,
    pub engine: Engine,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub golden: Option<PathBuf>,
    pub grid_points: Option<usize>,
    pub grid_extent: Option<f64>,
    pub wigner_state: WignerState,
}

pub const DEFAULT_BETA_DB_PER_KM: f64 = 0.2;

impl Settings {
    pub fn resolve(args: Args) -> CliResult<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let experiment = args
            .experiment
            .or(file.experiment)
            .ok_or_else(|| CliError::config("no experiment given (--experiment or \"experiment\" in the config file)"))?;
        let sweep = args.sweep.or(file.sweep).map(|s| Sweep::parse(&s)).transpose()?;
        let format = args.format.or(file.format).unwrap_or(match experiment {
            Experiment::Point => Format::Json,
            _ => Format::Csv,
        });
        let s = Settings {
            experiment,
            alpha: args.alpha.or(file.alpha),
            r: args.r.or(file.r),
            r_alpha: args.r_alpha.or(file.r_alpha),
            eta: args.eta.or(file.eta),
            zeta: args.zeta.or(file.zeta),
            lambda2: args.lambda2.or(file.lambda2),
            lc_km: args.lc_km.or(file.lc_km),
            beta_db_per_km: args.beta_db_per_km.or(file.beta_db_per_km).unwrap_or(DEFAULT_BETA_DB_PER_KM),
            sweep,
            engine: args.engine.or(file.engine).unwrap_or(EngineArg::Auto).into(),
            out: args.out.or(file.out),
            format,
            golden: args.golden.or(file.golden),
            grid_points: args.grid_points.or(file.grid_points),
            grid_extent: args.grid_extent.or(file.grid_extent),
            wigner_state: args.wigner_state.or(file.wigner_state).unwrap_or(WignerState::Heralded),
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> CliResult<()> {
        let finite = [
            ("alpha", self.alpha),
            ("r", self.r),
            ("r-alpha", self.r_alpha),
            ("eta", self.eta),
            ("zeta", self.zeta),
            ("lambda2", self.lambda2),
            ("lc-km", self.lc_km),
            ("beta-db-per-km", Some(self.beta_db_per_km)),
            ("grid-extent", self.grid_extent),
        ];
        for (name, v) in finite {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(CliError::config(format!("--{name} must be finite")));
                }
            }
        }
        if self.r.is_some() && self.r_alpha.is_some() {
            return Err(CliError::config("give --r or --r-alpha, not both"));
        }
        if let Some(a) = self.alpha {
            if a <= 0.0 {
                return Err(CliError::config("--alpha must be positive"));
            }
        }
        if let Some(e) = self.eta {
            if !(e > 0.0 && e <= 1.0) {
                return Err(CliError::config("--eta must lie in (0, 1]"));
            }
        }
        if let Some(l) = self.lambda2 {
            if !(0.0..1.0).contains(&l) {
                return Err(CliError::config("--lambda2 must lie in [0, 1)"));
            }
        }
        if let Some(l) = self.lc_km {
            if l <= 0.0 {
                return Err(CliError::config("--lc-km must be positive"));
            }
        }
        if self.beta_db_per_km < 0.0 {
            return Err(CliError::config("--beta-db-per-km must be non-negative"));
        }
        if let Some(n) = self.grid_points {
            if n % 2 == 0 {
                return Err(CliError::config("--grid-points must be odd so the origin is on the grid"));
            }
        }
        Ok(())
    }
}
