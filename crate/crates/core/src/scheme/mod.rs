//! The generation network: a cat (or squeezed vacuum) split on BS1, mixed
//! with a coherent injection on BS2, mapped to time bins by the
//! Mach-Zehnder arms, and interfered with one photon of a time-bin pair on
//! BS3 to BS6 in front of eight detectors.
//!
//! Two routes evaluate it. [`network`] runs every element in the branch
//! engine. [`split`] runs the dense engine on a factored register: the
//! kept modes are compressed into one ancilla index and the early and late
//! halves of the detection network evolve separately.

mod network;
mod split;

use alloc::vec::Vec;

pub use network::{branch_state, bin_modes, dv_polynomial};
pub use split::{split_state, SplitState};

use crate::analytic::target_state;
use crate::branch::{BranchState, DEFAULT_BRANCH_LIMIT};
use crate::detectors::{ideal_herald, normalize_outcome, simple_herald, HeraldOutcome, HeraldStrategy, PROBABILITY_FLOOR};
use crate::fock::{FockRegister, TruncationPolicy};
use crate::labels::{A_E, A_L, B, KEPT_MODES};
use crate::linalg::ONE;
use crate::sources::{CvSource, DvComponent, DvSource, SourceWeights};
use crate::{math, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeraldKind {
    /// Photon-number-resolving detection on all eight modes.
    Ideal,
    /// On-off clicks on `(E, l)` and `(F, e)` only.
    Simple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Dense,
    Branch,
    Auto,
}

/// State entering BS1 on mode 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CvInput {
    /// Even cat of amplitude `α`.
    Cat,
    SqueezedVacuum { zeta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub alpha: f64,
    /// BS1 reflection.
    pub r: f64,
    pub eta: f64,
    pub dv: DvSource,
    pub cv: CvInput,
    pub herald: HeraldKind,
    pub engine: Engine,
    pub policy: TruncationPolicy,
    pub branch_limit: usize,
}

impl NetworkConfig {
    /// Ideal pair, cat input, on-off herald, automatic engine.
    pub fn new(alpha: f64, r: f64, eta: f64) -> Result<Self> {
        let cfg = Self {
            alpha,
            r,
            eta,
            dv: DvSource::IdealPair,
            cv: CvInput::Cat,
            herald: HeraldKind::Simple,
            engine: Engine::Auto,
            policy: TruncationPolicy::default(),
            branch_limit: DEFAULT_BRANCH_LIMIT,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_r_alpha(alpha: f64, r_alpha: f64, eta: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::OutOfRange { name: "alpha", value: alpha });
        }
        Self::new(alpha, r_alpha / alpha, eta)
    }

    pub fn with_dv(mut self, dv: DvSource) -> Result<Self> {
        dv.validate()?;
        self.dv = dv;
        Ok(self)
    }

    pub fn with_cv(mut self, cv: CvInput) -> Result<Self> {
        self.cv = cv;
        self.validate()?;
        Ok(self)
    }

    pub fn with_herald(mut self, herald: HeraldKind) -> Self {
        self.herald = herald;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_branch_limit(mut self, limit: usize) -> Self {
        self.branch_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::OutOfRange { name: "alpha", value: self.alpha });
        }
        for (name, v) in [("r", self.r), ("eta", self.eta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange { name, value: v });
            }
        }
        self.cv_source().validate()?;
        self.dv.validate()
    }

    pub fn t(&self) -> f64 {
        math::sqrt(1.0 - self.r * self.r)
    }

    pub fn r_alpha(&self) -> f64 {
        self.r * self.alpha
    }

    /// Amplitude of the CV qubit, `tα`.
    pub fn alpha_f(&self) -> f64 {
        self.t() * self.alpha
    }

    pub fn cv_source(&self) -> CvSource {
        match self.cv {
            CvInput::Cat => CvSource::CatPlus(self.alpha),
            CvInput::SqueezedVacuum { zeta } => CvSource::SqueezedVacuum(zeta),
        }
    }

    pub fn strategy(&self) -> Result<HeraldStrategy> {
        match self.herald {
            HeraldKind::Ideal => Ok(ideal_herald()),
            HeraldKind::Simple => simple_herald(self.eta),
        }
    }

    /// Expanded branch terms summed over the source components, or `None`
    /// when the CV input has no branch form.
    pub fn branch_count(&self) -> Result<Option<usize>> {
        if matches!(self.cv, CvInput::SqueezedVacuum { .. }) {
            return Ok(None);
        }
        let mut n = 0;
        for (c, _) in self.dv.components()? {
            n += branch_state(self, c)?.term_count();
        }
        Ok(Some(n))
    }

    /// Engine actually used: `auto` picks the branch engine unless the CV
    /// input is squeezed or the expansion exceeds the branch limit.
    pub fn resolved_engine(&self) -> Result<Engine> {
        Ok(match self.engine {
            Engine::Auto => match self.branch_count()? {
                Some(n) if n <= self.branch_limit => Engine::Branch,
                _ => Engine::Dense,
            },
            e => e,
        })
    }
}

/// State in front of the detectors for one DV component.
#[derive(Debug, Clone)]
pub enum PreDetection {
    Branch(BranchState),
    Split(SplitState),
}

pub fn pre_detection_state(cfg: &NetworkConfig, component: DvComponent) -> Result<PreDetection> {
    cfg.validate()?;
    match cfg.resolved_engine()? {
        Engine::Branch => Ok(PreDetection::Branch(branch_state(cfg, component)?)),
        _ => Ok(PreDetection::Split(split_state(cfg, component)?)),
    }
}

/// Unnormalised conditional state `Tr_det[Π ρ]` on `(A_e, A_l, B)` for one
/// component, in the canonical mode order.
pub fn component_operator(cfg: &NetworkConfig, component: DvComponent, strategy: &HeraldStrategy) -> Result<FockRegister> {
    let rho = match pre_detection_state(cfg, component)? {
        PreDetection::Branch(s) => s.expectation(strategy, &cfg.policy)?.0,
        PreDetection::Split(s) => s.herald_operator(strategy)?,
    };
    rho.permuted(&KEPT_MODES)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentResult {
    pub component: DvComponent,
    pub weight: f64,
    /// Herald probability of this component alone.
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub alpha_f: f64,
    pub engine: Engine,
    pub branch_count: Option<usize>,
    pub components: Vec<ComponentResult>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub outcome: HeraldOutcome,
    pub diagnostics: Diagnostics,
}

impl RunOutcome {
    /// Target state at the outcome's cutoffs.
    pub fn target(&self) -> Result<FockRegister> {
        target_like(&self.outcome.state, self.diagnostics.alpha_f)
    }

    pub fn fidelity(&self) -> Result<f64> {
        crate::metrics::fidelity(&self.outcome.state, &self.target()?)
    }
}

/// Target `|φ⟩` with amplitude `alpha_f`, padded to the cutoffs of `rho`.
pub fn target_like(rho: &FockRegister, alpha_f: f64) -> Result<FockRegister> {
    let rho_b = rho.cutoff(B)?;
    let mut phi = target_state(alpha_f, rho_b);
    for m in [A_E, A_L] {
        phi = phi.with_cutoff(m, rho.cutoff(m)?)?;
    }
    phi.permuted(rho.modes())
}

/// Sum of weighted operators, padded to common cutoffs.
fn mix(parts: Vec<(f64, FockRegister)>) -> Result<FockRegister> {
    let mut cut = [0usize; 3];
    for (_, r) in &parts {
        for (c, rc) in cut.iter_mut().zip(r.cutoffs()) {
            *c = (*c).max(*rc);
        }
    }
    let mut acc: Option<FockRegister> = None;
    for (w, r) in parts {
        let mut r = r;
        for (m, c) in KEPT_MODES.iter().zip(cut) {
            r = r.with_cutoff(*m, c)?;
        }
        let r = r.scaled(C64::new(w, 0.0));
        acc = Some(match acc {
            None => r,
            Some(a) => {
                let data: Vec<C64> = a.data().iter().zip(r.data()).map(|(x, y)| x + y).collect();
                FockRegister::from_density(KEPT_MODES.to_vec(), cut.to_vec(), data)?
            }
        });
    }
    acc.ok_or(Error::EmptyKeep)
}

/// Run the network and herald. Source components are mixed
/// incoherently with their weights.
pub fn run(cfg: &NetworkConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let strategy = cfg.strategy()?;
    let engine = cfg.resolved_engine()?;
    let cfg_resolved = cfg.clone().with_engine(engine);
    let mut parts = Vec::new();
    let mut components = Vec::new();
    for (c, w) in cfg.dv.components()? {
        let rho = component_operator(&cfg_resolved, c, &strategy)?;
        let p = rho.trace().re;
        components.push(ComponentResult { component: c, weight: w, probability: p });
        parts.push((w, rho));
    }
    let rho = mix(parts)?;
    let outcome = normalize_outcome(rho, PROBABILITY_FLOOR)?;
    Ok(RunOutcome {
        outcome,
        diagnostics: Diagnostics {
            alpha_f: cfg.alpha_f(),
            engine,
            branch_count: cfg.branch_count()?,
            components,
        },
    })
}

/// Herald probabilities of the vacuum, pair and multipair components run
/// alone, with the source weights and their combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentProbabilities {
    pub p0: f64,
    pub p1: f64,
    pub p_eps: f64,
    pub weights: SourceWeights,
    /// `Σ p_i P⁽ⁱ⁾`.
    pub combined: f64,
}

pub fn heralded_component_probabilities(cfg: &NetworkConfig) -> Result<ComponentProbabilities> {
    let set = component_set(cfg)?;
    let weights = cfg.dv.weights()?;
    let [p0, p1, p_eps] = set.probabilities();
    let combined = weights.p0 * p0 + weights.p1 * p1 + weights.p_eps * p_eps;
    Ok(ComponentProbabilities { p0, p1, p_eps, weights, combined })
}

/// Unnormalised conditional operators of the vacuum, pair and multipair
/// components, each run alone. Any source weights can then be mixed in
/// without rerunning the network.
#[derive(Debug, Clone)]
pub struct ComponentSet {
    pub alpha_f: f64,
    pub operators: [FockRegister; 3],
}

impl ComponentSet {
    pub fn probabilities(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.operators[i].trace().re)
    }

    pub fn outcome(&self, w: &SourceWeights) -> Result<HeraldOutcome> {
        let parts = [w.p0, w.p1, w.p_eps].into_iter().zip(self.operators.iter().cloned()).collect();
        normalize_outcome(mix(parts)?, PROBABILITY_FLOOR)
    }

    pub fn fidelity(&self, w: &SourceWeights) -> Result<f64> {
        let out = self.outcome(w)?;
        crate::metrics::fidelity(&out.state, &target_like(&out.state, self.alpha_f)?)
    }
}

pub fn component_set(cfg: &NetworkConfig) -> Result<ComponentSet> {
    cfg.validate()?;
    let strategy = cfg.strategy()?;
    let all = [DvComponent::Vacuum, DvComponent::Pair, DvComponent::Multipair];
    let mut ops = Vec::with_capacity(3);
    for c in all {
        let single = NetworkConfig { dv: single_component_source(cfg, c), ..cfg.clone() };
        let engine = single.resolved_engine()?;
        ops.push(component_operator(&single.with_engine(engine), c, &strategy)?);
    }
    let operators: [FockRegister; 3] = ops.try_into().map_err(|_| Error::EmptyKeep)?;
    Ok(ComponentSet { alpha_f: cfg.alpha_f(), operators })
}

/// Source emitting only `c`, with the epsilon state of `cfg.dv`.
fn single_component_source(cfg: &NetworkConfig, c: DvComponent) -> DvSource {
    let eps = cfg.dv.epsilon_state();
    let (p0, p1, p_eps) = match c {
        DvComponent::Vacuum => (1.0, 0.0, 0.0),
        DvComponent::Pair => (0.0, 1.0, 0.0),
        DvComponent::Multipair => (0.0, 0.0, 1.0),
    };
    DvSource::TruncatedMultipair { p0, p1, p_eps, eps }
}

/// `⟨branch|dense⟩ / (‖branch‖‖dense‖)` for one component of a cat-input
/// network.
pub fn engine_overlap(cfg: &NetworkConfig, component: DvComponent) -> Result<C64> {
    let b = branch_state(&cfg.clone().with_branch_limit(usize::MAX), component)?;
    let s = split_state(cfg, component)?;
    let ov = s.overlap_with_branch(&b)?;
    let nb = b.norm_sqr(&cfg.policy)?;
    let nd = s.norm_sqr()?;
    Ok(ov / math::sqrt(nb * nd))
}

/// Unit-modulus check helper used by the tests and the CLI.
pub fn overlap_defect(ov: C64) -> f64 {
    (ov - ONE).norm()
}
