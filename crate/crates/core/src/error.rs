use crate::fock::ModeLabel;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Amplitude mass lost to the Fock cutoff exceeds the configured tolerance.
    #[error("truncation deficit {deficit:e} exceeds tolerance {tolerance:e}")]
    Truncation { deficit: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown mode {0}")]
    UnknownMode(ModeLabel),

    #[error("mode {0} appears more than once")]
    DuplicateMode(ModeLabel),

    #[error("registers have different mode lists or cutoffs")]
    ModeMismatch,

    #[error("partial trace must keep at least one mode")]
    EmptyKeep,

    #[error("operation requires a {expected} register")]
    WrongKind { expected: &'static str },

    #[error("parameter {name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("beam splitter with r = {r}, t = {t} is not unitary")]
    NotUnitary { r: f64, t: f64 },

    #[error("state needs {needed} branch terms, limit is {limit}")]
    BranchLimit { needed: usize, limit: usize },

    #[error("dense tensor of {needed} amplitudes exceeds budget of {budget}")]
    MemoryBudget { needed: usize, budget: usize },

    #[error("heralding probability {probability:e} is below the floor")]
    DegenerateOutcome { probability: f64 },

    #[error("heralding strategy needs mode {0}, which the state does not carry")]
    MissingMode(ModeLabel),

    #[error("series did not certify its tail after {terms} terms")]
    NonConvergence { terms: usize },

    #[error("empty window: lower bound {lower:e} >= upper bound {upper:e}")]
    EmptyWindow { lower: f64, upper: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("phase-space grid too coarse: integral of W is {integral}")]
    GridTooCoarse { integral: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("operating point lacks parameter {0}")]
    MissingParameter(&'static str),

    #[error("engine cannot represent this configuration: {0}")]
    Capability(&'static str),
}
