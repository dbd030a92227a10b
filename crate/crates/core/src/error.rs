use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate mode label `{0}`")]
    LabelCollision(String),
    #[error("unknown mode label `{0}`")]
    UnknownLabel(String),
    #[error("mode `{0}` is not a photon mode")]
    NotPhotonMode(String),
    #[error("Hilbert dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("invalid truncation for mode `{label}`: {reason}")]
    Truncation { label: String, reason: String },
    #[error("beam splitter output exceeds truncation n_max = {n_max} in modes `{a}`/`{b}`")]
    TruncationOverflow { a: String, b: String, n_max: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("two-photon population must vanish for this construction (p2 = {0})")]
    TwoPhotonPopulation(f64),
    #[error("entrance-splitter convention mismatch: {0}")]
    ConventionMismatch(String),
    #[error("frequency grid too coarse: {points_per_fringe:.2} points per fringe (need >= 8)")]
    GridTooCoarse { points_per_fringe: f64 },
    #[error("frequency grid spans {periods:.2} fringe periods (need >= {required})")]
    GridTooNarrow { periods: f64, required: f64 },
    #[error("divergent limit: p1 = {0} is too small for a finite filtered g2")]
    DivergentLimit(f64),
    #[error("oracle only covers indistinguishable photons (M = {m}, M' = {m_prime})")]
    OracleRequiresIdealPhotons { m: f64, m_prime: f64 },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("zero total counts in bin {0}")]
    ZeroCountBin(usize),
    #[error("zero baseline")]
    ZeroBaseline,
    #[error("max lag of {max_lag} slots exceeds the run length of {n_slots} slots")]
    LagExceedsDuration { max_lag: u64, n_slots: u64 },
    #[error("invalid simulation config: {0}")]
    SimConfig(String),
    #[error("fit precondition violated: {0}")]
    FitPrecondition(String),
    #[error("fit did not converge after {starts} starts")]
    NonConvergence { starts: usize },
    #[error("value {0} is outside the model range")]
    OutOfModelRange(f64),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error at row {row}: {reason}")]
    Parse { row: usize, reason: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.position() {
            Some(pos) => Error::Parse {
                row: pos.line() as usize,
                reason: e.to_string(),
            },
            None => Error::Io(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("{v} not in [0, 1]"),
        });
    }
    Ok(())
}
