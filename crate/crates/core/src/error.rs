use thiserror::Error;

/// Errors raised by the receiver model, the numerical kernel and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no sign change across bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("invalid bracket [{lo}, {hi}]: need finite lo < hi")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("start point {index} does not lie in the open simplex of dimension {dim}")]
    BadStart { index: usize, dim: usize },

    #[error("Poisson mean must be finite and non-negative, got {0}")]
    NegativeMean(f64),

    #[error("segment count must be at least 1, got {0}")]
    InvalidN(usize),

    #[error("mean photon number must be finite and non-negative, got {0}")]
    NegativeEnergy(f64),

    #[error("invalid device parameter {name} = {value}")]
    InvalidDevice { name: &'static str, value: f64 },

    #[error("invalid priors p0 = {p0}, p1 = {p1}")]
    InvalidPriors { p0: f64, p1: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("optimal displacement undefined for degenerate priors p0 = {0}")]
    DegeneratePriors(f64),

    #[error("segment amplitude {0} is below the drop threshold")]
    DegenerateSignal(f64),

    #[error("probabilities must be strictly positive, got pe = {pe}, p_sql = {p_sql}")]
    NonPositiveProbability { pe: f64, p_sql: f64 },

    #[error("trial count must be at least 1")]
    ZeroTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
