use thiserror::Error;

/// Errors shared across the simulation and estimation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// The per-day infection probability a*N2/n left [0, 1]. Never clamped:
    /// a silent clamp would corrupt every likelihood comparison downstream.
    #[error("infection probability {value} outside [0, 1] (a = {a}, n2 = {n2}, n = {n})")]
    InvalidProbability { value: f64, a: f64, n2: u64, n: u64 },

    #[error("inconsistent counts: {0}")]
    InconsistentCounts(String),

    #[error("root not found: {0}")]
    RootNotFound(String),

    #[error("not estimable: {0}")]
    NotEstimable(String),

    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("size guard exceeded: n = {n} > {limit}")]
    SizeGuard { n: u64, limit: u64 },

    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
