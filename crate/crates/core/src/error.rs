//! Error type shared across the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight sequence: {0}")]
    InvalidWeight(String),
    #[error("associated function maximizer hit the materialized range (p_max = {p_max}) at t = {t}")]
    ExtensionLimit { p_max: usize, t: f64 },
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("growth fit needs at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("non-positive sample value in growth fit")]
    NonPositiveSample,
    #[error("monotone inversion failed to bracket {target}")]
    InversionBracket { target: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("unresolved spectrum: tail fraction {tail:.3e} exceeds {limit:.3e}")]
    UnresolvedSpectrum { tail: f64, limit: f64 },
    #[error("coefficient fails the regime class check: {0}")]
    ClassViolation(String),
    #[error("differential order {order} exceeds the configured cap {cap}")]
    OrderCap { order: usize, cap: usize },
    #[error("cover/partition mismatch: {0}")]
    CoverMismatch(String),
    #[error("incompatible sections: {0}")]
    Incompatible(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
