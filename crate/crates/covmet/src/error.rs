//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("map is not CPTP: {0}")]
    NotCptp(String),
    #[error("map is not invertible at t = {t}")]
    SingularMap { t: f64 },
    #[error("mixing probability {p} outside the admissible range [{lo}, {hi}]")]
    MixingOutOfRange { p: f64, lo: f64, hi: f64 },
    #[error("empty mixing range [{lo}, {hi}]")]
    EmptyMixingRange { lo: f64, hi: f64 },
    #[error("short-time expansion violates the CPTP constraints: {0}")]
    InvalidExpansion(String),
    #[error("degenerate GHZ denominator")]
    DegenerateDenominator,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid search bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(name))
    }
}
