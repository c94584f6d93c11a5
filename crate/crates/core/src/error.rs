use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible calibration target: {0}")]
    Infeasible(String),
    #[error("norm drift {drift:.3e} at t = {time:.3} exceeds tolerance; reduce the step (currently h = {step:.3e})")]
    NormDrift { drift: f64, time: f64, step: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
