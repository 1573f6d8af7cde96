use thiserror::Error;

use crate::param::ParamId;
use crate::service::ServiceId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("service {0} has no input parameters")]
    EmptyInputs(ServiceId),
    #[error("service {service} lists parameter {param} more than once")]
    DuplicateParameter { service: ServiceId, param: ParamId },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("duplicate service id {0}")]
    DuplicateService(ServiceId),
    #[error("key {key} is not an input of service {service}")]
    KeyNotInInputs { service: ServiceId, key: ParamId },
    #[error("operation requires input-similar classes, unavailable in primary mode")]
    PrimaryMode,
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("least-used selection requires a probability table")]
    MissingTable,
    #[error("probability table has no entry for parameter {0}")]
    MissingEntry(ParamId),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("probability for parameter {param} is {value}, outside [0, 1]")]
    OutOfRange { param: ParamId, value: f64 },
    #[error("no probability given for parameter {0}")]
    Uncovered(ParamId),
    #[error("parameter {param} lies outside a universe of size {q}")]
    OutsideUniverse { param: ParamId, q: u32 },
    #[error("theoretical probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("{sizes} class sizes but {probs} probabilities")]
    LengthMismatch { sizes: usize, probs: usize },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("invalid value {value} at position {index}")]
    InvalidValue { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkloadError {
    #[error("parameter universe must be non-empty")]
    EmptyUniverse,
    #[error("slope must be finite")]
    NonFiniteSlope,
    #[error("{what} ({size}) exceeds the {support} parameters that can be drawn")]
    SetTooLarge {
        what: &'static str,
        size: usize,
        support: usize,
    },
}
