use thiserror::Error;

use crate::weights::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not elliptic: min a(x) = {min_a} must be > 0")]
    NonElliptic { min_a: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("truncation order {n_modes} exceeds interior node count {interior}")]
    TruncationTooLarge { n_modes: usize, interior: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("ill-posed weight ({0})")]
    IllPosedWeight(Violation),

    #[error("theta = {theta} must be < T = {horizon} when kappa != 0")]
    ThetaInvalid { theta: f64, horizon: f64 },

    #[error("multiplier bound violated at mode {k}: {detail}")]
    BoundViolated { k: usize, detail: String },

    #[error("boundary violation: value {value:e} at x = {x} (expected zero trace)")]
    BoundaryViolation { x: f64, value: f64 },

    #[error("weight breakpoint t = {t} is not a node of the time grid")]
    BreakpointUnresolved { t: f64 },

    #[error("singular implicit step at node {row}")]
    SingularStep { row: usize },

    #[error("invalid source term: {0}")]
    InvalidSource(String),

    #[error("invalid stepper configuration: {0}")]
    InvalidStepper(String),

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver failed: {0}")]
    EigenSolver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
