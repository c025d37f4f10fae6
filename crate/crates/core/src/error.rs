use thiserror::Error;

use crate::path::PiecewiseLinearPath;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rank {0}: affine type A_n^(1) needs n >= 1")]
    InvalidRank(usize),
    #[error("simple root index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("invalid direction sequence: {0}")]
    InvalidSequence(String),
    #[error("correction system is singular or inconsistent (max residual {residual:e})")]
    SingularSystem { residual: f64 },
    #[error("time {t} outside path domain [0, {horizon}]")]
    TimeOutOfDomain { t: f64, horizon: f64 },
    #[error("cannot concatenate an empty list of paths")]
    EmptyPathList,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("operation requires rank {expected}, got {actual}")]
    WrongRank { expected: usize, actual: usize },
    #[error("dominant projection did not stabilize after {sweeps} sweeps")]
    NonStabilization {
        sweeps: usize,
        last: Box<PiecewiseLinearPath>,
    },
    #[error("energy cutoff {cutoff} excludes the generator")]
    CutoffTooSmall { cutoff: f64 },
    #[error("drift parameter (nu_hat|alpha) = {value} must be positive for {what}")]
    InvalidDrift { what: String, value: f64 },
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("argument is singular (a sine factor vanishes); perturb it")]
    SingularArgument,
    #[error("levels must be positive, got t1 = {t1}, t2 = {t2}")]
    NonPositiveLevel { t1: f64, t2: f64 },
    #[error("truncation tail bound {bound:e} exceeds tolerance {tolerance:e}")]
    TailTooLarge { bound: f64, tolerance: f64 },
    #[error("finite-difference stencil leaves the chamber at {0}")]
    StencilExitsChamber(String),
    #[error("all particles were killed at t = {t}")]
    AllParticlesDead { t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
