use thiserror::Error;

/// Failure modes shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector too small to define a projective point (norm {0:e})")]
    ZeroVector(f64),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { what: &'static str, iterations: usize, residual: f64 },
    #[error("function defined on {expected} evaluated on {found}")]
    DomainMismatch { expected: &'static str, found: &'static str },
    #[error("adaptive step collapsed to {step:e} at t = {t}")]
    StepCollapse { t: f64, step: f64 },
    #[error("point lies on the base set (max |x_i y_i| = {0:e})")]
    OnBaseSet(f64),
    #[error("fiber tangent space degenerates at this point (singular value {0:e})")]
    SingularFiberPoint(f64),
    #[error("critical points coincide")]
    DegeneratePair,
    #[error("level {level} outside the open range ({min}, {max})")]
    LevelOutOfRange { level: f64, min: f64, max: f64 },
    #[error("no fiber point with the requested integral values (attained c1 in [{c1_min}, {c1_max}], c2 in [{c2_min}, {c2_max}])")]
    NoSolution { c1_min: f64, c1_max: f64, c2_min: f64, c2_max: f64 },
    #[error("point lies on the boundary divisor (|s| = {0:e})")]
    OnDivisor(f64),
    #[error("eliminated chart coordinate has derivative {0:e}")]
    DegenerateChart(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("trajectory entered the inner collar (distance {distance:e} < r2 = {r2:e})")]
    EnteredCollar { distance: f64, r2: f64 },
    #[error("horizontal distribution degenerates (singular value {0:e})")]
    DegenerateDistribution(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
