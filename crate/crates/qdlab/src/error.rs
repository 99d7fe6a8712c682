//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, evaluation, and integration routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("density evaluated at a pole ({0})")]
    EvalAtPole(String),
    #[error("zero and pole divisors share a location near {0}")]
    CommonFactor(String),
    #[error("leading coefficient must be nonzero")]
    ZeroLeading,
    #[error("affine map requires a != 0")]
    DegenerateAffine,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("bad annulus radii: need 0 < r < R, got r={r}, R={big_r}")]
    BadRadii { r: f64, big_r: f64 },
    #[error("non-integrable: {0}")]
    NonIntegrable(String),
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("w = {0} is a critical value")]
    CriticalValue(String),
    #[error("a preimage of w = {0} hits a pole")]
    PoleImage(String),
    #[error("truncation tail bound {bound:.3e} exceeds tolerance {tol:.3e} at k = {k}")]
    TailTooLarge { bound: f64, tol: f64, k: usize },
    #[error("differential has mass below the absolute floor")]
    ZeroMass,
    #[error("pole collision in family parameters: {0}")]
    PoleCollision(String),
    #[error("need at least two finite poles")]
    TooFewPoles,
    #[error("base point is degenerate (sin(b) vanishes at b = {0})")]
    DegenerateAtCritical(String),
    #[error("critical value must be strictly preperiodic: preperiod {0} < 2")]
    NotStrictlyPreperiodic(u32),
    #[error("period must be at least 1, got {0}")]
    BadPeriod(u32),
    #[error("postsingular set too small (|P_f| = {0} <= 3)")]
    TooSmall(u32),
    #[error("cos-symmetric pole count must be even, got {0}")]
    OddCount(u32),
    #[error("mass-condition certification inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
