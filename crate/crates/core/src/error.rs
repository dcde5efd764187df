use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::fixedpoints::{Branch, MorseCount};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The product of coupling difference and light shift vanishes, so the
    /// reduction unit `δU₀N/2` is zero and the junction decouples from the field.
    #[error("degenerate coupling: δ·U₀ = 0 (δ = {delta}, U₀ = {light_shift}); construct reduced parameters with zero tilt instead")]
    DegenerateCoupling { delta: f64, light_shift: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("population imbalance z = {z} lies outside [-1, 1]")]
    Domain { z: f64 },

    #[error("state z = {z} is within the pole guard of z = ±1")]
    PoleSingularity { z: f64 },

    /// A root with (nearly) vanishing derivative: the parameters sit on a fold.
    #[error("degenerate root on the {branch:?} branch at z = {z} (f' = {derivative:e})")]
    DegenerateRoot {
        branch: Branch,
        z: f64,
        derivative: f64,
    },

    #[error("Euler relation violated: m0 - m1 + m2 = {} for counts {counts:?}", counts.euler_sum())]
    EulerViolation { counts: MorseCount },

    #[error("trajectory approached a pole at t = {t} (z = {z})")]
    PoleApproach {
        t: f64,
        z: f64,
        partial: Box<Trajectory>,
    },

    #[error("step limit of {steps} exceeded at t = {t}")]
    StepLimitExceeded { t: f64, steps: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("trajectory is not periodic: relative spread of cycle lengths {spread:.3e}")]
    NotPeriodic { spread: f64 },

    #[error("unclassified trajectory: {0}")]
    Unclassified(String),

    #[error("contour level {level} lies outside the sampled energy range [{min}, {max}]")]
    EmptyLevel { level: f64, min: f64, max: f64 },
}
