use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("center of mass outside the wheelbase (a = {a:.4} m, b = {b:.4} m)")]
    ComOutsideWheelbase { a: f64, b: f64 },

    #[error("cornering stiffness must be nonzero")]
    ZeroStiffness,

    #[error("yaw-rate gain is singular at ux = {speed:.4} m/s (critical oversteer speed)")]
    OversteerSingularity { speed: f64 },

    #[error("steady-state steering system is singular (det = {det:e})")]
    SingularSteadyState { det: f64 },

    #[error("zero yaw rate in steady-test point {index}")]
    ZeroYawRate { index: usize },

    #[error("target unreachable: hip-ankle distance {distance:.6} m outside [{min:.6}, {max:.6}]")]
    Unreachable { distance: f64, min: f64, max: f64 },

    #[error("ballistic phase: ZMP denominator {denominator:e} is not positive")]
    BallisticPhase { denominator: f64 },

    #[error("gait boundary system is singular")]
    InfeasibleBoundary,

    #[error("observer bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("observer step dt*wo = {product:.3} exceeds the stability margin {limit}")]
    ObserverStabilityMargin { product: f64, limit: f64 },

    #[error("input coefficient b0 must be nonzero")]
    ZeroInputCoefficient,

    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("rule table: {0}")]
    RuleTable(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("trace is empty")]
    EmptyTrace,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
