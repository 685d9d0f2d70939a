//! Closed-loop scenario runners, disturbance injection and metrics.

mod disturbance;
mod metrics;
mod steering;
mod walking;

pub use disturbance::{
    inject_disturbance, Disturbance, DisturbanceKind, DisturbanceSample, DisturbanceSchedule,
    DisturbanceStream, DisturbanceTarget,
};
pub use metrics::{compute_metrics, reduction_percent, Metrics};
pub use steering::{
    run_steering, steering_comparison, SteeringController, SteeringRun, SteeringScenario,
    SteeringTrace, DEFAULT_ERROR_GAIN, DEFAULT_KEC_QUANT, DEFAULT_KE_QUANT, DEFAULT_RATE_GAIN,
};
pub use walking::{
    default_disturbances, generate_grader_dataset, run_walking, run_walking_on, walking_comparison,
    PidGains, WalkingController, WalkingMetrics, WalkingPlan, WalkingRun, WalkingScenario,
    WalkingTrace, DEFAULT_E0, DEFAULT_EC0,
};
