//! Center-of-mass adjustment stability control for a transformable
//! wheel-legged vehicle.
//!
//! The crate models one motorized slider axis ([`mechanism`]), the yaw-plane
//! steering model that the slider reshapes ([`vehicle`]), humanoid-mode
//! kinematics and ZMP ([`kinematics`], [`gait`]), the controllers
//! ([`fuzzy`], [`adrc`]), the K-means stability grader ([`grader`]), the
//! hybrid-automaton mode supervisor ([`supervisor`]) and closed-loop
//! scenario runners ([`harness`]).
//!
//! Batch workloads (dataset generation, clustering, variant sweeps) accept an
//! [`Exec`] mode. With the `parallel` feature (on by default) `Exec::Parallel`
//! fans out over rayon; without it every mode runs sequentially.

pub mod adrc;
pub mod error;
pub mod exec;
pub mod fuzzy;
pub mod gait;
pub mod grader;
pub mod harness;
pub mod kinematics;
pub mod mechanism;
pub mod supervisor;
pub mod vehicle;

pub use error::{Error, Result};
pub use exec::Exec;

/// Standard gravity (m/s²).
pub const GRAVITY: f64 = 9.81;
