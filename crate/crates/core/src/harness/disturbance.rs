use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::mechanism::Axis;

/// Where a disturbance acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisturbanceTarget {
    /// Acceleration offset on the slider plant (m/s²).
    Plant,
    /// Horizontal acceleration of the upper body (m/s²).
    Body,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceKind {
    /// Constant offset from the start time on.
    Step { magnitude: f64 },
    /// Rectangular pulse.
    Impulse { magnitude: f64, duration: f64 },
    /// Gaussian noise through a first-order low-pass, until `end`.
    Noise {
        std_dev: f64,
        cutoff_hz: f64,
        end: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub start: f64,
    pub axis: Axis,
    pub target: DisturbanceTarget,
    pub kind: DisturbanceKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisturbanceSchedule {
    pub events: Vec<Disturbance>,
    pub seed: u64,
}

/// Disturbance values at one instant, indexed by axis (X, Y).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisturbanceSample {
    pub plant: [f64; 2],
    pub body: [f64; 2],
}

/// A schedule realised on a fixed time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceStream {
    dt: f64,
    samples: Vec<DisturbanceSample>,
}

fn axis_index(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
    }
}

fn slot(s: &mut DisturbanceSample, target: DisturbanceTarget, axis: usize) -> &mut f64 {
    match target {
        DisturbanceTarget::Plant => &mut s.plant[axis],
        DisturbanceTarget::Body => &mut s.body[axis],
    }
}

impl DisturbanceSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.events.windows(2).any(|w| w[1].start < w[0].start) {
            return Err(Error::param(
                "disturbances",
                "events must be ordered by start time",
            ));
        }
        for ev in &self.events {
            let ok = ev.start >= 0.0
                && match ev.kind {
                    DisturbanceKind::Step { magnitude } => magnitude.is_finite(),
                    DisturbanceKind::Impulse {
                        magnitude,
                        duration,
                    } => magnitude.is_finite() && duration > 0.0,
                    DisturbanceKind::Noise {
                        std_dev,
                        cutoff_hz,
                        end,
                    } => std_dev >= 0.0 && cutoff_hz > 0.0 && end >= ev.start,
                };
            if !ok {
                return Err(Error::param(
                    "disturbances",
                    format!("invalid event {ev:?}"),
                ));
            }
        }
        Ok(())
    }

    /// Evaluates the schedule on `n` samples spaced `dt` apart.
    pub fn realize(&self, dt: f64, n: usize) -> Result<DisturbanceStream> {
        self.validate()?;
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        let mut samples = vec![DisturbanceSample::default(); n];
        for (idx, ev) in self.events.iter().enumerate() {
            let a = axis_index(ev.axis);
            match ev.kind {
                DisturbanceKind::Step { magnitude } => {
                    for (k, s) in samples.iter_mut().enumerate() {
                        if k as f64 * dt >= ev.start - 1e-12 {
                            *slot(s, ev.target, a) += magnitude;
                        }
                    }
                }
                DisturbanceKind::Impulse {
                    magnitude,
                    duration,
                } => {
                    for (k, s) in samples.iter_mut().enumerate() {
                        let t = k as f64 * dt;
                        if t >= ev.start - 1e-12 && t < ev.start + duration - 1e-12 {
                            *slot(s, ev.target, a) += magnitude;
                        }
                    }
                }
                DisturbanceKind::Noise {
                    std_dev,
                    cutoff_hz,
                    end,
                } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        self.seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                    );
                    let wc = 2.0 * std::f64::consts::PI * cutoff_hz * dt;
                    let alpha = wc / (1.0 + wc);
                    // Variance of the filtered white sequence is α/(2−α).
                    let gain = std_dev * ((2.0 - alpha) / alpha).sqrt();
                    let mut state = 0.0;
                    for (k, s) in samples.iter_mut().enumerate() {
                        let t = k as f64 * dt;
                        if t < ev.start - 1e-12 || t > end + 1e-12 {
                            continue;
                        }
                        let w: f64 = StandardNormal.sample(&mut rng);
                        state += alpha * (gain * w - state);
                        *slot(s, ev.target, a) += state;
                    }
                }
            }
        }
        Ok(DisturbanceStream { dt, samples })
    }
}

impl DisturbanceStream {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn at(&self, k: usize) -> DisturbanceSample {
        self.samples.get(k).copied().unwrap_or_default()
    }

    /// Sample in effect at time `t` (zero outside the grid).
    pub fn at_time(&self, t: f64) -> DisturbanceSample {
        if t < 0.0 {
            return DisturbanceSample::default();
        }
        self.at((t / self.dt + 1e-9).floor() as usize)
    }
}

/// Plant and body disturbance values at `t`.
pub fn inject_disturbance(stream: &DisturbanceStream, t: f64) -> DisturbanceSample {
    stream.at_time(t)
}
