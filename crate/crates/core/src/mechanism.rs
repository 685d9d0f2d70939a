//! Motor + ball-screw + slider model for one axis of the COM adjustment
//! mechanism.
//!
//! The current and torque loops collapse to constants, so the slider obeys
//! `ÿ = −(Bz/J)·ẏ + b0·u` with `b0 = Ka·Kt·rg/J` and `rg = pr/2π`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis of the slider mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            other => Err(Error::param(
                "axis",
                format!("expected x or y, got `{other}`"),
            )),
        }
    }
}

/// Electromechanical constants of one slider axis. Derived quantities
/// (`rg`, `b0`) are computed at construction and cannot drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    current_constant: f64,
    torque_constant: f64,
    inertia: f64,
    viscous_damping: f64,
    screw_lead: f64,
    guide_ratio: f64,
    input_coefficient: f64,
    slider_mass: f64,
    travel_limits: [f64; 2],
}

/// Default input coefficient b0 (m/(s²·V)).
pub const DEFAULT_B0: f64 = 0.08;
/// Default viscous damping `Bz` (N·m·s/rad).
pub const DEFAULT_VISCOUS_DAMPING: f64 = 0.04;

impl PlantParams {
    /// Builds a parameter set, deriving `rg = pr/2π` and `b0 = Ka·Kt·rg/J`.
    pub fn new(
        current_constant: f64,
        torque_constant: f64,
        inertia: f64,
        viscous_damping: f64,
        screw_lead: f64,
        slider_mass: f64,
        travel_limits: [f64; 2],
    ) -> Result<Self> {
        if !(inertia > 0.0) {
            return Err(Error::param("inertia", "must be positive"));
        }
        if !(viscous_damping >= 0.0) {
            return Err(Error::param("viscous_damping", "must be non-negative"));
        }
        if !(screw_lead > 0.0) {
            return Err(Error::param("screw_lead", "must be positive"));
        }
        if !(slider_mass > 0.0) {
            return Err(Error::param("slider_mass", "must be positive"));
        }
        if !(travel_limits[0] < travel_limits[1]) {
            return Err(Error::param("travel_limits", "need ymin < ymax"));
        }
        let guide_ratio = screw_lead / (2.0 * std::f64::consts::PI);
        let input_coefficient = current_constant * torque_constant * guide_ratio / inertia;
        if input_coefficient == 0.0 || !input_coefficient.is_finite() {
            return Err(Error::ZeroInputCoefficient);
        }
        Ok(Self {
            current_constant,
            torque_constant,
            inertia,
            viscous_damping,
            screw_lead,
            guide_ratio,
            input_coefficient,
            slider_mass,
            travel_limits,
        })
    }

    /// Default constants with the inertia chosen so that `b0` equals `b0`
    /// for the given axis limits.
    pub fn with_b0(
        b0: f64,
        viscous_damping: f64,
        slider_mass: f64,
        travel_limits: [f64; 2],
    ) -> Result<Self> {
        let (ka, kt, pr) = (1.0, 0.5, 0.01);
        let rg = pr / (2.0 * std::f64::consts::PI);
        Self::new(
            ka,
            kt,
            ka * kt * rg / b0,
            viscous_damping,
            pr,
            slider_mass,
            travel_limits,
        )
    }

    /// Default X axis (±0.35 m travel).
    pub fn default_x() -> Self {
        Self::with_b0(DEFAULT_B0, DEFAULT_VISCOUS_DAMPING, 60.0, [-0.35, 0.35])
            .expect("valid defaults")
    }

    /// Default Y axis (±0.25 m travel).
    pub fn default_y() -> Self {
        Self::with_b0(DEFAULT_B0, DEFAULT_VISCOUS_DAMPING, 60.0, [-0.25, 0.25])
            .expect("valid defaults")
    }

    pub fn default_for(axis: Axis) -> Self {
        match axis {
            Axis::X => Self::default_x(),
            Axis::Y => Self::default_y(),
        }
    }

    /// Returns a copy with different travel limits.
    pub fn with_travel_limits(mut self, limits: [f64; 2]) -> Result<Self> {
        if !(limits[0] < limits[1]) {
            return Err(Error::param("travel_limits", "need ymin < ymax"));
        }
        self.travel_limits = limits;
        Ok(self)
    }

    pub fn current_constant(&self) -> f64 {
        self.current_constant
    }
    pub fn torque_constant(&self) -> f64 {
        self.torque_constant
    }
    pub fn inertia(&self) -> f64 {
        self.inertia
    }
    pub fn viscous_damping(&self) -> f64 {
        self.viscous_damping
    }
    pub fn screw_lead(&self) -> f64 {
        self.screw_lead
    }
    pub fn guide_ratio(&self) -> f64 {
        self.guide_ratio
    }
    pub fn b0(&self) -> f64 {
        self.input_coefficient
    }
    pub fn slider_mass(&self) -> f64 {
        self.slider_mass
    }
    pub fn travel_limits(&self) -> [f64; 2] {
        self.travel_limits
    }
    /// Damping ratio `Bz/J` of the reduced plant (1/s).
    pub fn damping_rate(&self) -> f64 {
        self.viscous_damping / self.inertia
    }
    /// Motor torque `Ka·Kt·u` for a voltage.
    pub fn motor_torque(&self, u: f64) -> f64 {
        self.current_constant * self.torque_constant * u
    }
    /// Largest travel magnitude, used as the slider output span.
    pub fn travel_span(&self) -> f64 {
        self.travel_limits[0].abs().min(self.travel_limits[1].abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SliderState {
    pub y: f64,
    pub ydot: f64,
    pub t: f64,
}

impl SliderState {
    pub fn at(y: f64) -> Self {
        Self {
            y,
            ydot: 0.0,
            t: 0.0,
        }
    }
}

/// Slider acceleration `ÿ = −(Bz/J)·ẏ + b0·u`.
pub fn plant_derivative(state: &SliderState, u: f64, params: &PlantParams) -> f64 {
    -params.damping_rate() * state.ydot + params.b0() * u
}

/// One semi-implicit Euler step with an extra external acceleration
/// (disturbance) added to the plant.
pub fn plant_step_disturbed(
    state: &SliderState,
    u: f64,
    accel_disturbance: f64,
    dt: f64,
    params: &PlantParams,
) -> SliderState {
    let acc = plant_derivative(state, u, params) + accel_disturbance;
    let mut ydot = state.ydot + acc * dt;
    let mut y = state.y + ydot * dt;
    let [lo, hi] = params.travel_limits;
    if y >= hi {
        y = hi;
        ydot = 0.0;
    } else if y <= lo {
        y = lo;
        ydot = 0.0;
    }
    SliderState {
        y,
        ydot,
        t: state.t + dt,
    }
}

/// One semi-implicit Euler step (`ẏ += ÿ·dt`, then `y += ẏ·dt`), clamped to
/// the travel limits with the velocity zeroed on contact.
pub fn plant_step(state: &SliderState, u: f64, dt: f64, params: &PlantParams) -> SliderState {
    plant_step_disturbed(state, u, 0.0, dt, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frictionless() -> PlantParams {
        PlantParams::with_b0(0.08, 0.0, 60.0, [-0.35, 0.35]).unwrap()
    }

    #[test]
    fn derived_constants_are_bit_exact() {
        let p = PlantParams::default_x();
        assert_eq!(p.guide_ratio(), 0.01 / (2.0 * std::f64::consts::PI));
        let b0 = p.current_constant() * p.torque_constant() * p.guide_ratio() / p.inertia();
        assert_eq!(p.b0(), b0);
        assert!((p.b0() - 0.08).abs() < 1e-15);
        assert!((p.guide_ratio() - 1.5915e-3).abs() < 1e-7);
    }

    #[test]
    fn derivative_examples() {
        let p = PlantParams::default_x();
        assert_eq!(plant_derivative(&SliderState::default(), 0.0, &p), 0.0);
        let f = frictionless();
        assert!((plant_derivative(&SliderState::default(), 1.0, &f) - 0.08).abs() < 1e-15);
        // Bz/J = 1: choose J so the damping rate is exactly one.
        let unit = PlantParams::new(1.0, 0.5, 0.25, 0.25, 0.01, 60.0, [-1.0, 1.0]).unwrap();
        let s = SliderState {
            y: 0.0,
            ydot: 1.0,
            t: 0.0,
        };
        assert_eq!(plant_derivative(&s, 0.0, &unit), -1.0);
    }

    #[test]
    fn rest_stays_at_rest() {
        let p = PlantParams::default_x();
        let s = SliderState {
            y: 0.12,
            ydot: 0.0,
            t: 3.0,
        };
        let n = plant_step(&s, 0.0, 0.001, &p);
        assert_eq!(n.y, 0.12);
        assert_eq!(n.ydot, 0.0);
        assert_eq!(n.t, 3.001);
    }

    #[test]
    fn constant_input_matches_parabola() {
        let p = frictionless();
        let mut s = SliderState::default();
        for _ in 0..1000 {
            s = plant_step(&s, 1.0, 0.001, &p);
        }
        assert!((s.y - 0.04).abs() <= 1e-4, "y = {}", s.y);
    }

    #[test]
    fn clamps_at_limits() {
        let p = PlantParams::default_x();
        let s = SliderState {
            y: 0.35,
            ydot: 0.0,
            t: 0.0,
        };
        let n = plant_step(&s, 1e6, 0.001, &p);
        assert_eq!((n.y, n.ydot), (0.35, 0.0));
        let s = SliderState {
            y: -0.35,
            ydot: -1.0,
            t: 0.0,
        };
        let n = plant_step(&s, -1e6, 0.001, &p);
        assert_eq!((n.y, n.ydot), (-0.35, 0.0));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PlantParams::new(1.0, 0.5, 0.0, 0.0, 0.01, 60.0, [-1.0, 1.0]).is_err());
        assert!(PlantParams::new(1.0, 0.5, 1.0, -1.0, 0.01, 60.0, [-1.0, 1.0]).is_err());
        assert!(PlantParams::new(1.0, 0.5, 1.0, 0.0, 0.01, 60.0, [1.0, -1.0]).is_err());
        assert!(PlantParams::new(0.0, 0.5, 1.0, 0.0, 0.01, 60.0, [-1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn parabola_tracks_within_first_order(u in -24.0f64..24.0, steps in 1usize..5000) {
            let p = PlantParams::with_b0(0.08, 0.0, 60.0, [-1e9, 1e9]).unwrap();
            let dt = 0.001;
            let mut s = SliderState::default();
            for _ in 0..steps {
                s = plant_step(&s, u, dt, &p);
            }
            let t = steps as f64 * dt;
            let exact = 0.5 * 0.08 * u * t * t;
            // Semi-implicit Euler overshoots the parabola by ½·a·dt·t.
            let bound = 0.5 * (0.08 * u).abs() * dt * t + 1e-12;
            prop_assert!((s.y - exact).abs() <= bound * 1.0001);
        }

        #[test]
        fn damped_speed_never_grows(v0 in -2.0f64..2.0, steps in 1usize..3000) {
            let p = PlantParams::with_b0(0.08, 0.5, 60.0, [-1e9, 1e9]).unwrap();
            let mut s = SliderState { y: 0.0, ydot: v0, t: 0.0 };
            for _ in 0..steps {
                let n = plant_step(&s, 0.0, 0.001, &p);
                prop_assert!(n.ydot.abs() <= s.ydot.abs());
                s = n;
            }
        }

        #[test]
        fn never_leaves_travel(u in -1e4f64..1e4, y0 in -0.35f64..0.35) {
            let p = PlantParams::default_x();
            let mut s = SliderState::at(y0);
            for _ in 0..500 {
                s = plant_step(&s, u, 0.001, &p);
                prop_assert!(s.y >= -0.35 && s.y <= 0.35);
            }
        }
    }
}
