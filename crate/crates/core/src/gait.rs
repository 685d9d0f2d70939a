//! Walking pattern generator.
//!
//! Footholds alternate right/left, `stride/2` apart, so each swing foot
//! travels one full stride. Every step is a single-support phase `Ts`
//! followed by a double-support phase `Td`; the walk starts at `t = 0` in
//! periodic motion with the right foot in stance at `x = 0`.
//!
//! The hip follows a linear inverted pendulum driven by the desired ZMP:
//! constant at the stance foot in single support and ramping linearly to the
//! next foot in double support. Inside every phase the pendulum has the
//! closed form `x = p(τ) + A·cosh(τ/Tc) + B·sinh(τ/Tc)`; the phase
//! constants come from a 2×2 periodicity condition, which makes position and
//! velocity continuous everywhere. The same model with alternating footholds
//! gives the lateral sway.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::{leg_ik, ChainConfig, LegAngles, Side};
use crate::GRAVITY;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitParams {
    /// Pendulum (COM and hip) height (m).
    pub com_height: f64,
    /// Swing-foot travel per step (m).
    pub stride_length: f64,
    /// Peak swing-foot lift (m).
    pub step_height: f64,
    pub single_support: f64,
    pub double_support: f64,
    pub sample_dt: f64,
    /// Lateral distance between the foot centre lines (m).
    pub step_width: f64,
    pub foot_length: f64,
    pub foot_width: f64,
    pub ankle_height: f64,
    pub l1: f64,
    pub l2: f64,
    /// Joint speed bound the planned motion must respect (rad/s).
    pub joint_rate_limit: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self {
            com_height: 0.9,
            stride_length: 0.4,
            step_height: 0.1,
            single_support: 0.5,
            double_support: 0.1,
            sample_dt: 0.001,
            step_width: 0.3,
            foot_length: 0.2,
            foot_width: 0.1,
            ankle_height: crate::kinematics::DEFAULT_ANKLE_HEIGHT,
            l1: crate::kinematics::DEFAULT_L1,
            l2: crate::kinematics::DEFAULT_L2,
            joint_rate_limit: 10.0,
        }
    }
}

impl GaitParams {
    /// Full gait cycle `2·Ts + 2·Td`.
    pub fn cycle(&self) -> f64 {
        2.0 * self.single_support + 2.0 * self.double_support
    }

    pub fn step_period(&self) -> f64 {
        self.single_support + self.double_support
    }

    /// Distance between consecutive footholds.
    pub fn step_length(&self) -> f64 {
        0.5 * self.stride_length
    }

    /// Pendulum time constant `√(zc/g)`.
    pub fn time_constant(&self) -> f64 {
        (self.com_height / GRAVITY).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("com_height", self.com_height),
            ("stride_length", self.stride_length),
            ("step_height", self.step_height),
            ("single_support", self.single_support),
            ("sample_dt", self.sample_dt),
            ("foot_length", self.foot_length),
            ("foot_width", self.foot_width),
            ("l1", self.l1),
            ("l2", self.l2),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "must be positive"));
            }
        }
        if !(self.double_support > 0.0) {
            return Err(Error::param("double_support", "must be positive"));
        }
        if !(self.step_width >= 0.0) {
            return Err(Error::param("step_width", "must be non-negative"));
        }
        Ok(())
    }
}

/// Footholds of a straight walk.
#[derive(Debug, Clone, PartialEq)]
pub struct FootPlan {
    /// Stance side of step `k`.
    pub stance: Vec<Side>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FootPlan {
    /// Footholds for steps `-1..n` (index `k + 1` holds step `k`).
    pub fn straight(params: &GaitParams, n_steps: usize) -> Self {
        let mut plan = FootPlan {
            stance: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
        };
        for k in -1..n_steps as i64 {
            let side = side_of(k);
            plan.stance.push(side);
            plan.x.push(params.step_length() * k as f64);
            plan.y.push(lateral_of(side, params));
        }
        plan
    }
}

fn side_of(step: i64) -> Side {
    if step.rem_euclid(2) == 0 {
        Side::Right
    } else {
        Side::Left
    }
}

fn lateral_of(side: Side, params: &GaitParams) -> f64 {
    match side {
        Side::Right => -0.5 * params.step_width,
        Side::Left => 0.5 * params.step_width,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Single,
    Double,
}

/// Deviation state `(x − p, ẋ − ṗ)` of the pendulum at the start of single
/// support, relative to the stance foot.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PhaseStart {
    d: f64,
    v: f64,
}

fn transition(tau: f64, tc: f64) -> Matrix2<f64> {
    let (c, s) = ((tau / tc).cosh(), (tau / tc).sinh());
    Matrix2::new(c, tc * s, s / tc, c)
}

/// Solves the periodicity condition for one axis. `sigma` is +1 when the
/// pattern repeats each step and −1 when it alternates sign.
fn periodic_start(params: &GaitParams, ramp: f64, sigma: f64) -> Result<PhaseStart> {
    let tc = params.time_constant();
    let ms = transition(params.single_support, tc);
    let md = transition(params.double_support, tc);
    let slope = ramp / params.double_support;
    let lhs = md * ms - Matrix2::identity() * sigma;
    let rhs = md * Vector2::new(0.0, slope) - Vector2::new(0.0, slope);
    let det = lhs.determinant();
    if !det.is_finite() || det.abs() < 1e-12 * lhs.abs().max().powi(2).max(1e-300) {
        return Err(Error::InfeasibleBoundary);
    }
    let sol = lhs.try_inverse().ok_or(Error::InfeasibleBoundary)? * rhs;
    Ok(PhaseStart { d: sol.x, v: sol.y })
}

/// Position, velocity and acceleration of one pendulum axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisState {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
}

/// One sample of the plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaitSample {
    pub t: f64,
    pub step: i64,
    pub phase: Phase,
    pub hip_x: f64,
    pub hip_z: f64,
    /// Lateral pendulum position (m).
    pub sway_y: f64,
    pub right_ankle: (f64, f64),
    pub left_ankle: (f64, f64),
    pub right_contact: bool,
    pub left_contact: bool,
    pub zmpd_x: f64,
    pub zmpd_y: f64,
}

/// Analytic gait pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitPlanner {
    params: GaitParams,
    x_start: PhaseStart,
    y_start: PhaseStart,
}

impl GaitPlanner {
    pub fn new(params: GaitParams) -> Result<Self> {
        params.validate()?;
        let x_start = periodic_start(&params, params.step_length(), 1.0)?;
        // Right stance (y = -w/2) ramps to the left foot (+w/2).
        let y_start = periodic_start(&params, params.step_width, -1.0)?;
        Ok(Self {
            params,
            x_start,
            y_start,
        })
    }

    pub fn params(&self) -> &GaitParams {
        &self.params
    }

    fn locate(&self, t: f64) -> (i64, f64) {
        let period = self.params.step_period();
        let k = (t / period).floor();
        let mut tau = t - k * period;
        let mut k = k as i64;
        // Guard against rounding that lands exactly on the next boundary.
        if tau >= period {
            tau -= period;
            k += 1;
        }
        (k, tau.max(0.0))
    }

    /// Stance foot centre of step `k`.
    pub fn foothold(&self, step: i64) -> (f64, f64) {
        (
            self.params.step_length() * step as f64,
            lateral_of(side_of(step), &self.params),
        )
    }

    pub fn stance_side(&self, step: i64) -> Side {
        side_of(step)
    }

    fn axis(&self, start: PhaseStart, p0: f64, ramp: f64, tau: f64) -> AxisState {
        let phase = if tau <= self.params.single_support {
            Phase::Single
        } else {
            Phase::Double
        };
        self.axis_in(start, p0, ramp, tau, phase)
    }

    fn axis_in(&self, start: PhaseStart, p0: f64, ramp: f64, tau: f64, phase: Phase) -> AxisState {
        let tc = self.params.time_constant();
        let ts = self.params.single_support;
        let w2 = 1.0 / (tc * tc);
        if phase == Phase::Single {
            let m = transition(tau, tc) * Vector2::new(start.d, start.v);
            return AxisState {
                pos: p0 + m.x,
                vel: m.y,
                acc: w2 * m.x,
            };
        }
        let slope = ramp / self.params.double_support;
        let end = transition(ts, tc) * Vector2::new(start.d, start.v);
        let m = transition(tau - ts, tc) * Vector2::new(end.x, end.y - slope);
        AxisState {
            pos: p0 + slope * (tau - ts) + m.x,
            vel: m.y + slope,
            acc: w2 * m.x,
        }
    }

    /// Sagittal hip state.
    pub fn hip_x(&self, t: f64) -> AxisState {
        let (k, tau) = self.locate(t);
        self.axis(
            self.x_start,
            self.foothold(k).0,
            self.params.step_length(),
            tau,
        )
    }

    /// Lateral pendulum state.
    pub fn sway_y(&self, t: f64) -> AxisState {
        let (k, tau) = self.locate(t);
        let sign = if side_of(k) == Side::Right { 1.0 } else { -1.0 };
        let s = self.axis(
            self.y_start,
            -0.5 * self.params.step_width,
            self.params.step_width,
            tau,
        );
        AxisState {
            pos: sign * s.pos,
            vel: sign * s.vel,
            acc: sign * s.acc,
        }
    }

    /// Largest position and velocity mismatch of the hip and sway
    /// pendulums between the two sides of each phase boundary of step `k`.
    pub fn boundary_jumps(&self, step: i64) -> (f64, f64) {
        let p = &self.params;
        let (ts, period) = (p.single_support, p.step_period());
        let (x0, _) = self.foothold(step);
        let (x1, _) = self.foothold(step + 1);
        let sign = if side_of(step) == Side::Right {
            1.0
        } else {
            -1.0
        };
        let lat = -0.5 * p.step_width;
        let pairs = [
            // single → double inside step k
            (
                self.axis_in(self.x_start, x0, p.step_length(), ts, Phase::Single),
                self.axis_in(self.x_start, x0, p.step_length(), ts, Phase::Double),
                self.axis_in(self.y_start, lat, p.step_width, ts, Phase::Single),
                self.axis_in(self.y_start, lat, p.step_width, ts, Phase::Double),
                1.0,
            ),
            // double of k → single of k + 1
            (
                self.axis_in(self.x_start, x0, p.step_length(), period, Phase::Double),
                self.axis_in(self.x_start, x1, p.step_length(), 0.0, Phase::Single),
                self.axis_in(self.y_start, lat, p.step_width, period, Phase::Double),
                self.axis_in(self.y_start, lat, p.step_width, 0.0, Phase::Single),
                -1.0,
            ),
        ];
        let (mut dpos, mut dvel) = (0.0f64, 0.0f64);
        for (xa, xb, ya, yb, flip) in pairs {
            dpos = dpos.max((xa.pos - xb.pos).abs());
            dvel = dvel.max((xa.vel - xb.vel).abs());
            let (ya_pos, ya_vel) = (sign * ya.pos, sign * ya.vel);
            let (yb_pos, yb_vel) = (flip * sign * yb.pos, flip * sign * yb.vel);
            dpos = dpos.max((ya_pos - yb_pos).abs());
            dvel = dvel.max((ya_vel - yb_vel).abs());
        }
        (dpos, dvel)
    }

    /// Swing ankle `(x, z)` during single support of step `k`, `tau ∈ [0, Ts]`.
    pub fn swing_ankle(&self, step: i64, tau: f64) -> (f64, f64) {
        let p = &self.params;
        let s = (tau / p.single_support).clamp(0.0, 1.0);
        let x0 = self.foothold(step - 1).0;
        let x = x0 + p.stride_length * min_jerk(s);
        let lift = if s <= 0.5 {
            min_jerk(2.0 * s)
        } else {
            min_jerk(2.0 - 2.0 * s)
        };
        (x, p.ankle_height + p.step_height * lift)
    }

    /// Desired ZMP at time `t`.
    pub fn desired_zmp(&self, t: f64) -> (f64, f64) {
        let (k, tau) = self.locate(t);
        let (x0, y0) = self.foothold(k);
        let ts = self.params.single_support;
        if tau <= ts {
            return (x0, y0);
        }
        let (x1, y1) = self.foothold(k + 1);
        let f = ((tau - ts) / self.params.double_support).min(1.0);
        (x0 + f * (x1 - x0), y0 + f * (y1 - y0))
    }

    pub fn sample(&self, t: f64) -> GaitSample {
        let p = &self.params;
        let (k, tau) = self.locate(t);
        let single = tau <= p.single_support;
        let stance = side_of(k);
        let stance_ankle = (self.foothold(k).0, p.ankle_height);
        let other = if single {
            self.swing_ankle(k, tau)
        } else {
            (self.foothold(k + 1).0, p.ankle_height)
        };
        let (right_ankle, left_ankle) = match stance {
            Side::Right => (stance_ankle, other),
            Side::Left => (other, stance_ankle),
        };
        let other_contact = !single || tau == 0.0;
        let (right_contact, left_contact) = match stance {
            Side::Right => (true, other_contact),
            Side::Left => (other_contact, true),
        };
        let (zx, zy) = self.desired_zmp(t);
        GaitSample {
            t,
            step: k,
            phase: if single { Phase::Single } else { Phase::Double },
            hip_x: self.hip_x(t).pos,
            hip_z: p.com_height,
            sway_y: self.sway_y(t).pos,
            right_ankle,
            left_ankle,
            right_contact,
            left_contact,
            zmpd_x: zx,
            zmpd_y: zy,
        }
    }

    /// Samples `[0, duration]` at the configured rate.
    pub fn plan(&self, duration: f64) -> Vec<GaitSample> {
        let n = (duration / self.params.sample_dt).round() as usize;
        (0..=n)
            .map(|i| self.sample(i as f64 * self.params.sample_dt))
            .collect()
    }

    /// Support polygon at `t` (convex hull of the feet in contact).
    pub fn support_polygon(&self, sample: &GaitSample) -> SupportPolygon {
        let p = &self.params;
        let mut corners = Vec::with_capacity(8);
        let mut add = |x: f64, y: f64| {
            for (dx, dy) in [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)] {
                corners.push((x + dx * p.foot_length, y + dy * p.foot_width));
            }
        };
        if sample.right_contact {
            add(sample.right_ankle.0, lateral_of(Side::Right, p));
        }
        if sample.left_contact {
            add(sample.left_ankle.0, lateral_of(Side::Left, p));
        }
        SupportPolygon::hull(corners)
    }
}

/// Minimum-jerk quintic `10s³ − 15s⁴ + 6s⁵` on `[0, 1]`.
pub fn min_jerk(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

/// Hip trajectory over step `k` (single then double support).
pub fn hip_trajectory(planner: &GaitPlanner, step: i64) -> Vec<(f64, f64, f64)> {
    let p = planner.params();
    let t0 = step as f64 * p.step_period();
    let n = (p.step_period() / p.sample_dt).round() as usize;
    (0..=n)
        .map(|i| {
            let t = t0 + i as f64 * p.sample_dt;
            (t, planner.hip_x(t).pos, p.com_height)
        })
        .collect()
}

/// Swing ankle trajectory over the single support of step `k`.
pub fn ankle_trajectory(planner: &GaitPlanner, step: i64) -> Vec<(f64, f64, f64)> {
    let p = planner.params();
    let t0 = step as f64 * p.step_period();
    let n = (p.single_support / p.sample_dt).round() as usize;
    (0..=n)
        .map(|i| {
            let tau = i as f64 * p.sample_dt;
            let (x, z) = planner.swing_ankle(step, tau);
            (t0 + tau, x, z)
        })
        .collect()
}

/// Joint angles θ1..θ6 for every sample via two-link IK on both legs.
pub fn joint_trajectories(samples: &[GaitSample], chain: &ChainConfig) -> Result<Vec<[f64; 6]>> {
    samples
        .iter()
        .map(|s| {
            let hip = (s.hip_x, s.hip_z);
            let mut cfg = *chain;
            cfg.set_leg(Side::Right, leg_ik(hip, s.right_ankle, chain.l1, chain.l2)?);
            cfg.set_leg(Side::Left, leg_ik(hip, s.left_ankle, chain.l1, chain.l2)?);
            Ok(cfg.joint_angles)
        })
        .collect()
}

/// Legs of one sample as `(right, left)` angle triples.
pub fn leg_angles(sample: &GaitSample, l1: f64, l2: f64) -> Result<(LegAngles, LegAngles)> {
    let hip = (sample.hip_x, sample.hip_z);
    Ok((
        leg_ik(hip, sample.right_ankle, l1, l2)?,
        leg_ik(hip, sample.left_ankle, l1, l2)?,
    ))
}

/// Convex polygon in the ground plane, counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPolygon {
    pub vertices: Vec<(f64, f64)>,
}

impl SupportPolygon {
    /// Andrew's monotone chain hull.
    pub fn hull(mut pts: Vec<(f64, f64)>) -> Self {
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite corners"));
        pts.dedup();
        if pts.len() < 3 {
            return Self { vertices: pts };
        }
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
        let mut lower: Vec<(f64, f64)> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2
                && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<(f64, f64)> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self { vertices: lower }
    }

    /// Signed distance to the boundary: positive inside.
    pub fn margin(&self, x: f64, y: f64) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return f64::NEG_INFINITY;
        }
        let mut inside = f64::INFINITY;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let (ex, ey) = (b.0 - a.0, b.1 - a.1);
            let len = ex.hypot(ey);
            // Left-hand normal points inward for a counter-clockwise hull.
            let d = (ex * (y - a.1) - ey * (x - a.0)) / len;
            inside = inside.min(d);
        }
        inside
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.margin(x, y) >= -1e-12
    }
}
