use nalgebra::Vector3;

use crate::adrc::{AdrcConfig, AdrcController};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fuzzy::VufcState;
use crate::gait::{GaitParams, GaitPlanner, Phase, SupportPolygon};
use crate::grader::{ClusterModel, StabilitySample};
use crate::harness::disturbance::{
    Disturbance, DisturbanceKind, DisturbanceSchedule, DisturbanceTarget,
};
use crate::kinematics::{
    default_segments, forward_chain, leg_ik, second_difference, zmp_from_accel, BodySegment,
    ChainConfig, Side, LIFT_FRAME, SLIDER_SEGMENT,
};
use crate::mechanism::{plant_step_disturbed, Axis, PlantParams, SliderState};
use crate::GRAVITY;

const UPPER_BODY_SEGMENT: usize = 0;

/// The planned whole-body motion sampled at the control rate, with the
/// slider parked at the centre of both rails.
#[derive(Debug, Clone)]
pub struct WalkingPlan {
    pub dt: f64,
    pub masses: Vec<f64>,
    /// `positions[k][i]`: segment `i` at tick `k`.
    pub positions: Vec<Vec<Vector3<f64>>>,
    pub accels: Vec<Vec<Vector3<f64>>>,
    pub zmpd: Vec<(f64, f64)>,
    pub phases: Vec<Phase>,
    pub support: Vec<SupportPolygon>,
    /// Ticks at which the support phase changes.
    pub switches: Vec<usize>,
}

/// Solves `x_j − c·(x_{j+1} − 2x_j + x_{j−1}) = r_j` with `x = r` at both
/// ends (tridiagonal elimination).
fn solve_pendulum(r: &[f64], c: f64) -> Vec<f64> {
    let n = r.len();
    if n < 3 {
        return r.to_vec();
    }
    // Unknowns x_1..x_{n-2}; diagonal 1 + 2c, off-diagonals −c.
    let m = n - 2;
    let (diag, off) = (1.0 + 2.0 * c, -c);
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    for i in 0..m {
        let mut rhs = r[i + 1];
        if i == 0 {
            rhs += c * r[0];
        }
        if i == m - 1 {
            rhs += c * r[n - 1];
        }
        let denom = if i == 0 { diag } else { diag - off * cp[i - 1] };
        cp[i] = off / denom;
        dp[i] = if i == 0 {
            rhs / denom
        } else {
            (rhs - off * dp[i - 1]) / denom
        };
    }
    let mut x = vec![0.0; n];
    x[0] = r[0];
    x[n - 1] = r[n - 1];
    for i in (0..m).rev() {
        x[i + 1] = if i == m - 1 {
            dp[i]
        } else {
            dp[i] - cp[i] * x[i + 2]
        };
    }
    x
}

const PLAN_ITERATIONS: usize = 30;
const PLAN_TOLERANCE: f64 = 1e-12;

impl WalkingPlan {
    /// Builds the plan so that, with both sliders parked, the multi-body
    /// ZMP reproduces the desired ZMP: the hip and the lateral body shift
    /// are solved from the pendulum equation of the segments carried by the
    /// lift joint, with the leg contribution iterated to a fixed point.
    pub fn new(
        gait: &GaitParams,
        segments: &[BodySegment],
        duration: f64,
        dt: f64,
    ) -> Result<Self> {
        if segments.len() <= SLIDER_SEGMENT.max(UPPER_BODY_SEGMENT) {
            return Err(Error::param(
                "segments",
                "upper body and slider segments are required",
            ));
        }
        let planner = GaitPlanner::new(*gait)?;
        let n = (duration / dt).round() as usize + 1;
        // Margin on both sides so the boundary conditions of the pendulum
        // solve have decayed inside the horizon.
        let pad = (3.0 * gait.cycle() / dt).round() as usize;
        let total_n = n + 2 * pad;
        let samples: Vec<_> = (0..total_n)
            .map(|j| planner.sample((j as f64 - pad as f64) * dt))
            .collect();
        let masses: Vec<f64> = segments.iter().map(|s| s.mass).collect();
        let carried: Vec<bool> = segments
            .iter()
            .map(|s| s.parent_frame == LIFT_FRAME)
            .collect();
        let m_carried: f64 = masses
            .iter()
            .zip(&carried)
            .filter(|(_, c)| **c)
            .map(|(m, _)| m)
            .sum();
        if !(m_carried > 0.0) {
            return Err(Error::param(
                "segments",
                "no mass is carried by the lift joint",
            ));
        }
        let base = ChainConfig {
            l1: gait.l1,
            l2: gait.l2,
            hip_width: gait.step_width,
            ..ChainConfig::default()
        };
        let build = |hip_x: &[f64], shift: &[f64]| -> Result<Vec<Vec<Vector3<f64>>>> {
            let mut chain = base;
            samples
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let hip = (hip_x[j], s.hip_z);
                    chain.set_leg(Side::Right, leg_ik(hip, s.right_ankle, gait.l1, gait.l2)?);
                    chain.set_leg(Side::Left, leg_ik(hip, s.left_ankle, gait.l1, gait.l2)?);
                    chain.right_ankle =
                        Vector3::new(s.right_ankle.0, -0.5 * gait.step_width, s.right_ankle.1);
                    chain.lift_offset = Vector3::new(0.0, 0.5 * gait.step_width + shift[j], 0.0);
                    let frames = forward_chain(&chain);
                    Ok(segments.iter().map(|seg| seg.world_com(&frames)).collect())
                })
                .collect()
        };
        let accels_of = |positions: &[Vec<Vector3<f64>>]| {
            let mut acc = vec![vec![Vector3::zeros(); segments.len()]; positions.len()];
            for i in 0..segments.len() {
                let track: Vec<Vector3<f64>> = positions.iter().map(|p| p[i]).collect();
                for (k, a) in second_difference(&track, dt).into_iter().enumerate() {
                    acc[k][i] = a;
                }
            }
            acc
        };
        let mut hip_x: Vec<f64> = samples.iter().map(|s| s.hip_x).collect();
        let mut shift: Vec<f64> = samples.iter().map(|s| s.sway_y).collect();
        let mut positions = build(&hip_x, &shift)?;
        let mut accels = accels_of(&positions);
        for _ in 0..PLAN_ITERATIONS {
            // Carried COM relative to (hip x, lateral shift), and its height.
            let p0 = &positions[0];
            let mut off = Vector3::zeros();
            for i in (0..segments.len()).filter(|&i| carried[i]) {
                off += masses[i] * p0[i];
            }
            off /= m_carried;
            let height = off.z;
            let (off_x, off_y) = (off.x - hip_x[0], off.y - shift[0]);
            let mut rx = Vec::with_capacity(total_n);
            let mut ry = Vec::with_capacity(total_n);
            for j in 0..total_n {
                let (mut lx, mut ly, mut den) = (0.0, 0.0, 0.0);
                for i in 0..segments.len() {
                    let (p, a, m) = (positions[j][i], accels[j][i], masses[i]);
                    let w = m * (a.z + GRAVITY);
                    den += w;
                    if !carried[i] {
                        lx += w * p.x - m * a.x * p.z;
                        ly += w * p.y - m * a.y * p.z;
                    }
                }
                let s = &samples[j];
                rx.push((s.zmpd_x * den - lx) / (m_carried * GRAVITY));
                ry.push((s.zmpd_y * den - ly) / (m_carried * GRAVITY));
            }
            let c = height / (GRAVITY * dt * dt);
            let cx = solve_pendulum(&rx, c);
            let cy = solve_pendulum(&ry, c);
            let mut change: f64 = 0.0;
            for j in 0..total_n {
                let (hx, sy) = (cx[j] - off_x, cy[j] - off_y);
                change = change.max((hx - hip_x[j]).abs()).max((sy - shift[j]).abs());
                hip_x[j] = hx;
                shift[j] = sy;
            }
            positions = build(&hip_x, &shift)?;
            accels = accels_of(&positions);
            if change < PLAN_TOLERANCE {
                break;
            }
        }
        let window = pad..pad + n;
        let positions = positions[window.clone()].to_vec();
        let accels = accels[window.clone()].to_vec();
        let mut zmpd = Vec::with_capacity(n);
        let mut phases = Vec::with_capacity(n);
        let mut support = Vec::with_capacity(n);
        for s in &samples[window] {
            zmpd.push((s.zmpd_x, s.zmpd_y));
            phases.push(s.phase);
            support.push(planner.support_polygon(s));
        }
        let switches = (1..n).filter(|&k| phases[k] != phases[k - 1]).collect();
        Ok(Self {
            dt,
            masses,
            positions,
            accels,
            zmpd,
            phases,
            support,
            switches,
        })
    }

    pub fn len(&self) -> usize {
        self.zmpd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zmpd.is_empty()
    }

    /// ZMP at tick `k` with the slider displaced by `(x, y)` and a
    /// horizontal upper-body acceleration disturbance. The slider enters
    /// through its position only; its own reaction acceleration is not
    /// part of the kinematic ZMP.
    pub fn zmp(&self, k: usize, slider: [SliderState; 2], body_acc: [f64; 2]) -> Result<(f64, f64)> {
        let mut pos = self.positions[k].clone();
        let mut acc = self.accels[k].clone();
        pos[SLIDER_SEGMENT].x += slider[0].y;
        pos[SLIDER_SEGMENT].y += slider[1].y;
        acc[UPPER_BODY_SEGMENT].x += body_acc[0];
        acc[UPPER_BODY_SEGMENT].y += body_acc[1];
        let z = zmp_from_accel(&self.masses, &pos, &acc, GRAVITY)?;
        Ok((z.x, z.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkingController {
    /// PID from ZMP error straight to motor voltage.
    Pid,
    /// Variable-universe fuzzy reference with ADRC tracking, universes held
    /// at the middle stability level.
    VufcAdrc,
    /// As above with universes set from the online stability level.
    VufcAdrcGraded,
}

impl WalkingController {
    pub const ALL: [WalkingController; 3] = [
        WalkingController::Pid,
        WalkingController::VufcAdrc,
        WalkingController::VufcAdrcGraded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WalkingController::Pid => "PID",
            WalkingController::VufcAdrc => "VUFC-ADRC",
            WalkingController::VufcAdrcGraded => "VUFC-ADRC+grading",
        }
    }
}

/// Gains of the baseline PID (volts per metre of ZMP error).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkingScenario {
    pub duration: f64,
    pub dt: f64,
    pub controller: WalkingController,
    pub gait: GaitParams,
    pub segments: Vec<BodySegment>,
    pub plant: [PlantParams; 2],
    pub adrc: [AdrcConfig; 2],
    /// Base ZMP error span (m).
    pub e0: f64,
    /// Base ZMP error-change span (m per grading interval).
    pub ec0: f64,
    /// Level used by the ungraded controller.
    pub fixed_level: u8,
    pub models: [ClusterModel; 2],
    pub pid: [PidGains; 2],
    pub disturbances: DisturbanceSchedule,
    /// Window after a support switch used for the overshoot metric (s).
    pub switch_window: f64,
}

/// Base universe of the ZMP deviation (m).
pub const DEFAULT_E0: f64 = 0.04;
/// Base universe of the deviation change over one grading interval (m).
pub const DEFAULT_EC0: f64 = 0.12;

/// Default disturbance set: band-limited sway noise on the upper body,
/// band-limited rail load noise on each slider and a constant slider load
/// from 1 s on.
pub fn default_disturbances() -> DisturbanceSchedule {
    let ev = |start, axis, target, kind| Disturbance {
        start,
        axis,
        target,
        kind,
    };
    let body = DisturbanceKind::Noise {
        std_dev: 0.15,
        cutoff_hz: 2.0,
        end: f64::INFINITY,
    };
    let rail = DisturbanceKind::Noise {
        std_dev: 0.5,
        cutoff_hz: 1.0,
        end: f64::INFINITY,
    };
    DisturbanceSchedule {
        events: vec![
            ev(0.0, Axis::X, DisturbanceTarget::Body, body),
            ev(0.0, Axis::X, DisturbanceTarget::Plant, rail),
            ev(0.0, Axis::Y, DisturbanceTarget::Body, body),
            ev(0.0, Axis::Y, DisturbanceTarget::Plant, rail),
            ev(
                1.0,
                Axis::X,
                DisturbanceTarget::Plant,
                DisturbanceKind::Step { magnitude: 0.5 },
            ),
            ev(
                1.0,
                Axis::Y,
                DisturbanceTarget::Plant,
                DisturbanceKind::Step { magnitude: -0.5 },
            ),
        ],
        seed: 7,
    }
}

impl Default for WalkingScenario {
    fn default() -> Self {
        Self {
            duration: 6.0,
            dt: 0.001,
            controller: WalkingController::VufcAdrcGraded,
            gait: GaitParams::default(),
            segments: default_segments(),
            plant: [PlantParams::default_x(), PlantParams::default_y()],
            adrc: [AdrcConfig::x_axis(), AdrcConfig::y_axis()],
            e0: DEFAULT_E0,
            ec0: DEFAULT_EC0,
            fixed_level: 3,
            models: [
                ClusterModel::pretrained(Axis::X),
                ClusterModel::pretrained(Axis::Y),
            ],
            pid: [
                PidGains {
                    kp: 300.0,
                    ki: 100.0,
                    kd: 20.0,
                },
                PidGains {
                    kp: 300.0,
                    ki: 100.0,
                    kd: 20.0,
                },
            ],
            disturbances: default_disturbances(),
            switch_window: 0.1,
        }
    }
}

impl WalkingScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::param("duration", "must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return Err(Error::param("dt", "control rate must be at least 100 Hz"));
        }
        if !(1..=5).contains(&self.fixed_level) {
            return Err(Error::param("fixed_level", "must be 1..5"));
        }
        if !(self.e0 > 0.0 && self.ec0 > 0.0) {
            return Err(Error::param("e0", "universe spans must be positive"));
        }
        for a in &self.adrc {
            if (a.dt - self.dt).abs() > 1e-12 {
                return Err(Error::param("adrc.dt", "must equal the control step"));
            }
        }
        self.disturbances.validate()
    }

    /// Ticks per grading interval (one tenth of a step).
    pub fn grading_lag(&self) -> usize {
        ((self.gait.step_period() / 10.0) / self.dt)
            .round()
            .max(1.0) as usize
    }

    pub fn plan(&self) -> Result<WalkingPlan> {
        self.validate()?;
        WalkingPlan::new(&self.gait, &self.segments, self.duration, self.dt)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WalkingTrace {
    pub t: Vec<f64>,
    pub zmp: [Vec<f64>; 2],
    pub zmpd: [Vec<f64>; 2],
    pub level: [Vec<u8>; 2],
    pub y: [Vec<f64>; 2],
    /// Slider reference; zero under the PID baseline.
    pub yd: [Vec<f64>; 2],
    pub u: [Vec<f64>; 2],
}

impl WalkingTrace {
    pub fn error(&self, axis: usize) -> Vec<f64> {
        self.zmp[axis]
            .iter()
            .zip(&self.zmpd[axis])
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,zmp_x,zmpd_x,zmp_y,zmpd_y,level_x,level_y,y_x,y_y,yd_x,yd_y\n");
        for k in 0..self.t.len() {
            s.push_str(&format!(
                "{:.4},{:.6},{:.6},{:.6},{:.6},{},{},{:.6},{:.6},{:.6},{:.6}\n",
                self.t[k],
                self.zmp[0][k],
                self.zmpd[0][k],
                self.zmp[1][k],
                self.zmpd[1][k],
                self.level[0][k],
                self.level[1][k],
                self.y[0][k],
                self.y[1][k],
                self.yd[0][k],
                self.yd[1][k]
            ));
        }
        s
    }
}

/// ZMP tracking quality along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkingMetrics {
    /// Largest `|ZMP − ZMPd|` (m).
    pub max_tracking_error: f64,
    /// Mean over support switches of the peak `|ZMP − ZMPd|` inside the
    /// switch window (m).
    pub switch_overshoot: f64,
    /// Mean `|ZMP − ZMPd|` over the second half of every single-support
    /// phase (m).
    pub steady_state_error: f64,
    pub rms_error: f64,
    /// Share of samples at each level L1..L5.
    pub level_share: [f64; 5],
}

impl WalkingMetrics {
    pub fn share_at_most(&self, level: u8) -> f64 {
        self.level_share.iter().take(level as usize).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkingRun {
    pub controller: WalkingController,
    pub trace: WalkingTrace,
    pub metrics: [WalkingMetrics; 2],
    /// First time the ZMP left the support polygon.
    pub tipped_at: Option<f64>,
}

fn walking_metrics(
    trace: &WalkingTrace,
    axis: usize,
    plan: &WalkingPlan,
    window: usize,
) -> WalkingMetrics {
    let e = trace.error(axis);
    let abs: Vec<f64> = e.iter().map(|v| v.abs()).collect();
    let max_tracking_error = abs.iter().copied().fold(0.0, f64::max);
    let peaks: Vec<f64> = plan
        .switches
        .iter()
        .map(|&k| {
            abs[k..(k + window).min(abs.len())]
                .iter()
                .copied()
                .fold(0.0, f64::max)
        })
        .collect();
    let switch_overshoot = if peaks.is_empty() {
        0.0
    } else {
        peaks.iter().sum::<f64>() / peaks.len() as f64
    };
    // Second half of each single-support run.
    let mut settled = Vec::new();
    let mut start = 0;
    for k in 1..=plan.phases.len() {
        if k == plan.phases.len() || plan.phases[k] != plan.phases[start] {
            if plan.phases[start] == Phase::Single {
                settled.extend_from_slice(&abs[(start + k) / 2..k]);
            }
            start = k;
        }
    }
    let steady_state_error = if settled.is_empty() {
        0.0
    } else {
        settled.iter().sum::<f64>() / settled.len() as f64
    };
    let rms_error = (abs.iter().map(|v| v * v).sum::<f64>() / abs.len() as f64).sqrt();
    let mut level_share = [0.0; 5];
    for &l in &trace.level[axis] {
        level_share[(l.clamp(1, 5) - 1) as usize] += 1.0;
    }
    for s in level_share.iter_mut() {
        *s /= trace.level[axis].len() as f64;
    }
    WalkingMetrics {
        max_tracking_error,
        switch_overshoot,
        steady_state_error,
        rms_error,
        level_share,
    }
}

/// Simulates the walking loop on a precomputed plan.
pub fn run_walking_on(sc: &WalkingScenario, plan: &WalkingPlan) -> Result<WalkingRun> {
    sc.validate()?;
    let n = plan.len();
    let stream = sc.disturbances.realize(sc.dt, n)?;
    let lag = sc.grading_lag();
    let mut state = [SliderState::at(0.0), SliderState::at(0.0)];
    let mut adrc = [
        AdrcController::new(sc.adrc[0])?,
        AdrcController::new(sc.adrc[1])?,
    ];
    let mut vufc = [
        VufcState::new(sc.e0, sc.ec0, sc.plant[0].travel_limits()[1])?,
        VufcState::new(sc.e0, sc.ec0, sc.plant[1].travel_limits()[1])?,
    ];
    let mut integral = [0.0; 2];
    let mut feedback: [Vec<f64>; 2] = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut trace = WalkingTrace::default();
    let mut tipped_at = None;
    for k in 0..n {
        let t = k as f64 * sc.dt;
        let d = stream.at(k);
        let (zx, zy) = plan.zmp(k, state, d.body)?;
        if tipped_at.is_none() && !plan.support[k].contains(zx, zy) {
            tipped_at = Some(t);
        }
        trace.t.push(t);
        let zmp = [zx, zy];
        for a in 0..2 {
            let zd = if a == 0 {
                plan.zmpd[k].0
            } else {
                plan.zmpd[k].1
            };
            let e = zmp[a] - zd;
            feedback[a].push(e);
            let past = if k >= lag { feedback[a][k - lag] } else { e };
            let ec = e - past;
            trace.zmp[a].push(zmp[a]);
            trace.zmpd[a].push(zd);
            let [lo, hi] = sc.plant[a].travel_limits();
            let (level, yd, u) = match sc.controller {
                WalkingController::Pid => {
                    let g = sc.pid[a];
                    let prev = if k > 0 { feedback[a][k - 1] } else { e };
                    let lim = sc.adrc[a].voltage_limit;
                    let cand = integral[a] + e * sc.dt;
                    let raw = -(g.kp * e + g.ki * cand + g.kd * (e - prev) / sc.dt);
                    if raw.abs() <= lim {
                        integral[a] = cand;
                    }
                    (sc.models[a].classify(e, ec), 0.0, raw.clamp(-lim, lim))
                }
                WalkingController::VufcAdrc | WalkingController::VufcAdrcGraded => {
                    let level = sc.models[a].classify(e, ec);
                    let used = if sc.controller == WalkingController::VufcAdrcGraded {
                        level
                    } else {
                        sc.fixed_level
                    };
                    let yd = vufc[a].step(e, ec, used).clamp(lo, hi);
                    (level, yd, adrc[a].step(yd, state[a].y)?)
                }
            };
            trace.level[a].push(level);
            trace.y[a].push(state[a].y);
            trace.yd[a].push(yd);
            trace.u[a].push(u);
            state[a] = plant_step_disturbed(&state[a], u, d.plant[a], sc.dt, &sc.plant[a]);
        }
    }
    let window = (sc.switch_window / sc.dt).round().max(1.0) as usize;
    let metrics = [
        walking_metrics(&trace, 0, plan, window),
        walking_metrics(&trace, 1, plan, window),
    ];
    Ok(WalkingRun {
        controller: sc.controller,
        trace,
        metrics,
        tipped_at,
    })
}

pub fn run_walking(sc: &WalkingScenario) -> Result<WalkingRun> {
    run_walking_on(sc, &sc.plan()?)
}

/// Runs every controller on one shared plan.
pub fn walking_comparison(
    base: &WalkingScenario,
    controllers: &[WalkingController],
    exec: Exec,
) -> Result<Vec<WalkingRun>> {
    let plan = base.plan()?;
    exec.map(controllers, |&c| {
        run_walking_on(
            &WalkingScenario {
                controller: c,
                ..base.clone()
            },
            &plan,
        )
    })
    .into_iter()
    .collect()
}

/// Closed-loop `(ZMPe, ZMPec)` samples for grader training: one walk per
/// seed with the disturbance set scaled by a seed-dependent factor in
/// `[0.5, 3]`, every `stride`-th tick kept.
pub fn generate_grader_dataset(
    base: &WalkingScenario,
    seeds: &[u64],
    stride: usize,
    exec: Exec,
) -> Result<Vec<StabilitySample>> {
    use rand::{Rng, SeedableRng};
    let plan = base.plan()?;
    let stride = stride.max(1);
    let runs: Vec<Result<Vec<StabilitySample>>> = exec.map(seeds, |&seed| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let scale: f64 = rng.random_range(0.5..3.0);
        let mut sc = base.clone();
        sc.controller = WalkingController::VufcAdrc;
        sc.disturbances.seed = seed;
        for ev in sc.disturbances.events.iter_mut() {
            ev.kind = match ev.kind {
                DisturbanceKind::Step { magnitude } => DisturbanceKind::Step {
                    magnitude: magnitude * scale,
                },
                DisturbanceKind::Impulse {
                    magnitude,
                    duration,
                } => DisturbanceKind::Impulse {
                    magnitude: magnitude * scale,
                    duration,
                },
                DisturbanceKind::Noise {
                    std_dev,
                    cutoff_hz,
                    end,
                } => DisturbanceKind::Noise {
                    std_dev: std_dev * scale,
                    cutoff_hz,
                    end,
                },
            };
        }
        let run = run_walking_on(&sc, &plan)?;
        let lag = sc.grading_lag();
        let mut out = Vec::new();
        for (a, axis) in [Axis::X, Axis::Y].into_iter().enumerate() {
            let e = run.trace.error(a);
            out.extend(
                crate::grader::samples_from_errors(&e, lag, axis)
                    .into_iter()
                    .step_by(stride),
            );
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in runs {
        all.extend(r?);
    }
    Ok(all)
}
