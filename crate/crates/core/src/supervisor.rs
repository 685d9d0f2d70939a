//! Hybrid-automaton supervisor choosing the operating mode.
//!
//! Four modes (steering control, walking control, straight-line, parked)
//! are linked by eight guarded transitions. Guards read four boolean motion
//! signals obtained by deadband thresholding.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Steady-state steering stability control.
    Q1,
    /// Walking stability control.
    Q2,
    /// Straight-line driving.
    Q3,
    /// Parked.
    Q4,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Q1, Mode::Q2, Mode::Q3, Mode::Q4];

    pub fn index(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.index())
    }
}

/// Boolean motion signals: steering angle, longitudinal speed, leg joint
/// rate and slider speed, each set when its magnitude exceeds a deadband.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GuardSignals {
    pub steer: bool,
    pub speed: bool,
    pub joint_rate: bool,
    pub slider_rate: bool,
}

impl GuardSignals {
    pub const fn new(steer: bool, speed: bool, joint_rate: bool, slider_rate: bool) -> Self {
        Self {
            steer,
            speed,
            joint_rate,
            slider_rate,
        }
    }

    /// All 16 combinations, indexed by the bit pattern `δ ux θ̇ ẏ`.
    pub fn all() -> impl Iterator<Item = GuardSignals> {
        (0u8..16).map(Self::from_bits)
    }

    pub fn from_bits(bits: u8) -> Self {
        Self::new(bits & 8 != 0, bits & 4 != 0, bits & 2 != 0, bits & 1 != 0)
    }

    pub fn bits(self) -> u8 {
        (self.steer as u8) << 3
            | (self.speed as u8) << 2
            | (self.joint_rate as u8) << 1
            | self.slider_rate as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// rad
    pub steer: f64,
    /// m/s
    pub speed: f64,
    /// rad/s
    pub joint_rate: f64,
    /// m/s
    pub slider_rate: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            steer: 0.5f64.to_radians(),
            speed: 0.05,
            joint_rate: 0.01,
            slider_rate: 0.001,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("steer threshold", self.steer),
            ("speed threshold", self.speed),
            ("joint-rate threshold", self.joint_rate),
            ("slider-rate threshold", self.slider_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// Thresholds continuous measurements into guard signals (strict `>`).
pub fn derive_signals(
    steer: f64,
    speed: f64,
    max_joint_rate: f64,
    slider_rate: f64,
    th: &Thresholds,
) -> GuardSignals {
    GuardSignals {
        steer: steer.abs() > th.steer,
        speed: speed.abs() > th.speed,
        joint_rate: max_joint_rate.abs() > th.joint_rate,
        slider_rate: slider_rate.abs() > th.slider_rate,
    }
}

/// Required value per signal; `None` means unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guard {
    pub steer: Option<bool>,
    pub speed: Option<bool>,
    pub joint_rate: Option<bool>,
    pub slider_rate: Option<bool>,
}

impl Guard {
    const fn any() -> Self {
        Self {
            steer: None,
            speed: None,
            joint_rate: None,
            slider_rate: None,
        }
    }

    pub fn holds(&self, s: GuardSignals) -> bool {
        let ok = |req: Option<bool>, v: bool| req.is_none_or(|r| r == v);
        ok(self.steer, s.steer)
            && ok(self.speed, s.speed)
            && ok(self.joint_rate, s.joint_rate)
            && ok(self.slider_rate, s.slider_rate)
    }

    pub fn literal_count(&self) -> usize {
        [self.steer, self.speed, self.joint_rate, self.slider_rate]
            .iter()
            .filter(|x| x.is_some())
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub from: Mode,
    pub to: Mode,
    pub guard: Guard,
}

/// The eight transitions with their guards.
pub const TRANSITIONS: [Transition; 8] = [
    Transition {
        from: Mode::Q1,
        to: Mode::Q3,
        guard: Guard {
            steer: Some(false),
            ..Guard::any()
        },
    },
    Transition {
        from: Mode::Q3,
        to: Mode::Q1,
        guard: Guard {
            steer: Some(true),
            slider_rate: Some(true),
            ..Guard::any()
        },
    },
    Transition {
        from: Mode::Q2,
        to: Mode::Q4,
        guard: Guard {
            joint_rate: Some(false),
            ..Guard::any()
        },
    },
    Transition {
        from: Mode::Q4,
        to: Mode::Q2,
        guard: Guard {
            joint_rate: Some(true),
            slider_rate: Some(true),
            ..Guard::any()
        },
    },
    Transition {
        from: Mode::Q3,
        to: Mode::Q4,
        guard: Guard {
            speed: Some(false),
            ..Guard::any()
        },
    },
    Transition {
        from: Mode::Q4,
        to: Mode::Q3,
        guard: Guard {
            speed: Some(true),
            ..Guard::any()
        },
    },
    Transition {
        from: Mode::Q1,
        to: Mode::Q4,
        guard: Guard {
            speed: Some(false),
            ..Guard::any()
        },
    },
    Transition {
        from: Mode::Q4,
        to: Mode::Q1,
        guard: Guard {
            steer: Some(true),
            speed: Some(true),
            slider_rate: Some(true),
            ..Guard::any()
        },
    },
];

/// Mode invariant as a full signal pattern.
pub fn invariant(mode: Mode) -> GuardSignals {
    match mode {
        Mode::Q1 => GuardSignals::new(true, true, false, true),
        Mode::Q2 => GuardSignals::new(false, false, true, true),
        Mode::Q3 => GuardSignals::new(false, true, false, false),
        Mode::Q4 => GuardSignals::new(false, false, false, false),
    }
}

/// Outgoing transitions of `mode` enabled by `signals`, in priority order:
/// transitions into the parked mode first, then more specific guards.
pub fn enabled(mode: Mode, signals: GuardSignals) -> Vec<Transition> {
    let mut v: Vec<Transition> = TRANSITIONS
        .iter()
        .filter(|t| t.from == mode && t.guard.holds(signals))
        .copied()
        .collect();
    v.sort_by_key(|t| (t.to != Mode::Q4, std::cmp::Reverse(t.guard.literal_count())));
    v
}

pub const DEFAULT_DWELL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutomatonState {
    pub mode: Mode,
    pub time_in_mode: f64,
}

impl Default for AutomatonState {
    fn default() -> Self {
        Self {
            mode: Mode::Q4,
            time_in_mode: 0.0,
        }
    }
}

/// Result of one synchronous step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: AutomatonState,
    pub fired: Option<Transition>,
    /// More than one outgoing guard was enabled; the priority order decided.
    pub conflict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supervisor {
    pub dwell: f64,
    pub thresholds: Thresholds,
}

impl Default for Supervisor {
    fn default() -> Self {
        Self {
            dwell: DEFAULT_DWELL,
            thresholds: Thresholds::default(),
        }
    }
}

impl Supervisor {
    /// Advances the timer by `dt` and fires at most one transition once the
    /// dwell time has elapsed.
    pub fn step(&self, state: AutomatonState, signals: GuardSignals, dt: f64) -> StepOutcome {
        let time_in_mode = state.time_in_mode + dt;
        let advanced = AutomatonState {
            mode: state.mode,
            time_in_mode,
        };
        if time_in_mode + 1e-12 < self.dwell {
            return StepOutcome {
                state: advanced,
                fired: None,
                conflict: false,
            };
        }
        let candidates = enabled(state.mode, signals);
        let conflict = candidates.len() > 1;
        if conflict {
            log::debug!(
                "{}: {} guards enabled for signals {:04b}, taking {} -> {}",
                state.mode,
                candidates.len(),
                signals.bits(),
                candidates[0].from,
                candidates[0].to
            );
        }
        match candidates.first() {
            Some(t) => StepOutcome {
                state: AutomatonState {
                    mode: t.to,
                    time_in_mode: 0.0,
                },
                fired: Some(*t),
                conflict,
            },
            None => StepOutcome {
                state: advanced,
                fired: None,
                conflict,
            },
        }
    }

    /// Replays a signal trace from `init`, returning the mode after every step.
    pub fn replay(&self, init: AutomatonState, signals: &[GuardSignals], dt: f64) -> Vec<Mode> {
        let mut s = init;
        signals
            .iter()
            .map(|&sig| {
                s = self.step(s, sig, dt).state;
                s.mode
            })
            .collect()
    }
}

/// Stability controller selected by a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerSelection {
    SteeringFuzzyPid,
    WalkingVufcAdrc,
    None,
}

pub fn mode_output(mode: Mode) -> ControllerSelection {
    match mode {
        Mode::Q1 => ControllerSelection::SteeringFuzzyPid,
        Mode::Q2 => ControllerSelection::WalkingVufcAdrc,
        Mode::Q3 | Mode::Q4 => ControllerSelection::None,
    }
}

/// CSV mode trace with columns `t,mode,st_delta,st_ux,st_theta,st_ydot`.
pub fn trace_csv(times: &[f64], modes: &[Mode], signals: &[GuardSignals]) -> String {
    let mut s = String::from("t,mode,st_delta,st_ux,st_theta,st_ydot\n");
    for ((t, m), g) in times.iter().zip(modes).zip(signals) {
        s.push_str(&format!(
            "{t:.4},{m},{},{},{},{}\n",
            g.steer as u8, g.speed as u8, g.joint_rate as u8, g.slider_rate as u8
        ));
    }
    s
}
