use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fuzzy::{FuzzyPidConfig, FuzzyPidState, PidMode};
use crate::harness::metrics::{compute_metrics, Metrics};
use crate::mechanism::{plant_step, PlantParams, SliderState};
use crate::vehicle::{VehicleParams, K_TARGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringController {
    /// Slider held still.
    None,
    /// Fixed-gain PID.
    Pid,
    /// PID with fuzzy gain scheduling.
    FuzzyPid,
}

impl SteeringController {
    pub fn name(self) -> &'static str {
        match self {
            SteeringController::None => "none",
            SteeringController::Pid => "PID",
            SteeringController::FuzzyPid => "Fuzzy-PID",
        }
    }
}

/// Stability-factor regulation with the longitudinal slider.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringScenario {
    pub duration: f64,
    pub dt: f64,
    pub controller: SteeringController,
    pub vehicle: VehicleParams,
    pub plant: PlantParams,
    pub target_k: f64,
    /// `Ke = error_gain·(K − Kd)`.
    pub error_gain: f64,
    /// `Kec = rate_gain·dK/dt`.
    pub rate_gain: f64,
    pub pid: FuzzyPidConfig,
}

/// Error scaling of the stability factor.
pub const DEFAULT_ERROR_GAIN: f64 = 2000.0;
/// Rate scaling of the stability factor (s).
pub const DEFAULT_RATE_GAIN: f64 = 2000.0;
/// Quantization of `Ke` and `Kec` onto the fuzzy input universes.
pub const DEFAULT_KE_QUANT: f64 = 0.05;
pub const DEFAULT_KEC_QUANT: f64 = 0.001;

impl Default for SteeringScenario {
    fn default() -> Self {
        Self {
            duration: 4.0,
            dt: 0.001,
            controller: SteeringController::FuzzyPid,
            vehicle: VehicleParams::default(),
            plant: PlantParams::default_x(),
            target_k: K_TARGET,
            error_gain: DEFAULT_ERROR_GAIN,
            rate_gain: DEFAULT_RATE_GAIN,
            pid: FuzzyPidConfig {
                ke_quant: DEFAULT_KE_QUANT,
                kec_quant: DEFAULT_KEC_QUANT,
                ..FuzzyPidConfig::default()
            },
        }
    }
}

impl SteeringScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::param("duration", "must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return Err(Error::param("dt", "control rate must be at least 100 Hz"));
        }
        if !(self.error_gain > 0.0 && self.rate_gain >= 0.0) {
            return Err(Error::param("error_gain", "scaling gains must be positive"));
        }
        self.vehicle.validate()
    }

    fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SteeringTrace {
    pub t: Vec<f64>,
    pub k: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
}

impl SteeringTrace {
    pub fn to_csv(&self, kd: f64) -> String {
        let mut s = String::from("t,K,Kd,y_x,u\n");
        for i in 0..self.t.len() {
            s.push_str(&format!(
                "{:.4},{:.8},{:.8},{:.6},{:.5}\n",
                self.t[i], self.k[i], kd, self.y[i], self.u[i]
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringRun {
    pub controller: SteeringController,
    pub trace: SteeringTrace,
    /// `None` for the uncontrolled run.
    pub metrics: Option<Metrics>,
    /// The slider touched a travel stop.
    pub saturated: bool,
    pub final_displacement: f64,
}

/// Simulates the steering loop; sample 0 is the initial state.
pub fn run_steering(sc: &SteeringScenario) -> Result<SteeringRun> {
    sc.validate()?;
    let n = sc.steps();
    let mode = match sc.controller {
        SteeringController::FuzzyPid => PidMode::Fuzzy,
        _ => PidMode::Fixed,
    };
    let mut pid = FuzzyPidState::new(sc.pid, mode);
    let [lo, hi] = sc.plant.travel_limits();
    let mut state = SliderState::at(0.0);
    let mut trace = SteeringTrace::default();
    let mut k_prev = sc.vehicle.stability_factor_at(state.y)?;
    let mut saturated = false;
    for i in 0..=n {
        let k = sc.vehicle.stability_factor_at(state.y)?;
        let u = if sc.controller == SteeringController::None {
            0.0
        } else {
            let ke = sc.error_gain * (k - sc.target_k);
            let kec = if i == 0 {
                0.0
            } else {
                sc.rate_gain * (k - k_prev) / sc.dt
            };
            pid.step(ke, kec, sc.dt)
        };
        trace.t.push(i as f64 * sc.dt);
        trace.k.push(k);
        trace.y.push(state.y);
        trace.u.push(u);
        k_prev = k;
        if i < n {
            state = plant_step(&state, u, sc.dt, &sc.plant);
            saturated |= state.y <= lo || state.y >= hi;
        }
    }
    let metrics = match sc.controller {
        SteeringController::None => None,
        _ => Some(compute_metrics(&trace.k, sc.dt, trace.k[0], sc.target_k)?),
    };
    let final_displacement = *trace.y.last().expect("at least one sample");
    Ok(SteeringRun {
        controller: sc.controller,
        trace,
        metrics,
        saturated,
        final_displacement,
    })
}

/// Runs the same scenario under each controller.
pub fn steering_comparison(
    base: &SteeringScenario,
    controllers: &[SteeringController],
    exec: Exec,
) -> Result<Vec<SteeringRun>> {
    exec.map(controllers, |&c| {
        run_steering(&SteeringScenario {
            controller: c,
            ..base.clone()
        })
    })
    .into_iter()
    .collect()
}
