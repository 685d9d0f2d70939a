//! Run configuration: a TOML file whose every key is optional and checked.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use comstab::adrc::AdrcConfig;
use comstab::fuzzy::FuzzyPidConfig;
use comstab::gait::GaitParams;
use comstab::grader::{models_from_text, ClusterModel};
use comstab::harness::{
    default_disturbances, Disturbance, DisturbanceKind, DisturbanceSchedule, DisturbanceTarget,
    PidGains, SteeringController, SteeringScenario, WalkingController, WalkingScenario,
    DEFAULT_E0, DEFAULT_EC0, DEFAULT_ERROR_GAIN, DEFAULT_KEC_QUANT, DEFAULT_KE_QUANT,
    DEFAULT_RATE_GAIN,
};
use comstab::mechanism::{Axis, PlantParams, DEFAULT_B0, DEFAULT_VISCOUS_DAMPING};
use comstab::vehicle::{VehicleParams, K_CENTER, K_TARGET, TARGET_EXCURSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub plant: PlantSection,
    pub vehicle: VehicleSection,
    pub steering: SteeringSection,
    pub gait: GaitSection,
    pub walking: WalkingSection,
    pub adrc: AdrcSection,
    pub grader: GraderSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantSection {
    pub b0: f64,
    pub viscous_damping: f64,
    pub slider_mass: f64,
    pub travel_x: f64,
    pub travel_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleSection {
    pub total_mass: f64,
    pub yaw_inertia: f64,
    pub wheelbase: f64,
    pub k_center: f64,
    pub k_target: f64,
    pub excursion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteeringSection {
    pub duration: f64,
    pub dt: f64,
    pub controllers: Vec<SteeringName>,
    pub error_gain: f64,
    pub rate_gain: f64,
    pub ke_quant: f64,
    pub kec_quant: f64,
    pub kp0: f64,
    pub ki0: f64,
    pub kd0: f64,
    pub ke_span: f64,
    pub kec_span: f64,
    pub dkp_span: f64,
    pub dki_span: f64,
    pub dkd_span: f64,
    pub voltage_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitSection {
    pub com_height: f64,
    pub stride_length: f64,
    pub step_height: f64,
    pub single_support: f64,
    pub double_support: f64,
    pub step_width: f64,
    pub foot_length: f64,
    pub foot_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkingSection {
    pub duration: f64,
    pub dt: f64,
    pub controllers: Vec<WalkingName>,
    pub e0: f64,
    pub ec0: f64,
    pub fixed_level: u8,
    pub switch_window: f64,
    pub disturbance_scale: f64,
    pub pid_kp: f64,
    pub pid_ki: f64,
    pub pid_kd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disturbances: Option<Vec<DisturbanceSpec>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdrcAxis {
    pub wo: f64,
    pub wc: f64,
    pub td_speed: f64,
    pub td_filter: f64,
    pub voltage_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdrcSection {
    pub x: AdrcAxis,
    pub y: AdrcAxis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraderSection {
    pub samples: usize,
    pub runs: usize,
    pub stride: usize,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SteeringName {
    None,
    Pid,
    FuzzyPid,
}

impl From<SteeringName> for SteeringController {
    fn from(n: SteeringName) -> Self {
        match n {
            SteeringName::None => SteeringController::None,
            SteeringName::Pid => SteeringController::Pid,
            SteeringName::FuzzyPid => SteeringController::FuzzyPid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WalkingName {
    Pid,
    VufcAdrc,
    VufcAdrcGraded,
}

impl From<WalkingName> for WalkingController {
    fn from(n: WalkingName) -> Self {
        match n {
            WalkingName::Pid => WalkingController::Pid,
            WalkingName::VufcAdrc => WalkingController::VufcAdrc,
            WalkingName::VufcAdrcGraded => WalkingController::VufcAdrcGraded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetName {
    Plant,
    Body,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Step,
    Impulse,
    Noise,
}

/// One `[[walking.disturbances]]` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub start: f64,
    pub axis: AxisName,
    pub target: TargetName,
    pub kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_dev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: default_disturbances().seed,
            plant: PlantSection::default(),
            vehicle: VehicleSection::default(),
            steering: SteeringSection::default(),
            gait: GaitSection::default(),
            walking: WalkingSection::default(),
            adrc: AdrcSection::default(),
            grader: GraderSection::default(),
        }
    }
}

impl Default for PlantSection {
    fn default() -> Self {
        let x = PlantParams::default_x();
        let y = PlantParams::default_y();
        Self {
            b0: DEFAULT_B0,
            viscous_damping: DEFAULT_VISCOUS_DAMPING,
            slider_mass: x.slider_mass(),
            travel_x: x.travel_limits()[1],
            travel_y: y.travel_limits()[1],
        }
    }
}

impl Default for VehicleSection {
    fn default() -> Self {
        let v = VehicleParams::default();
        Self {
            total_mass: v.total_mass,
            yaw_inertia: v.yaw_inertia,
            wheelbase: v.wheelbase,
            k_center: K_CENTER,
            k_target: K_TARGET,
            excursion: TARGET_EXCURSION,
        }
    }
}

impl Default for SteeringSection {
    fn default() -> Self {
        let sc = SteeringScenario::default();
        let pid = FuzzyPidConfig::default();
        Self {
            duration: sc.duration,
            dt: sc.dt,
            controllers: vec![SteeringName::Pid, SteeringName::FuzzyPid],
            error_gain: DEFAULT_ERROR_GAIN,
            rate_gain: DEFAULT_RATE_GAIN,
            ke_quant: DEFAULT_KE_QUANT,
            kec_quant: DEFAULT_KEC_QUANT,
            kp0: pid.kp0,
            ki0: pid.ki0,
            kd0: pid.kd0,
            ke_span: pid.ke_span,
            kec_span: pid.kec_span,
            dkp_span: pid.dkp_span,
            dki_span: pid.dki_span,
            dkd_span: pid.dkd_span,
            voltage_limit: pid.voltage_limit,
        }
    }
}

impl Default for GaitSection {
    fn default() -> Self {
        let g = GaitParams::default();
        Self {
            com_height: g.com_height,
            stride_length: g.stride_length,
            step_height: g.step_height,
            single_support: g.single_support,
            double_support: g.double_support,
            step_width: g.step_width,
            foot_length: g.foot_length,
            foot_width: g.foot_width,
        }
    }
}

impl Default for WalkingSection {
    fn default() -> Self {
        let sc = WalkingScenario::default();
        Self {
            duration: sc.duration,
            dt: sc.dt,
            controllers: vec![
                WalkingName::Pid,
                WalkingName::VufcAdrc,
                WalkingName::VufcAdrcGraded,
            ],
            e0: DEFAULT_E0,
            ec0: DEFAULT_EC0,
            fixed_level: sc.fixed_level,
            switch_window: sc.switch_window,
            disturbance_scale: 1.0,
            pid_kp: sc.pid[0].kp,
            pid_ki: sc.pid[0].ki,
            pid_kd: sc.pid[0].kd,
            model: None,
            disturbances: None,
        }
    }
}

impl AdrcAxis {
    fn from_config(c: AdrcConfig) -> Self {
        Self {
            wo: c.wo,
            wc: c.wc,
            td_speed: c.td_speed,
            td_filter: c.td_filter,
            voltage_limit: c.voltage_limit,
        }
    }
}

impl Default for AdrcAxis {
    fn default() -> Self {
        Self::from_config(AdrcConfig::x_axis())
    }
}

impl Default for AdrcSection {
    fn default() -> Self {
        Self {
            x: AdrcAxis::from_config(AdrcConfig::x_axis()),
            y: AdrcAxis::from_config(AdrcConfig::y_axis()),
        }
    }
}

impl Default for GraderSection {
    fn default() -> Self {
        Self {
            samples: 10_000,
            runs: 8,
            stride: 4,
            max_iter: 1000,
        }
    }
}

/// Where a default value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Published,
    Design,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Published => "published value",
            Source::Design => "design default",
        }
    }
}

/// Every configuration key with its source and meaning.
pub const KEYS: &[(&str, Source, &str)] = &[
    ("seed", Source::Design, "seed of the walking disturbance noise"),
    ("plant.b0", Source::Published, "slider input coefficient (m/(s²·V))"),
    ("plant.viscous_damping", Source::Design, "screw viscous damping Bz (N·m·s/rad)"),
    ("plant.slider_mass", Source::Design, "slider (battery) mass (kg)"),
    ("plant.travel_x", Source::Design, "X slider travel half-range (m)"),
    ("plant.travel_y", Source::Design, "Y slider travel half-range (m)"),
    ("vehicle.total_mass", Source::Design, "vehicle mass (kg)"),
    ("vehicle.yaw_inertia", Source::Design, "yaw inertia (kg·m²)"),
    ("vehicle.wheelbase", Source::Design, "wheelbase (m)"),
    ("vehicle.k_center", Source::Published, "stability factor with the slider centred (s²/m²)"),
    ("vehicle.k_target", Source::Published, "desired stability factor (s²/m²)"),
    ("vehicle.excursion", Source::Published, "slider position reaching k_target (m)"),
    ("steering.duration", Source::Design, "simulated time (s)"),
    ("steering.dt", Source::Design, "control step (s)"),
    ("steering.controllers", Source::Design, "variants to run: none, pid, fuzzy-pid"),
    ("steering.error_gain", Source::Design, "Ke = error_gain·(K − Kd)"),
    ("steering.rate_gain", Source::Design, "Kec = rate_gain·dK/dt (s)"),
    ("steering.ke_quant", Source::Design, "quantization of Ke onto its universe"),
    ("steering.kec_quant", Source::Design, "quantization of Kec onto its universe"),
    ("steering.kp0", Source::Published, "base proportional gain"),
    ("steering.ki0", Source::Published, "base integral gain"),
    ("steering.kd0", Source::Published, "base derivative gain"),
    ("steering.ke_span", Source::Published, "Ke universe half-width"),
    ("steering.kec_span", Source::Published, "Kec universe half-width"),
    ("steering.dkp_span", Source::Published, "Δkp universe half-width"),
    ("steering.dki_span", Source::Published, "Δki universe half-width"),
    ("steering.dkd_span", Source::Published, "Δkd universe half-width"),
    ("steering.voltage_limit", Source::Design, "motor voltage limit (V)"),
    ("gait.com_height", Source::Published, "pendulum height (m)"),
    ("gait.stride_length", Source::Published, "swing-foot travel per step (m)"),
    ("gait.step_height", Source::Published, "peak swing-foot lift (m)"),
    ("gait.single_support", Source::Published, "single-support time Ts (s)"),
    ("gait.double_support", Source::Published, "double-support time Td (s)"),
    ("gait.step_width", Source::Design, "lateral distance between foot lines (m)"),
    ("gait.foot_length", Source::Design, "foot sole length (m)"),
    ("gait.foot_width", Source::Design, "foot sole width (m)"),
    ("walking.duration", Source::Published, "simulated time (s)"),
    ("walking.dt", Source::Design, "control step (s)"),
    ("walking.controllers", Source::Design, "variants to run: pid, vufc-adrc, vufc-adrc-graded"),
    ("walking.e0", Source::Design, "base ZMP-error universe half-width (m)"),
    ("walking.ec0", Source::Design, "base ZMP-error-change universe half-width (m)"),
    ("walking.fixed_level", Source::Design, "stability level used by the ungraded variant"),
    ("walking.switch_window", Source::Design, "window after a support switch for overshoot (s)"),
    ("walking.disturbance_scale", Source::Design, "multiplies every disturbance magnitude"),
    ("walking.pid_kp", Source::Design, "baseline PID proportional gain (V/m)"),
    ("walking.pid_ki", Source::Design, "baseline PID integral gain (V/(m·s))"),
    ("walking.pid_kd", Source::Design, "baseline PID derivative gain (V·s/m)"),
    ("walking.model", Source::Design, "optional grader model file (default: built-in centres)"),
    ("walking.disturbances", Source::Design, "optional [[walking.disturbances]] list replacing the built-in schedule"),
    ("adrc.x.wo", Source::Published, "X observer bandwidth (rad/s)"),
    ("adrc.x.wc", Source::Published, "X controller bandwidth (rad/s)"),
    ("adrc.x.td_speed", Source::Design, "X differentiator speed factor (m/s²)"),
    ("adrc.x.td_filter", Source::Design, "X differentiator filter step (s)"),
    ("adrc.x.voltage_limit", Source::Design, "X motor voltage limit (V)"),
    ("adrc.y.wo", Source::Published, "Y observer bandwidth (rad/s)"),
    ("adrc.y.wc", Source::Published, "Y controller bandwidth (rad/s)"),
    ("adrc.y.td_speed", Source::Design, "Y differentiator speed factor (m/s²)"),
    ("adrc.y.td_filter", Source::Design, "Y differentiator filter step (s)"),
    ("adrc.y.voltage_limit", Source::Design, "Y motor voltage limit (V)"),
    ("grader.samples", Source::Design, "training samples per axis"),
    ("grader.runs", Source::Design, "perturbed walking runs feeding the dataset"),
    ("grader.stride", Source::Design, "keep every n-th tick of each run"),
    ("grader.max_iter", Source::Design, "k-means iteration cap"),
];

/// Keys present only when set.
#[cfg(test)]
pub const OPTIONAL_KEYS: &[&str] = &["walking.model", "walking.disturbances"];

/// Flattens a TOML table into `dotted.key = value` pairs.
pub fn flatten(table: &toml::Table) -> Vec<(String, String)> {
    fn walk(prefix: &str, table: &toml::Table, out: &mut Vec<(String, String)>) {
        for (k, v) in table {
            let key = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            match v {
                toml::Value::Table(t) => walk(&key, t, out),
                other => out.push((key, other.to_string())),
            }
        }
    }
    let mut out = Vec::new();
    walk("", table, &mut out);
    out
}

/// The key reference appended to `--help`.
pub fn key_reference() -> String {
    let table = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
    let defaults = flatten(&table);
    let mut s = String::from(
        "Configuration keys (TOML, all optional; command-line flags override the file):\n",
    );
    for (key, source, what) in KEYS {
        let default = defaults
            .iter()
            .find(|(k, _)| k == key)
            .map_or("unset", |(_, v)| v.as_str());
        s.push_str(&format!(
            "  {key:<26} {what}\n  {:<26} default {default} ({})\n",
            "",
            source.label()
        ));
    }
    s
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn plant(&self, axis: Axis) -> Result<PlantParams> {
        let travel = match axis {
            Axis::X => self.plant.travel_x,
            Axis::Y => self.plant.travel_y,
        };
        Ok(PlantParams::with_b0(
            self.plant.b0,
            self.plant.viscous_damping,
            self.plant.slider_mass,
            [-travel, travel],
        )?)
    }

    pub fn vehicle(&self) -> Result<VehicleParams> {
        let v = &self.vehicle;
        Ok(VehicleParams::calibrate_to(
            v.total_mass,
            v.yaw_inertia,
            v.wheelbase,
            self.plant.slider_mass,
            v.k_center,
            v.k_target,
            v.excursion,
        )?)
    }

    pub fn steering(&self) -> Result<SteeringScenario> {
        let s = &self.steering;
        let sc = SteeringScenario {
            duration: s.duration,
            dt: s.dt,
            controller: SteeringController::FuzzyPid,
            vehicle: self.vehicle()?,
            plant: self.plant(Axis::X)?,
            target_k: self.vehicle.k_target,
            error_gain: s.error_gain,
            rate_gain: s.rate_gain,
            pid: FuzzyPidConfig {
                kp0: s.kp0,
                ki0: s.ki0,
                kd0: s.kd0,
                ke_span: s.ke_span,
                kec_span: s.kec_span,
                dkp_span: s.dkp_span,
                dki_span: s.dki_span,
                dkd_span: s.dkd_span,
                ke_quant: s.ke_quant,
                kec_quant: s.kec_quant,
                voltage_limit: s.voltage_limit,
            },
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn gait(&self) -> GaitParams {
        let g = &self.gait;
        GaitParams {
            com_height: g.com_height,
            stride_length: g.stride_length,
            step_height: g.step_height,
            single_support: g.single_support,
            double_support: g.double_support,
            step_width: g.step_width,
            foot_length: g.foot_length,
            foot_width: g.foot_width,
            ..GaitParams::default()
        }
    }

    fn adrc(&self, a: &AdrcAxis) -> AdrcConfig {
        AdrcConfig {
            wo: a.wo,
            wc: a.wc,
            b0: self.plant.b0,
            td_speed: a.td_speed,
            td_filter: a.td_filter,
            dt: self.walking.dt,
            voltage_limit: a.voltage_limit,
        }
    }

    pub fn models(&self) -> Result<[ClusterModel; 2]> {
        let mut models = [
            ClusterModel::pretrained(Axis::X),
            ClusterModel::pretrained(Axis::Y),
        ];
        if let Some(path) = &self.walking.model {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read grader model {}", path.display()))?;
            for m in models_from_text(&text)
                .with_context(|| format!("invalid grader model {}", path.display()))?
            {
                let slot = match m.axis {
                    Axis::X => 0,
                    Axis::Y => 1,
                };
                models[slot] = m;
            }
        }
        Ok(models)
    }

    pub fn disturbances(&self) -> Result<DisturbanceSchedule> {
        let mut schedule = match &self.walking.disturbances {
            None => default_disturbances(),
            Some(list) => DisturbanceSchedule {
                events: list
                    .iter()
                    .enumerate()
                    .map(|(i, d)| d.build().with_context(|| format!("walking.disturbances[{i}]")))
                    .collect::<Result<_>>()?,
                seed: 0,
            },
        };
        schedule.seed = self.seed;
        let k = self.walking.disturbance_scale;
        if !(k >= 0.0) || !k.is_finite() {
            bail!("walking.disturbance_scale must be a non-negative number");
        }
        for ev in &mut schedule.events {
            ev.kind = match ev.kind {
                DisturbanceKind::Step { magnitude } => DisturbanceKind::Step {
                    magnitude: k * magnitude,
                },
                DisturbanceKind::Impulse {
                    magnitude,
                    duration,
                } => DisturbanceKind::Impulse {
                    magnitude: k * magnitude,
                    duration,
                },
                DisturbanceKind::Noise {
                    std_dev,
                    cutoff_hz,
                    end,
                } => DisturbanceKind::Noise {
                    std_dev: k * std_dev,
                    cutoff_hz,
                    end,
                },
            };
        }
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn walking(&self) -> Result<WalkingScenario> {
        let w = &self.walking;
        let pid = PidGains {
            kp: w.pid_kp,
            ki: w.pid_ki,
            kd: w.pid_kd,
        };
        let sc = WalkingScenario {
            duration: w.duration,
            dt: w.dt,
            controller: WalkingController::VufcAdrcGraded,
            gait: self.gait(),
            plant: [self.plant(Axis::X)?, self.plant(Axis::Y)?],
            adrc: [self.adrc(&self.adrc.x), self.adrc(&self.adrc.y)],
            e0: w.e0,
            ec0: w.ec0,
            fixed_level: w.fixed_level,
            models: self.models()?,
            pid: [pid, pid],
            disturbances: self.disturbances()?,
            switch_window: w.switch_window,
            ..WalkingScenario::default()
        };
        sc.validate()?;
        Ok(sc)
    }
}

impl DisturbanceSpec {
    fn build(&self) -> Result<Disturbance> {
        let need = |v: Option<f64>, name: &str| {
            v.with_context(|| format!("`{name}` is required for this kind"))
        };
        let kind = match self.kind {
            KindName::Step => DisturbanceKind::Step {
                magnitude: need(self.magnitude, "magnitude")?,
            },
            KindName::Impulse => DisturbanceKind::Impulse {
                magnitude: need(self.magnitude, "magnitude")?,
                duration: need(self.duration, "duration")?,
            },
            KindName::Noise => DisturbanceKind::Noise {
                std_dev: need(self.std_dev, "std_dev")?,
                cutoff_hz: need(self.cutoff_hz, "cutoff_hz")?,
                end: self.end.unwrap_or(f64::INFINITY),
            },
        };
        Ok(Disturbance {
            start: self.start,
            axis: match self.axis {
                AxisName::X => Axis::X,
                AxisName::Y => Axis::Y,
            },
            target: match self.target {
                TargetName::Plant => DisturbanceTarget::Plant,
                TargetName::Body => DisturbanceTarget::Body,
            },
            kind,
        })
    }
}
