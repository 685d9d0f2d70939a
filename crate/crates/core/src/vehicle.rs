//! Two-degree-of-freedom yaw-plane steering model.
//!
//! The slider shifts the vehicle COM along the wheelbase, which changes the
//! front/rear distances `a`, `b` and therefore the stability factor
//! `K = (m/L²)·(a/k2 − b/k1)` and the steady yaw-rate gain
//! `(ux/L)/(1 + K·ux²)`.
//!
//! Sign convention: cornering stiffnesses are stored positive and enter the
//! steady-state equations exactly in the form
//!
//! ```text
//! (k1 + k2)·β + ((a·k1 − b·k2)/ux − m·ux)·ωr = k1·δ
//! (a·k1 − b·k2)·β + ((a²·k1 + b²·k2)/ux)·ωr   = a·k1·δ
//! ```
//!
//! whose solution reproduces the yaw-rate gain with the `K` above. Under
//! this convention `K` grows as the slider moves toward negative `y`
//! (rearward).

use crate::error::{Error, Result};

/// Speeds below this are treated as standstill (β := 0).
pub const EPS_SPEED: f64 = 0.01;

/// Degrees per radian as used by the steady-state test procedure.
pub const DEG_PER_RAD: f64 = 57.3;

/// Stability factor measured with the slider centered.
pub const K_CENTER: f64 = 0.00097;
/// Stability factor the steering regulator targets.
pub const K_TARGET: f64 = 0.0024;
/// Slider excursion that moves `K` from [`K_CENTER`] to [`K_TARGET`] on the
/// calibrated vehicle.
pub const TARGET_EXCURSION: f64 = -0.289;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    pub total_mass: f64,
    pub yaw_inertia: f64,
    pub front_stiffness: f64,
    pub rear_stiffness: f64,
    pub wheelbase: f64,
    pub nominal_front_dist: f64,
    pub nominal_rear_dist: f64,
    pub slider_mass: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::calibrated(450.0, 270.0, 1.6, 60.0).expect("default calibration converges")
    }
}

impl VehicleParams {
    /// Calibrates stiffnesses and the front/rear split so that
    /// `K(slider = 0) = K_CENTER` and `K(TARGET_EXCURSION) = K_TARGET`.
    ///
    /// Both axles share one stiffness `k`, fixed by the required sensitivity
    /// `dK/dy = −2·ms/(L²·k)`. The split `a0` is then found by bisection on
    /// `K(0) = K_CENTER`.
    pub fn calibrated(
        total_mass: f64,
        yaw_inertia: f64,
        wheelbase: f64,
        slider_mass: f64,
    ) -> Result<Self> {
        Self::calibrate_to(
            total_mass,
            yaw_inertia,
            wheelbase,
            slider_mass,
            K_CENTER,
            K_TARGET,
            TARGET_EXCURSION,
        )
    }

    pub fn calibrate_to(
        total_mass: f64,
        yaw_inertia: f64,
        wheelbase: f64,
        slider_mass: f64,
        k_center: f64,
        k_target: f64,
        excursion: f64,
    ) -> Result<Self> {
        if !(total_mass > 0.0) || !(wheelbase > 0.0) || !(slider_mass > 0.0) {
            return Err(Error::param(
                "vehicle",
                "mass, wheelbase and slider mass must be positive",
            ));
        }
        let rise = k_target - k_center;
        if rise == 0.0 || excursion == 0.0 {
            return Err(Error::param(
                "calibration",
                "target must differ from the centered value",
            ));
        }
        let k = -2.0 * slider_mass * excursion / (wheelbase * wheelbase * rise);
        if !(k > 0.0) {
            return Err(Error::param(
                "calibration",
                "target and excursion imply a non-positive stiffness",
            ));
        }
        let mut p = Self {
            total_mass,
            yaw_inertia,
            front_stiffness: k,
            rear_stiffness: k,
            wheelbase,
            nominal_front_dist: 0.5 * wheelbase,
            nominal_rear_dist: 0.5 * wheelbase,
            slider_mass,
        };
        let k_at = |p: &mut Self, a0: f64| {
            p.nominal_front_dist = a0;
            p.nominal_rear_dist = wheelbase - a0;
            stability_factor(a0, wheelbase - a0, p).expect("nonzero stiffness")
        };
        let (mut lo, mut hi) = (0.0, wheelbase);
        if !(k_at(&mut p, lo) < k_center && k_at(&mut p, hi) > k_center) {
            return Err(Error::param(
                "calibration",
                "centered target not bracketed by the wheelbase",
            ));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k_at(&mut p, mid) < k_center {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        k_at(&mut p, 0.5 * (lo + hi));
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_mass > 0.0) {
            return Err(Error::param("total_mass", "must be positive"));
        }
        if !(self.wheelbase > 0.0) {
            return Err(Error::param("wheelbase", "must be positive"));
        }
        let sum = self.nominal_front_dist + self.nominal_rear_dist;
        if (sum - self.wheelbase).abs() > 1e-9 * self.wheelbase {
            return Err(Error::param(
                "wheelbase",
                format!("a0 + b0 = {sum} differs from L = {}", self.wheelbase),
            ));
        }
        if self.front_stiffness == 0.0 || self.rear_stiffness == 0.0 {
            return Err(Error::ZeroStiffness);
        }
        Ok(())
    }

    /// `K` with the slider at `slider_y`.
    pub fn stability_factor_at(&self, slider_y: f64) -> Result<f64> {
        let (a, b) = com_shift(slider_y, self)?;
        stability_factor(a, b, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SteeringState {
    pub ux: f64,
    pub uy: f64,
    pub yaw_rate: f64,
    pub sideslip: f64,
    pub steer: f64,
}

impl SteeringState {
    /// Builds a state with β derived from the speeds.
    pub fn new(ux: f64, uy: f64, yaw_rate: f64, steer: f64) -> Self {
        let sideslip = if ux.abs() > EPS_SPEED { uy / ux } else { 0.0 };
        Self {
            ux,
            uy,
            yaw_rate,
            sideslip,
            steer,
        }
    }
}

/// Front/rear distances `(a, b)` after the slider moves to `slider_y`
/// (positive toward the front axle).
pub fn com_shift(slider_y: f64, params: &VehicleParams) -> Result<(f64, f64)> {
    let shift = params.slider_mass * slider_y / params.total_mass;
    let a = params.nominal_front_dist - shift;
    let b = params.wheelbase - a;
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::ComOutsideWheelbase { a, b });
    }
    Ok((a, b))
}

/// Stability factor `K = (m/L²)·(a/k2 − b/k1)` in s²/m².
pub fn stability_factor(a: f64, b: f64, params: &VehicleParams) -> Result<f64> {
    let (k1, k2) = (params.front_stiffness, params.rear_stiffness);
    if k1 == 0.0 || k2 == 0.0 {
        return Err(Error::ZeroStiffness);
    }
    let l = params.wheelbase;
    Ok(params.total_mass / (l * l) * (a / k2 - b / k1))
}

/// Steady yaw-rate gain `ωr/δ = (ux/L)/(1 + K·ux²)` in 1/s.
pub fn yaw_rate_gain(ux: f64, k: f64, wheelbase: f64) -> Result<f64> {
    let denom = 1.0 + k * ux * ux;
    if denom.abs() < 1e-9 {
        return Err(Error::OversteerSingularity { speed: ux });
    }
    Ok(ux / wheelbase / denom)
}

/// Speed of maximum yaw-rate gain `√(1/K)` for an understeering vehicle.
pub fn characteristic_speed(k: f64) -> Option<f64> {
    (k > 0.0).then(|| (1.0 / k).sqrt())
}

/// Coefficient matrix and right-hand side (per unit δ) of the steady-state
/// steering equations.
fn steady_system(ux: f64, params: &VehicleParams, a: f64, b: f64) -> ([[f64; 2]; 2], [f64; 2]) {
    let (k1, k2, m) = (
        params.front_stiffness,
        params.rear_stiffness,
        params.total_mass,
    );
    let c = a * k1 - b * k2;
    (
        [
            [k1 + k2, c / ux - m * ux],
            [c, (a * a * k1 + b * b * k2) / ux],
        ],
        [k1, a * k1],
    )
}

/// Solves the steady-state steering equations for `(β, ωr)`.
pub fn steady_state_solve(
    steer: f64,
    ux: f64,
    params: &VehicleParams,
    a: f64,
    b: f64,
) -> Result<(f64, f64)> {
    if !(ux.abs() > EPS_SPEED) {
        return Err(Error::param(
            "ux",
            "steady-state steering needs a nonzero speed",
        ));
    }
    let (m, rhs) = steady_system(ux, params, a, b);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = (m[0][0] * m[1][1]).abs().max((m[0][1] * m[1][0]).abs());
    if det.abs() <= 1e-12 * scale {
        return Err(Error::SingularSteadyState { det });
    }
    let (r0, r1) = (rhs[0] * steer, rhs[1] * steer);
    let beta = (r0 * m[1][1] - m[0][1] * r1) / det;
    let yaw = (m[0][0] * r1 - r0 * m[1][0]) / det;
    Ok((beta, yaw))
}

/// Residuals of the steady-state equations at `(β, ωr)`, relative to the
/// largest term in each row.
pub fn steady_state_residual(
    steer: f64,
    ux: f64,
    params: &VehicleParams,
    a: f64,
    b: f64,
    beta: f64,
    yaw: f64,
) -> [f64; 2] {
    let (m, rhs) = steady_system(ux, params, a, b);
    let mut out = [0.0; 2];
    for i in 0..2 {
        let terms = [m[i][0] * beta, m[i][1] * yaw, rhs[i] * steer];
        let scale = terms
            .iter()
            .fold(0.0f64, |acc, t| acc.max(t.abs()))
            .max(f64::MIN_POSITIVE);
        out[i] = (terms[0] + terms[1] - terms[2]).abs() / scale;
    }
    out
}

/// One measured point of a constant-radius steering test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyPoint {
    pub steer: f64,
    pub ux: f64,
    pub yaw_rate: f64,
}

/// Reduced steady-test quantities for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyReduction {
    pub ux: f64,
    pub radius: f64,
    /// Lateral acceleration `ux·ωr` (m/s²).
    pub lateral_accel: f64,
    /// Front-minus-rear slip-angle difference (deg).
    pub slip_diff_deg: f64,
    /// Stability factor estimate in s²/m².
    pub k_est: f64,
    /// Measured yaw-rate gain ωr/δ.
    pub gain: f64,
}

/// Reduces constant-radius test data: `R = ux/ωr`, `ay = ux·ωr`,
/// `α1 − α2 = 57.3·L·(1/R0 − 1/R)`, `K = (α1 − α2)/(57.3·ay·L)`.
pub fn steady_test_reduce(
    points: &[SteadyPoint],
    r0: f64,
    wheelbase: f64,
) -> Result<Vec<SteadyReduction>> {
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            if p.yaw_rate == 0.0 {
                return Err(Error::ZeroYawRate { index });
            }
            let radius = p.ux / p.yaw_rate;
            let lateral_accel = p.ux * p.yaw_rate;
            let slip_diff_deg = DEG_PER_RAD * wheelbase * (1.0 / r0 - 1.0 / radius);
            let k_est = slip_diff_deg / (DEG_PER_RAD * lateral_accel * wheelbase);
            let gain = if p.steer != 0.0 {
                p.yaw_rate / p.steer
            } else {
                f64::NAN
            };
            Ok(SteadyReduction {
                ux: p.ux,
                radius,
                lateral_accel,
                slip_diff_deg,
                k_est,
                gain,
            })
        })
        .collect()
}

/// Synthesizes a constant-radius test from the model: the steering angle is
/// held at the kinematic value `L/R0` and the speed swept, so that measured
/// lateral accelerations stay at or below `max_ay`.
pub fn synthesize_steady_test(
    params: &VehicleParams,
    slider_y: f64,
    r0: f64,
    max_ay: f64,
    n: usize,
) -> Result<Vec<SteadyPoint>> {
    let (a, b) = com_shift(slider_y, params)?;
    let k = stability_factor(a, b, params)?;
    let steer = params.wheelbase / r0;
    // ay(u) = u²/(R0·(1 + K·u²)) → invert for the top speed.
    let denom = 1.0 - max_ay * r0 * k;
    let u_max = if denom > 0.0 {
        (max_ay * r0 / denom).sqrt()
    } else {
        60.0
    };
    (1..=n)
        .map(|i| {
            let ux = u_max * i as f64 / n as f64;
            let (_, yaw_rate) = steady_state_solve(steer, ux, params, a, b)?;
            Ok(SteadyPoint {
                steer,
                ux,
                yaw_rate,
            })
        })
        .collect()
}
