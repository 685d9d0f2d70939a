//! Linear active disturbance rejection control of one slider axis.
//!
//! Pipeline per control tick: tracking differentiator → extended state
//! observer (fed the previously applied, saturated voltage) → state-error
//! feedback with disturbance cancellation → saturation.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::mechanism::DEFAULT_B0;

/// Forward-Euler stability margin on `Δt·ωo` for a single observer update.
pub const ESO_STEP_LIMIT: f64 = 0.4;
/// Target `Δt·ωo` per observer sub-step inside [`AdrcController::step`].
pub const ESO_SUBSTEP_TARGET: f64 = 0.25;

/// Observer gains `(3ωo, 3ωo², ωo³)`, all poles at `−ωo`.
pub fn eso_gains(wo: f64) -> Result<(f64, f64, f64)> {
    if !(wo > 0.0) {
        return Err(Error::NonPositiveBandwidth(wo));
    }
    Ok((3.0 * wo, 3.0 * wo * wo, wo * wo * wo))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SefGains {
    pub kp: f64,
    pub kd: f64,
    pub wc: f64,
}

/// Critically damped feedback gains `kp = ωc²`, `kd = 2ωc`.
pub fn sef_gains(wc: f64) -> Result<SefGains> {
    if !(wc > 0.0) {
        return Err(Error::NonPositiveBandwidth(wc));
    }
    Ok(SefGains {
        kp: wc * wc,
        kd: 2.0 * wc,
        wc,
    })
}

/// `A − L·C` of the observer error dynamics.
pub fn observer_error_matrix(gains: (f64, f64, f64)) -> Matrix3<f64> {
    let (l1, l2, l3) = gains;
    Matrix3::new(-l1, 1.0, 0.0, -l2, 0.0, 1.0, -l3, 0.0, 0.0)
}

/// Coefficients `(c2, c1, c0)` of `det(λI − M) = λ³ + c2·λ² + c1·λ + c0`.
pub fn characteristic_polynomial(m: &Matrix3<f64>) -> (f64, f64, f64) {
    let trace = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    (-trace, minors, -m.determinant())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsoState {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub gains: (f64, f64, f64),
    pub wo: f64,
    pub b0: f64,
}

impl EsoState {
    pub fn new(wo: f64, b0: f64) -> Result<Self> {
        if b0 == 0.0 {
            return Err(Error::ZeroInputCoefficient);
        }
        Ok(Self {
            z1: 0.0,
            z2: 0.0,
            z3: 0.0,
            gains: eso_gains(wo)?,
            wo,
            b0,
        })
    }

    pub fn estimate(&self) -> Vector3<f64> {
        Vector3::new(self.z1, self.z2, self.z3)
    }
}

/// Forward-Euler observer update `ż = A·z + B·u + L·(y − z1)`.
pub fn eso_step(state: &EsoState, y: f64, u: f64, dt: f64) -> Result<EsoState> {
    let product = dt * state.wo;
    if !(product < ESO_STEP_LIMIT) {
        return Err(Error::ObserverStabilityMargin {
            product,
            limit: ESO_STEP_LIMIT,
        });
    }
    Ok(eso_update(state, y, u, dt))
}

fn eso_update(s: &EsoState, y: f64, u: f64, h: f64) -> EsoState {
    let (l1, l2, l3) = s.gains;
    let e = y - s.z1;
    EsoState {
        z1: s.z1 + h * (s.z2 + l1 * e),
        z2: s.z2 + h * (s.z3 + s.b0 * u + l2 * e),
        z3: s.z3 + h * (l3 * e),
        ..*s
    }
}

/// Han's time-optimal synthesis function. `x1` is the tracking error and
/// `x2` its rate; the result is bounded by `r` in magnitude.
pub fn fst(x1: f64, x2: f64, r: f64, h0: f64) -> f64 {
    let p = r * h0;
    let p0 = h0 * p;
    let v = x1 + h0 * x2;
    let w0 = (p * p + 8.0 * r * v.abs()).sqrt();
    let w = if v.abs() > p0 {
        x2 + 0.5 * (w0 - p) * v.signum()
    } else {
        x2 + v / h0
    };
    if w.abs() > p {
        -r * w.signum()
    } else {
        -r * w / p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdState {
    pub rd1: f64,
    pub rd2: f64,
    pub r: f64,
    pub h0: f64,
    pub dt: f64,
}

impl TdState {
    pub fn new(r: f64, h0: f64, dt: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::param("td_speed", "must be positive"));
        }
        if !(dt > 0.0) || !(h0 >= dt) {
            return Err(Error::param("td_filter", "need h0 >= dt > 0"));
        }
        Ok(Self {
            rd1: 0.0,
            rd2: 0.0,
            r,
            h0,
            dt,
        })
    }
}

/// `rd1 += Δt·rd2`, `rd2 += Δt·fst(rd1 − yd, rd2, r, h0)`.
pub fn td_step(state: &TdState, yd: f64) -> TdState {
    let f = fst(state.rd1 - yd, state.rd2, state.r, state.h0);
    TdState {
        rd1: state.rd1 + state.dt * state.rd2,
        rd2: state.rd2 + state.dt * f,
        ..*state
    }
}

/// State-error feedback with disturbance cancellation:
/// `u = kp(rd1 − z1) + kd(rd2 − z2)`, `uo = (u − z3)/b0`.
pub fn sef(
    rd1: f64,
    rd2: f64,
    z1: f64,
    z2: f64,
    z3: f64,
    gains: &SefGains,
    b0: f64,
) -> Result<f64> {
    if b0 == 0.0 {
        return Err(Error::ZeroInputCoefficient);
    }
    let u = gains.kp * (rd1 - z1) + gains.kd * (rd2 - z2);
    Ok((u - z3) / b0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdrcConfig {
    pub wo: f64,
    pub wc: f64,
    pub b0: f64,
    /// Tracking-differentiator speed factor (m/s²).
    pub td_speed: f64,
    pub td_filter: f64,
    pub dt: f64,
    pub voltage_limit: f64,
}

/// Default tracking-differentiator speed: about 80 % of the acceleration the
/// slider reaches at full voltage, so the reference stays feasible.
pub const DEFAULT_TD_SPEED: f64 = 1.5;

impl AdrcConfig {
    pub fn x_axis() -> Self {
        Self {
            wo: 1000.0,
            wc: 200.0,
            b0: DEFAULT_B0,
            td_speed: DEFAULT_TD_SPEED,
            td_filter: 0.002,
            dt: 0.001,
            voltage_limit: 24.0,
        }
    }

    pub fn y_axis() -> Self {
        Self {
            wo: 1200.0,
            wc: 250.0,
            ..Self::x_axis()
        }
    }
}

/// One ADRC loop: differentiator, observer and feedback for a single axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdrcController {
    pub config: AdrcConfig,
    pub td: TdState,
    pub eso: EsoState,
    pub gains: SefGains,
    /// Voltage applied on the previous tick.
    pub last_u: f64,
    substeps: usize,
}

impl AdrcController {
    pub fn new(config: AdrcConfig) -> Result<Self> {
        if !(config.voltage_limit > 0.0) {
            return Err(Error::param("voltage_limit", "must be positive"));
        }
        let substeps = (config.dt * config.wo / ESO_SUBSTEP_TARGET).ceil().max(1.0) as usize;
        Ok(Self {
            config,
            td: TdState::new(config.td_speed, config.td_filter, config.dt)?,
            eso: EsoState::new(config.wo, config.b0)?,
            gains: sef_gains(config.wc)?,
            last_u: 0.0,
            substeps,
        })
    }

    /// Observer updates per control tick.
    pub fn substeps(&self) -> usize {
        self.substeps
    }

    /// Starts the loop at rest with the slider at `y`.
    pub fn reset_at(&mut self, y: f64) {
        self.td.rd1 = y;
        self.td.rd2 = 0.0;
        self.eso.z1 = y;
        self.eso.z2 = 0.0;
        self.eso.z3 = 0.0;
        self.last_u = 0.0;
    }

    /// One control tick; returns the saturated voltage.
    pub fn step(&mut self, yd: f64, y: f64) -> Result<f64> {
        self.td = td_step(&self.td, yd);
        let h = self.config.dt / self.substeps as f64;
        for _ in 0..self.substeps {
            self.eso = eso_step(&self.eso, y, self.last_u, h)?;
        }
        self.feedback(self.td.rd1, self.td.rd2)
    }

    /// Same as [`step`](Self::step) but with an externally supplied
    /// reference and rate in place of the differentiator.
    pub fn step_with_reference(&mut self, rd1: f64, rd2: f64, y: f64) -> Result<f64> {
        let h = self.config.dt / self.substeps as f64;
        for _ in 0..self.substeps {
            self.eso = eso_step(&self.eso, y, self.last_u, h)?;
        }
        self.feedback(rd1, rd2)
    }

    fn feedback(&mut self, rd1: f64, rd2: f64) -> Result<f64> {
        let e = &self.eso;
        let u = sef(rd1, rd2, e.z1, e.z2, e.z3, &self.gains, e.b0)?;
        let lim = self.config.voltage_limit;
        self.last_u = u.clamp(-lim, lim);
        Ok(self.last_u)
    }
}
