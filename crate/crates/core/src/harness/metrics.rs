use crate::error::{Error, Result};

/// Step-response quality of a trace against a constant reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `|mean(last 10 %) − ref| / |ref|`, in percent.
    pub steady_state_error: f64,
    /// Peak excursion beyond the reference relative to the step size, in percent.
    pub overshoot: f64,
    /// 10 % → 90 % time (s); `None` if the trace never reaches 90 %.
    pub rise_time: Option<f64>,
    /// Time of the last entry into the ±2 % band (s); `None` if the trace
    /// ends outside the band.
    pub settling_time: Option<f64>,
    /// Largest `|trace − ref|`.
    pub max_tracking_error: f64,
}

pub const SETTLING_BAND: f64 = 0.02;

/// First time the normalised response reaches `level`, with linear
/// interpolation between samples.
fn crossing(norm: &[f64], level: f64, dt: f64) -> Option<f64> {
    if norm[0] >= level {
        return Some(0.0);
    }
    norm.windows(2).position(|w| w[1] >= level).map(|i| {
        let (a, b) = (norm[i], norm[i + 1]);
        (i as f64 + (level - a) / (b - a)) * dt
    })
}

/// Computes step-response metrics for `trace` sampled every `dt`, for the
/// step from `initial` to `reference`. Sample `i` is at time `i·dt`.
pub fn compute_metrics(trace: &[f64], dt: f64, initial: f64, reference: f64) -> Result<Metrics> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be positive"));
    }
    let max_tracking_error = trace
        .iter()
        .map(|v| (v - reference).abs())
        .fold(0.0, f64::max);
    let tail = (trace.len() / 10).max(1);
    let mean_tail = trace[trace.len() - tail..].iter().sum::<f64>() / tail as f64;
    let steady_state_error = if reference != 0.0 {
        (mean_tail - reference).abs() / reference.abs() * 100.0
    } else {
        (mean_tail - reference).abs() * 100.0
    };
    let span = reference - initial;
    if span == 0.0 {
        return Ok(Metrics {
            steady_state_error,
            overshoot: 0.0,
            rise_time: Some(0.0),
            settling_time: Some(0.0),
            max_tracking_error,
        });
    }
    let norm: Vec<f64> = trace.iter().map(|v| (v - initial) / span).collect();
    let peak = norm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overshoot = ((peak - 1.0) * 100.0).max(0.0);
    let rise_time = match (crossing(&norm, 0.1, dt), crossing(&norm, 0.9, dt)) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    let settling_time = match norm.iter().rposition(|v| (v - 1.0).abs() > SETTLING_BAND) {
        None => Some(0.0),
        Some(i) if i + 1 < norm.len() => Some((i + 1) as f64 * dt),
        Some(_) => None,
    };
    Ok(Metrics {
        steady_state_error,
        overshoot,
        rise_time,
        settling_time,
        max_tracking_error,
    })
}

/// Relative improvement of `improved` over `baseline`, in percent.
pub fn reduction_percent(baseline: f64, improved: f64) -> f64 {
    if baseline == 0.0 {
        return 0.0;
    }
    (baseline - improved) / baseline * 100.0
}
