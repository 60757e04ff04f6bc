//! Step-response quality numbers.

use super::TimeSeries;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Quality numbers of one response relative to its expected final value.
///
/// `settling_time` is the instant after which every sample stays inside the
/// 2% band around the final value; `None` (with `settled = false`) when the
/// series never enters the band or leaves it at the very end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMetrics {
    /// How far the response dips below zero: `max(0, -min y)`.
    pub undershoot: f64,
    /// Peak above the final value: `max(0, max y - final_value)`.
    pub overshoot: f64,
    pub settling_time: Option<f64>,
    pub settled: bool,
}

/// Half width of the settling band: 2% of the final value, or an absolute
/// 0.02 for regulation responses whose final value is zero (2% of the unit
/// excitation).
fn band_halfwidth(final_value: f64) -> f64 {
    if final_value == 0.0 {
        0.02
    } else {
        0.02 * final_value.abs()
    }
}

pub fn response_metrics(ts: &TimeSeries, final_value: f64) -> Result<ResponseMetrics> {
    if ts.y.is_empty() {
        return Err(Error::Domain("metrics of an empty series".into()));
    }
    let min_y = ts.y.iter().copied().fold(f64::INFINITY, f64::min);
    let max_y = ts.y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let undershoot = (-min_y).max(0.0);
    let overshoot = (max_y - final_value).max(0.0);

    let hw = band_halfwidth(final_value);
    let last_outside = ts.y.iter().rposition(|&y| (y - final_value).abs() > hw);
    let (settling_time, settled) = match last_outside {
        None => (Some(0.0), true),
        Some(i) if i + 1 < ts.t.len() => (Some(ts.t[i + 1]), true),
        Some(_) => (None, false),
    };
    Ok(ResponseMetrics { undershoot, overshoot, settling_time, settled })
}
