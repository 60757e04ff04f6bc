//! Time-domain simulation of closed loops.
//!
//! Two solvers cross-check each other.  The integer-order path realizes a
//! rational approximation as a state space and advances it with the exact
//! zero-order-hold discretization, so step inputs incur no integration
//! error at all.  The fractional path integrates the pseudo-rational loop
//! directly with a Grunwald-Letnikov scheme using the full binomial-weight
//! history -- slower, but independent of any band-limited approximation,
//! which is what makes the comparison meaningful.

mod gl;
mod metrics;
mod zoh;

pub use gl::{gl_weights, simulate_gl};
pub use metrics::{response_metrics, ResponseMetrics};
pub use zoh::{simulate_lti, to_state_space, StateSpace};

use crate::error::{Error, Result};

/// A uniformly sampled scalar response with solver provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    /// Which solver produced the series (`"zoh"` or `"gl"`).
    pub solver: String,
    pub dt: f64,
    /// Free-form run label, carried into output files.
    pub scenario: String,
    /// Non-fatal conditions: an under-resolved fast mode, an unstable
    /// realization.
    pub warnings: Vec<String>,
}

impl TimeSeries {
    /// Validates uniform spacing and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.t.len() != self.y.len() || self.t.is_empty() {
            return Err(Error::Domain("time series axes differ or are empty".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain(format!("nonpositive sample spacing {}", self.dt)));
        }
        for i in 1..self.t.len() {
            if ((self.t[i] - self.t[i - 1]) - self.dt).abs() > 1e-9 * self.dt.max(1.0) {
                return Err(Error::Domain(format!("nonuniform spacing at index {i}")));
            }
        }
        if !self.y.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("time series contains non-finite samples".into()));
        }
        Ok(())
    }

    /// CSV rendering: header `t,y`, one row per sample, nine significant
    /// digits (enough to reproduce every plot and diff runs byte-exactly).
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.t.len() * 32 + 8);
        out.push_str("t,y\n");
        for (t, y) in self.t.iter().zip(&self.y) {
            out.push_str(&format!("{t:.8e},{y:.8e}\n"));
        }
        out
    }
}

/// Shared sample-grid builder: `t_k = k dt` covering `[0, t_end]`.
pub(crate) fn time_grid(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!("step dt = {dt} must be positive")));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::Domain(format!("horizon t_end = {t_end} must be at least dt = {dt}")));
    }
    let steps = (t_end / dt).round() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_nine_significant_digits() {
        let ts = TimeSeries {
            t: vec![0.0, 0.5],
            y: vec![1.0, -0.25],
            solver: "zoh".into(),
            dt: 0.5,
            scenario: "unit".into(),
            warnings: Vec::new(),
        };
        let csv = ts.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,y"));
        assert_eq!(lines.next(), Some("0.00000000e0,1.00000000e0"));
        assert_eq!(lines.next(), Some("5.00000000e-1,-2.50000000e-1"));
    }

    #[test]
    fn validation_rejects_nonuniform_grids() {
        let ts = TimeSeries {
            t: vec![0.0, 0.5, 1.2],
            y: vec![0.0; 3],
            solver: "zoh".into(),
            dt: 0.5,
            scenario: String::new(),
            warnings: Vec::new(),
        };
        assert!(ts.validate().is_err());
    }

    #[test]
    fn grid_covers_the_horizon_inclusively() {
        let t = time_grid(1.0, 0.25).unwrap();
        assert_eq!(t.len(), 5);
        assert!((t[4] - 1.0).abs() < 1e-15);
        assert!(time_grid(1.0, 0.0).is_err());
        assert!(time_grid(0.0, 0.25).is_err());
    }
}
