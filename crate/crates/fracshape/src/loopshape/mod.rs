//! Loop analysis for partially cancelled plants: sensitivities, internal
//! stability, stability margins, and crossover gain tuning.
//!
//! A [`LoopSpec`] is a plant/controller pair plus a sign convention.  The
//! worked plant here has a negative DC gain, and its published margins are
//! reproducible only when the analysis loop is `L = (-G) C`; the
//! `negate_loop` flag records that choice explicitly instead of hiding a
//! sign inside either transfer function.
//!
//! Stability of a fractional loop is decided in the `w = s^(1/nu)` plane:
//! the closed-loop characteristic pseudo polynomial is formed from
//! `1 + L` and its roots are checked against the Matignon sector, and any
//! modes cancelled between plant and controller are checked separately --
//! a cancellation hides modes from `1 + L` without removing them from the
//! input sensitivity, which is exactly how a "stable" full cancellation of
//! an unstable root fails.

mod examples;
mod margins;
mod stability;

pub use examples::{build_example_controllers, example_plant, pi_template, WorkedExample, EXAMPLE_CROSSOVER};
pub use margins::{margins, tune_gain, MarginsReport};
pub use stability::{
    closed_loop_pseudo, internal_stability, internal_stability_parts, InternalStabilityReport,
};

use crate::error::{Error, Result};
use crate::focore::{eval_at, wrap_pm180, FactoredTf, FrequencyResponse};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default analysis band, rad/s.
pub const DEFAULT_BAND: (f64, f64) = (1e-3, 1e3);
/// Default grid density for margins and sensitivity sweeps.
pub const DEFAULT_POINTS_PER_DECADE: usize = 100;

/// A feedback loop: plant, controller, and the sign of the analysis loop.
///
/// With `negate_loop` set, every analysis in this module uses
/// `L = -(plant * controller)`; leave it unset when the plant already has
/// positive DC gain under the desired feedback convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub plant: FactoredTf,
    pub controller: FactoredTf,
    #[serde(default)]
    pub negate_loop: bool,
}

impl LoopSpec {
    pub fn new(plant: FactoredTf, controller: FactoredTf) -> LoopSpec {
        LoopSpec { plant, controller, negate_loop: false }
    }

    pub fn negated(plant: FactoredTf, controller: FactoredTf) -> LoopSpec {
        LoopSpec { plant, controller, negate_loop: true }
    }

    /// The open-loop transfer function `L` with the sign convention folded
    /// into its `negated` flag.
    pub fn open_loop(&self) -> FactoredTf {
        let mut l = self.plant.concat(&self.controller);
        if self.negate_loop {
            l.negated = !l.negated;
        }
        l
    }
}

/// Which closed-loop transfer function a [`Sensitivity`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityKind {
    /// `T = L / (1 + L)`: reference to output.
    Complementary,
    /// `S_y = 1 / (1 + L)`: output disturbance to output.
    Output,
    /// `S_u = G / (1 + L)`: input disturbance to output.
    Input,
}

/// A closed-loop response evaluated pointwise from the open loop; no
/// closed-form factored representation exists for `1/(1+L)` in general, so
/// this wraps the loop and divides at each evaluation point.
#[derive(Debug, Clone)]
pub struct Sensitivity {
    open_loop: FactoredTf,
    plant: FactoredTf,
    pub kind: SensitivityKind,
}

impl Sensitivity {
    pub fn new(loop_spec: &LoopSpec, kind: SensitivityKind) -> Sensitivity {
        Sensitivity {
            open_loop: loop_spec.open_loop(),
            plant: loop_spec.plant.clone(),
            kind,
        }
    }

    pub fn eval_at(&self, s: Complex64) -> Result<Complex64> {
        let l = eval_at(&self.open_loop, s)?;
        let ret = Complex64::ONE + l;
        if ret == Complex64::ZERO {
            return Err(Error::Singular {
                omega: s.im,
                what: "1 + L vanishes; the closed loop is singular here".into(),
            });
        }
        Ok(match self.kind {
            SensitivityKind::Complementary => l / ret,
            SensitivityKind::Output => Complex64::ONE / ret,
            SensitivityKind::Input => eval_at(&self.plant, s)? / ret,
        })
    }

    /// Evaluates on an ascending positive grid; the phase is unwrapped by
    /// continuation from the principal value at the first point.
    pub fn eval_freq(&self, grid: &[f64]) -> Result<FrequencyResponse> {
        let mut values = Vec::with_capacity(grid.len());
        for &w in grid {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Domain(format!("grid frequency {w} must be positive")));
            }
            values.push(self.eval_at(Complex64::new(0.0, w))?);
        }
        let mut phase = Vec::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            let p = v.arg().to_degrees();
            if i == 0 {
                phase.push(p);
            } else {
                let prev_principal = values[i - 1].arg().to_degrees();
                phase.push(phase[i - 1] + wrap_pm180(p - prev_principal));
            }
        }
        Ok(FrequencyResponse { grid: grid.to_vec(), values, phase_unwrapped_deg: phase })
    }
}

/// The three standard closed-loop responses of a loop:
/// `(T, S_y, S_u)`.  `T + S_y = 1` holds pointwise by construction.
pub fn sensitivities(loop_spec: &LoopSpec) -> (Sensitivity, Sensitivity, Sensitivity) {
    (
        Sensitivity::new(loop_spec, SensitivityKind::Complementary),
        Sensitivity::new(loop_spec, SensitivityKind::Output),
        Sensitivity::new(loop_spec, SensitivityKind::Input),
    )
}
