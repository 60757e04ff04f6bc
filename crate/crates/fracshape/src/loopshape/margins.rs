//! Stability margins from a sampled frequency response, and crossover gain
//! tuning.

use super::LoopSpec;
use crate::error::{Error, Result};
use crate::focore::{eval_at, eval_freq, log_grid_per_decade, wrap_pm180, FactoredTf};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Classical margins of one loop.
///
/// `omega_pi` and `gain_margin_db` are `None` when the unwrapped phase
/// never crosses `-180 deg` (mod 360) in the scanned band -- the gain
/// margin is unbounded there and `flags` carries `"no_phase_crossing"`.
/// With several crossings of either kind the report keeps the lowest gain
/// crossover and the most critical (smallest) gain margin, and says so in
/// `flags`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginsReport {
    pub omega_c: f64,
    pub phase_margin_deg: f64,
    pub omega_pi: Option<f64>,
    pub gain_margin_db: Option<f64>,
    pub flags: Vec<String>,
}

/// Relative bisection tolerance in omega for crossing refinement.
const BISECT_REL_TOL: f64 = 1e-6;

fn mag_at(l: &FactoredTf, w: f64) -> Result<f64> {
    Ok(eval_at(l, Complex64::new(0.0, w))?.norm())
}

fn principal_deg_at(l: &FactoredTf, w: f64) -> Result<f64> {
    Ok(eval_at(l, Complex64::new(0.0, w))?.arg().to_degrees())
}

/// Bisects `f` (sign-changing on `[a, b]`) to relative tolerance in omega.
fn bisect(mut a: f64, mut b: f64, mut fa: f64, f: &mut dyn FnMut(f64) -> Result<f64>) -> Result<f64> {
    for _ in 0..200 {
        if (b - a) <= BISECT_REL_TOL * a {
            break;
        }
        let mid = (a * b).sqrt();
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fa > 0.0) == (fm > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok((a * b).sqrt())
}

/// Gain and phase margins of the loop over `band`, scanned at
/// `points_per_decade` and refined by bisection.
///
/// The phase is unwrapped over the whole scan, so a `-180` crossing is
/// detected no matter how many turns the loop has accumulated.  No gain
/// crossover in the band is an error (the report would be meaningless);
/// widen the band instead.
pub fn margins(
    loop_spec: &LoopSpec,
    band: (f64, f64),
    points_per_decade: usize,
) -> Result<MarginsReport> {
    let l = loop_spec.open_loop();
    let grid = log_grid_per_decade(band.0, band.1, points_per_decade)?;
    let resp = eval_freq(&l, &grid)?;
    let mut flags: Vec<String> = Vec::new();

    // Gain crossovers: sign changes of |L| - 1.
    let mut gain_crossings: Vec<f64> = Vec::new();
    let mags: Vec<f64> = resp.values.iter().map(|v| v.norm()).collect();
    for i in 0..grid.len() - 1 {
        let (fa, fb) = (mags[i] - 1.0, mags[i + 1] - 1.0);
        if fa == 0.0 {
            gain_crossings.push(grid[i]);
        } else if (fa > 0.0) != (fb > 0.0) && fb != 0.0 {
            let mut f = |w: f64| Ok(mag_at(&l, w)? - 1.0);
            gain_crossings.push(bisect(grid[i], grid[i + 1], fa, &mut f)?);
        }
    }
    if mags[grid.len() - 1] == 1.0 {
        gain_crossings.push(grid[grid.len() - 1]);
    }
    let omega_c = match gain_crossings.first() {
        Some(&w) => w,
        None => {
            return Err(Error::Domain(format!(
                "no gain crossover in [{:.3e}, {:.3e}] rad/s; widen the band",
                band.0, band.1
            )))
        }
    };
    if gain_crossings.len() > 1 {
        flags.push("multiple_gain_crossings".into());
    }

    // Unwrapped phase at omega_c by continuation from the nearest grid
    // point below it (one grid step; the true step is < 180 deg).
    let idx = grid.partition_point(|&g| g <= omega_c).saturating_sub(1);
    let phase_at = |w: f64, anchor_idx: usize| -> Result<f64> {
        let p = principal_deg_at(&l, w)?;
        let anchor_principal = resp.values[anchor_idx].arg().to_degrees();
        Ok(resp.phase_unwrapped_deg[anchor_idx] + wrap_pm180(p - anchor_principal))
    };
    let phase_margin_deg = 180.0 + phase_at(omega_c, idx)?;

    // Phase crossings of -180 (mod 360): sign changes of the wrapped
    // distance to the critical line.
    let dist: Vec<f64> = resp
        .phase_unwrapped_deg
        .iter()
        .map(|&p| wrap_pm180(p + 180.0))
        .collect();
    let mut phase_crossings: Vec<f64> = Vec::new();
    for i in 0..grid.len() - 1 {
        let (da, db) = (dist[i], dist[i + 1]);
        let crosses = da == 0.0 || ((da > 0.0) != (db > 0.0) && (da - db).abs() < 180.0);
        if !crosses {
            continue;
        }
        if da == 0.0 {
            phase_crossings.push(grid[i]);
            continue;
        }
        let mut f = |w: f64| -> Result<f64> {
            let p = principal_deg_at(&l, w)?;
            Ok(wrap_pm180(p + 180.0))
        };
        // The wrapped distance is continuous across this bracket because
        // the phase moves less than 180 deg within one grid step.
        phase_crossings.push(bisect(grid[i], grid[i + 1], da, &mut f)?);
    }
    if dist[grid.len() - 1] == 0.0 {
        phase_crossings.push(grid[grid.len() - 1]);
    }

    let (omega_pi, gain_margin_db) = if phase_crossings.is_empty() {
        flags.push("no_phase_crossing".into());
        (None, None)
    } else {
        if phase_crossings.len() > 1 {
            flags.push("multiple_phase_crossings".into());
        }
        // Most critical crossing: largest |L|, i.e. smallest margin.
        let mut best: Option<(f64, f64)> = None;
        for &w in &phase_crossings {
            let m = mag_at(&l, w)?;
            let ar = -20.0 * m.log10();
            if best.map_or(true, |(_, b)| ar < b) {
                best = Some((w, ar));
            }
        }
        let (w, ar) = best.expect("nonempty crossings");
        (Some(w), Some(ar))
    };

    Ok(MarginsReport { omega_c, phase_margin_deg, omega_pi, gain_margin_db, flags })
}

/// Gain that places the crossover of `loop_spec` (whose controller is a
/// unit-gain template) at `omega_c`: `k = 1/|L(j omega_c)|`.  Scaling the
/// controller by `k` moves only the magnitude curve, so the crossover
/// lands exactly; the residual `|k L| - 1` at `omega_c` is checked to
/// 1e-10 before returning.
pub fn tune_gain(loop_spec: &LoopSpec, omega_c: f64) -> Result<f64> {
    if !(omega_c.is_finite() && omega_c > 0.0) {
        return Err(Error::Domain(format!("target crossover {omega_c} must be positive")));
    }
    let l = loop_spec.open_loop();
    let m = mag_at(&l, omega_c)?;
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!(
            "unit-gain loop magnitude {m} at {omega_c} rad/s cannot be normalized"
        )));
    }
    let k = 1.0 / m;
    let residual = (k * m - 1.0).abs();
    if residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "gain normalization residual {residual:.3e} exceeds 1e-10"
        )));
    }
    Ok(k)
}
