//! Principal-branch evaluation of factored transfer functions on the
//! imaginary axis, with continuous (unwrapped, anchored) phase.

use super::{Factor, FactoredTf, FrequencyResponse};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// `base^exponent` on the principal branch, `Arg in (-pi, pi]`.
///
/// A literal `-0.0` imaginary part is normalized to `+0.0` first, so points
/// on the negative real axis always take `Arg = +pi` regardless of how the
/// zero was produced.
pub fn complex_power(base: Complex64, exponent: f64) -> Result<Complex64> {
    if base == Complex64::ZERO {
        return if exponent > 0.0 {
            Ok(Complex64::ZERO)
        } else if exponent == 0.0 {
            Ok(Complex64::ONE)
        } else {
            Err(Error::Domain("zero base with negative exponent".into()))
        };
    }
    let base = Complex64::new(base.re, if base.im == 0.0 { 0.0 } else { base.im });
    Ok(Complex64::from_polar(base.norm().powf(exponent), exponent * base.arg()))
}

/// Value of one factor at a point `s` of the complex plane.
pub fn factor_value(f: &Factor, s: Complex64) -> Result<Complex64> {
    match f {
        Factor::Gain { g } => Ok(Complex64::new(*g, 0.0)),
        Factor::Monomial { beta } => complex_power(s, *beta),
        Factor::ExplicitX { z, alpha, k, pair } => {
            let a = alpha.value();
            let sa = complex_power(s, a)?;
            let single = |root: Complex64| -> Result<Complex64> {
                Ok(Complex64::ONE - sa / complex_power(root, a)?)
            };
            let mut v = single(*z)?;
            if *pair {
                v *= single(z.conj())?;
            }
            invert_if(v, *k == -1, s)
        }
        Factor::PseudoPoly { poly, k } => {
            let v = poly.eval_s(s)?;
            invert_if(v, *k == -1, s)
        }
        Factor::ImplicitPower { z, beta, pair, mirrored } => {
            let sign = if *mirrored { 1.0 } else { -1.0 };
            let single = |root: Complex64| -> Result<Complex64> {
                let base = Complex64::ONE + sign * s / root;
                if base == Complex64::ZERO && *beta < 0.0 {
                    return Err(singularity(s, "implicit power"));
                }
                complex_power(base, *beta)
            };
            let mut v = single(*z)?;
            if *pair {
                v *= single(z.conj())?;
            }
            Ok(v)
        }
        Factor::IoRational { num, den } => {
            let d = horner_real(den, s);
            if d.norm() == 0.0 {
                return Err(singularity(s, "rational denominator"));
            }
            Ok(horner_real(num, s) / d)
        }
        Factor::Product { factors } => {
            let mut v = Complex64::ONE;
            for g in factors {
                v *= factor_value(g, s)?;
            }
            Ok(v)
        }
    }
}

fn invert_if(v: Complex64, invert: bool, s: Complex64) -> Result<Complex64> {
    if !invert {
        return Ok(v);
    }
    if v.norm() == 0.0 {
        return Err(singularity(s, "inverted factor"));
    }
    Ok(Complex64::ONE / v)
}

fn singularity(s: Complex64, what: &str) -> Error {
    Error::Singular { omega: s.im, what: format!("{what} vanishes at s = {s}") }
}

fn horner_real(coeffs: &[f64], s: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

/// Value of the whole transfer function at `s`: the product of its factor
/// values, negated when the sign marker is set.  An empty list gives 1.
pub fn eval_at(tf: &FactoredTf, s: Complex64) -> Result<Complex64> {
    let mut v = Complex64::ONE;
    for f in &tf.factors {
        v *= factor_value(f, s)?;
    }
    Ok(if tf.negated { -v } else { v })
}

/// Samples the response at `s = j*omega` over the grid and unwraps the
/// phase cumulatively from the lowest frequency.
///
/// The phase at the first grid point is anchored analytically: each factor
/// contributes its principal argument there, with monomials and origin
/// roots contributing their exact `90*beta` degrees so that integrator
/// chains start at the true `-90*m`, not at a wrapped alias.
pub fn eval_freq(tf: &FactoredTf, grid: &[f64]) -> Result<FrequencyResponse> {
    for (i, &w) in grid.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Domain(format!("grid frequency {w} is not positive and finite")));
        }
        if i > 0 && w <= grid[i - 1] {
            return Err(Error::Domain("grid is not strictly increasing".into()));
        }
    }
    if grid.is_empty() {
        return Ok(FrequencyResponse {
            grid: Vec::new(),
            values: Vec::new(),
            phase_unwrapped_deg: Vec::new(),
        });
    }

    let mut values = Vec::with_capacity(grid.len());
    for &w in grid {
        values.push(eval_at(tf, Complex64::new(0.0, w))?);
    }

    let mut anchor = if tf.negated { 180.0 } else { 0.0 };
    for f in tf.flattened_factors() {
        anchor += factor_anchor_deg(f, grid[0])?;
    }

    let mut phase = Vec::with_capacity(grid.len());
    phase.push(anchor);
    for i in 1..grid.len() {
        let delta = wrap_pm180(values[i].arg().to_degrees() - values[i - 1].arg().to_degrees());
        phase.push(phase[i - 1] + delta);
    }

    Ok(FrequencyResponse { grid: grid.to_vec(), values, phase_unwrapped_deg: phase })
}

/// Wraps an angle difference into (-180, 180] degrees.
pub(crate) fn wrap_pm180(x: f64) -> f64 {
    x - 360.0 * (x / 360.0).round()
}

/// The factor's true phase in degrees at `s = j*omega`, valid as an
/// unwrapping anchor: monomials and origin roots contribute exactly
/// `90*beta`, everything else its principal argument (assumed unwrapped,
/// which holds when `omega` sits below the factor's corner frequencies).
fn factor_anchor_deg(f: &Factor, omega: f64) -> Result<f64> {
    let s = Complex64::new(0.0, omega);
    match f {
        Factor::Gain { g } => Ok(if *g < 0.0 { 180.0 } else { 0.0 }),
        Factor::Monomial { beta } => Ok(90.0 * beta),
        Factor::ExplicitX { z, alpha, k, pair } => {
            let a = alpha.value();
            let sa = complex_power(s, a)?;
            let single = |root: Complex64| -> Result<f64> {
                Ok((Complex64::ONE - sa / complex_power(root, a)?).arg().to_degrees())
            };
            let mut deg = single(*z)?;
            if *pair {
                deg += single(z.conj())?;
            }
            Ok(f64::from(*k) * deg)
        }
        Factor::PseudoPoly { poly, k } => {
            // Deflate exact origin roots: they contribute 90*alpha apiece
            // and would otherwise alias the principal argument.
            let coeffs = poly.coeffs();
            let m = coeffs.iter().take_while(|c| **c == Complex64::ZERO).count();
            let a = poly.alpha().value();
            let wa = complex_power(s, a)?;
            let mut acc = Complex64::ZERO;
            for &c in coeffs[m..].iter().rev() {
                acc = acc * wa + c;
            }
            Ok(f64::from(*k) * (90.0 * a * m as f64 + acc.arg().to_degrees()))
        }
        Factor::ImplicitPower { z, beta, pair, mirrored } => {
            let sign = if *mirrored { 1.0 } else { -1.0 };
            let mut deg = beta * (Complex64::ONE + sign * s / z).arg().to_degrees();
            if *pair {
                deg += beta * (Complex64::ONE + sign * s / z.conj()).arg().to_degrees();
            }
            Ok(deg)
        }
        Factor::IoRational { num, den } => {
            Ok(io_anchor_deg(num, s)? - io_anchor_deg(den, s)?)
        }
        Factor::Product { factors } => {
            let mut deg = 0.0;
            for g in factors {
                deg += factor_anchor_deg(g, omega)?;
            }
            Ok(deg)
        }
    }
}

fn io_anchor_deg(coeffs: &[f64], s: Complex64) -> Result<f64> {
    let m = coeffs.iter().take_while(|c| **c == 0.0).count();
    if m == coeffs.len() {
        return Err(Error::Domain("zero polynomial in rational factor".into()));
    }
    Ok(90.0 * m as f64 + horner_real(&coeffs[m..], s).arg().to_degrees())
}

/// `n >= 2` geometrically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("invalid grid range [{lo}, {hi}]")));
    }
    if n < 2 {
        return Err(Error::Domain("grid needs at least two points".into()));
    }
    let (ll, lh) = (lo.ln(), hi.ln());
    let mut grid = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        grid.push((ll + t * (lh - ll)).exp());
    }
    grid[0] = lo;
    grid[n - 1] = hi;
    for i in 1..n {
        if grid[i] <= grid[i - 1] {
            return Err(Error::Domain("grid too dense to stay strictly increasing".into()));
        }
    }
    Ok(grid)
}

/// Convenience: `points_per_decade` resolution over `[lo, hi]`.
pub fn log_grid_per_decade(lo: f64, hi: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("invalid grid range [{lo}, {hi}]")));
    }
    let decades = (hi / lo).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize).max(1) + 1;
    log_grid(lo, hi, n)
}
