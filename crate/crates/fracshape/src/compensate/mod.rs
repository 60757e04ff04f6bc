//! Compensator factories for partial cancellation.
//!
//! A hard integer-order feature -- a non-minimum-phase zero `Z = 1 - s/z`,
//! an unstable pole `Z^-1`, or a low-damped stable pole pair `P^-1` -- can
//! be traded for a milder fractional one by cancelling only part of it:
//!
//! * **explicit**: split `Z = X * Q` with `Q` a stable pseudo polynomial in
//!   `w = s^(1/nu)` and `X = 1 - (s/z)^(1/nu)`; the controller carries
//!   `Q^-k` and the loop keeps the fractional residual `X^k`
//!   ([`expand_real`], [`expand_pair`]).
//! * **implicit**: divide by the mirrored fractional lead-lag
//!   `(1 + s/z)^(k(nu-1)/nu)`; the loop keeps
//!   `X-tilde = Z^k (1+s/z)^(-k(nu-1)/nu)`, which matches the explicit
//!   residual's magnitude/phase character without pseudo-polynomial algebra
//!   ([`implicit_terms`]).
//! * **mirror**: divide by the reflected stable binomial `(1 + s/z)^k`,
//!   leaving a pure all-pass in the loop ([`mirror`]) -- the classical
//!   integer-order limit of the implicit family.
//! * **stable pair**: cancel only the principal `w`-plane roots of a
//!   resonant pole pair, keeping the better-damped remainder
//!   ([`stable_pair_cancel`]).
//!
//! [`CancellationPlan::new`] packages each construction as a
//! controller-side factor plus the residual the loop keeps.

mod expand;
mod implicit;

pub use expand::{expand_pair, expand_real, stable_pair_cancel, StablePairSplit};
pub use implicit::{implicit_terms, mirror};

use crate::error::{Error, Result};
use crate::focore::{Factor, PseudoPolynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// What gets partially cancelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CancelTarget {
    /// Real zero (`k = +1`) or pole (`k = -1`) at `z > 0`.
    Real { z: f64 },
    /// Right-half-plane conjugate pair `(z, conj z)`, `Re z > 0`, `Im z != 0`.
    RhpPair { z: Complex64 },
    /// Stable but low-damped conjugate pole pair `(p, conj p)`, `Re p < 0`.
    StablePair { p: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Explicit,
    Implicit,
    Mirror,
}

/// One partial-cancellation decision: what to cancel, how, and the two
/// factors it produces.  `compensator` multiplies the controller;
/// `residual` is what the open loop keeps in place of the original target.
#[derive(Debug, Clone, PartialEq)]
pub struct CancellationPlan {
    pub target: CancelTarget,
    pub k: i8,
    pub nu: u32,
    pub method: Method,
    pub compensator: Factor,
    pub residual: Factor,
}

impl CancellationPlan {
    /// Builds the plan for `target^k` with base order `1/nu`.
    ///
    /// `k` is the exponent the target carries in the plant: `+1` for a
    /// zero, `-1` for a pole.  For a stable pair the target is always a
    /// pole (`k = -1`), and the mirror method does not apply (reflecting a
    /// stable pole would create an unstable one).
    pub fn new(target: CancelTarget, k: i8, nu: u32, method: Method) -> Result<CancellationPlan> {
        if k != 1 && k != -1 {
            return Err(Error::Domain(format!("exponent sign k = {k}, expected +1 or -1")));
        }
        if nu < 2 {
            return Err(Error::Domain(format!("expansion order nu = {nu} must be >= 2")));
        }
        let (compensator, residual) = match (target, method) {
            (CancelTarget::Real { z }, Method::Explicit) => {
                let (x, q) = expand_real(z, nu, k)?;
                let comp = match q {
                    Factor::PseudoPoly { poly, k } => Factor::PseudoPoly { poly, k: -k },
                    _ => unreachable!("expand_real returns a pseudo polynomial factor"),
                };
                (comp, x)
            }
            (CancelTarget::Real { z }, Method::Implicit) => {
                let (q, x) = implicit_terms(Complex64::new(z, 0.0), nu, k, false)?;
                (invert_implicit(q), x)
            }
            (CancelTarget::Real { z }, Method::Mirror) => {
                if z <= 0.0 || !z.is_finite() {
                    return Err(Error::Domain(format!("mirror target z = {z} must be > 0")));
                }
                let d = mirror(Complex64::new(z, 0.0), false, k)?;
                // Residual Z^k * D^-k is a plain integer-order all-pass.
                let (num, den) = (vec![1.0, -1.0 / z], vec![1.0, 1.0 / z]);
                let residual = if k == 1 {
                    Factor::io_rational(num, den)
                } else {
                    Factor::io_rational(den, num)
                };
                (invert_implicit(d), residual)
            }
            (CancelTarget::RhpPair { z }, Method::Explicit) => {
                let (x, q) = expand_pair(z, nu, k)?;
                let comp = match q {
                    Factor::PseudoPoly { poly, k } => Factor::PseudoPoly { poly, k: -k },
                    _ => unreachable!("expand_pair returns a pseudo polynomial factor"),
                };
                (comp, x)
            }
            (CancelTarget::RhpPair { z }, Method::Implicit) => {
                let (q, x) = implicit_terms(z, nu, k, true)?;
                (invert_implicit(q), x)
            }
            (CancelTarget::RhpPair { z }, Method::Mirror) => {
                if z.re <= 0.0 || z.im == 0.0 {
                    return Err(Error::Domain(
                        "mirror pair target must have Re z > 0 and Im z != 0".into(),
                    ));
                }
                let d = mirror(z, true, k)?;
                let w0 = z.norm();
                let c = 2.0 * z.re / (w0 * w0);
                let (num, den) = (vec![1.0, -c, 1.0 / (w0 * w0)], vec![1.0, c, 1.0 / (w0 * w0)]);
                let residual = if k == 1 {
                    Factor::io_rational(num, den)
                } else {
                    Factor::io_rational(den, num)
                };
                (invert_implicit(d), residual)
            }
            (CancelTarget::StablePair { p }, method) => {
                if k != -1 {
                    return Err(Error::Domain(
                        "stable-pair cancellation targets a pole pair (k = -1)".into(),
                    ));
                }
                let split = stable_pair_cancel(p, nu)?;
                match method {
                    Method::Explicit => (split.compensator, split.residual),
                    Method::Implicit => (split.implicit_compensator, split.implicit_residual),
                    Method::Mirror => {
                        return Err(Error::Domain(
                            "mirroring a stable pole pair would create an unstable one".into(),
                        ))
                    }
                }
            }
        };
        Ok(CancellationPlan { target, k, nu, method, compensator, residual })
    }
}

/// Flips the exponent of an implicit-power factor (the factories hand back
/// the loop-side object; the controller needs its inverse).
fn invert_implicit(f: Factor) -> Factor {
    match f {
        Factor::ImplicitPower { z, beta, pair, mirrored } => {
            Factor::ImplicitPower { z, beta: -beta, pair, mirrored }
        }
        other => other,
    }
}

/// Closed-form characteristic points of the explicit residual
/// `X = 1 - (s/z)^alpha` with `z > 0` (the `k = +1` form; negate the phases
/// for `k = -1`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CharPoints {
    /// Frequency of the magnitude minimum; `None` for `alpha = 1`, where
    /// the integer-order magnitude is monotone and has no interior minimum.
    pub omega_min: Option<f64>,
    pub magnitude_at_min: Option<f64>,
    pub phase_at_min_deg: Option<f64>,
    /// Phase at `omega = z`, where explicit and implicit residuals
    /// coincide: `90*(alpha/2 - 1)` degrees.
    pub phase_at_z_deg: f64,
}

/// `omega_min = z cos(pi alpha/2)^(1/alpha)`, `|X| = sin(pi alpha/2)`,
/// `angle X(omega_min) = 90(alpha - 1)` deg, `angle X(z) = 90(alpha/2 - 1)` deg.
pub fn explicit_char_points(z: f64, alpha: f64) -> Result<CharPoints> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Domain(format!("char points need z > 0, got {z}")));
    }
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (0, 1]")));
    }
    let phase_at_z_deg = 90.0 * (alpha / 2.0 - 1.0);
    if alpha == 1.0 {
        return Ok(CharPoints {
            omega_min: None,
            magnitude_at_min: None,
            phase_at_min_deg: None,
            phase_at_z_deg,
        });
    }
    let half = std::f64::consts::PI * alpha / 2.0;
    Ok(CharPoints {
        omega_min: Some(z * half.cos().powf(1.0 / alpha)),
        magnitude_at_min: Some(half.sin()),
        phase_at_min_deg: Some(90.0 * (alpha - 1.0)),
        phase_at_z_deg,
    })
}

/// Straight-line Bode limits of a factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    pub low_slope_db_dec: f64,
    pub low_phase_deg: f64,
    pub high_slope_db_dec: f64,
    pub high_phase_deg: f64,
}

impl Asymptotics {
    fn sum(self, other: Asymptotics) -> Asymptotics {
        Asymptotics {
            low_slope_db_dec: self.low_slope_db_dec + other.low_slope_db_dec,
            low_phase_deg: self.low_phase_deg + other.low_phase_deg,
            high_slope_db_dec: self.high_slope_db_dec + other.high_slope_db_dec,
            high_phase_deg: self.high_phase_deg + other.high_phase_deg,
        }
    }
}

/// Asymptotic slopes and phases of the fractional factor classes.
///
/// An explicit residual of order `alpha` tends to `+-20 alpha` dB/dec with
/// phase `k(-180 + 90 alpha)` degrees (the non-minimum-phase branch); pair
/// forms double both.  Implicit powers `(1 -+ s/z)^beta` tend to
/// `20 beta` dB/dec with `-+90 beta` degrees.  Grouped products report the
/// sum of their parts, which is how the lead-lag residual
/// `Z (1+s/z)^(alpha-1)` lands on `-180 + 90 alpha` as well.
pub fn asymptotics(f: &Factor) -> Result<Asymptotics> {
    match f {
        Factor::ExplicitX { alpha, k, pair, .. } => {
            let m = if *pair { 2.0 } else { 1.0 };
            let a = alpha.value();
            let k = f64::from(*k);
            Ok(Asymptotics {
                low_slope_db_dec: 0.0,
                low_phase_deg: 0.0,
                high_slope_db_dec: k * m * 20.0 * a,
                high_phase_deg: k * m * (-180.0 + 90.0 * a),
            })
        }
        Factor::ImplicitPower { beta, pair, mirrored, .. } => {
            let m = if *pair { 2.0 } else { 1.0 };
            let sign = if *mirrored { 1.0 } else { -1.0 };
            Ok(Asymptotics {
                low_slope_db_dec: 0.0,
                low_phase_deg: 0.0,
                high_slope_db_dec: m * 20.0 * beta,
                high_phase_deg: m * sign * 90.0 * beta,
            })
        }
        Factor::PseudoPoly { poly, k } => {
            let a = poly.alpha().value();
            let k = f64::from(*k);
            let origin = poly
                .coeffs()
                .iter()
                .take_while(|c| **c == Complex64::ZERO)
                .count() as f64;
            let deg = poly.degree() as f64;
            let lead_arg = poly.coeffs()[poly.degree()].arg().to_degrees();
            let tail_arg = poly.coeffs()[origin as usize].arg().to_degrees();
            Ok(Asymptotics {
                low_slope_db_dec: k * 20.0 * a * origin,
                low_phase_deg: k * (90.0 * a * origin + tail_arg),
                high_slope_db_dec: k * 20.0 * a * deg,
                high_phase_deg: k * (90.0 * a * deg + lead_arg),
            })
        }
        Factor::Product { factors } => {
            let mut acc = Asymptotics {
                low_slope_db_dec: 0.0,
                low_phase_deg: 0.0,
                high_slope_db_dec: 0.0,
                high_phase_deg: 0.0,
            };
            for g in factors {
                acc = acc.sum(asymptotics(g)?);
            }
            Ok(acc)
        }
        other => Err(Error::Unsupported(format!(
            "asymptotics is defined for fractional factor classes, not {other:?}"
        ))),
    }
}

/// `Q(w) = sum_{n=0}^{nu-1} (w / lambda0)^n` for `lambda0` the principal
/// `nu`-th root of `z`; satisfies `(1 - w/lambda0) Q(w) = 1 - w^nu / z`.
pub(crate) fn q_single(z: Complex64, nu: u32) -> Result<PseudoPolynomial> {
    let lambda0 = crate::focore::complex_power(z, 1.0 / f64::from(nu))?;
    let inv = Complex64::ONE / lambda0;
    let mut coeffs = Vec::with_capacity(nu as usize);
    let mut acc = Complex64::ONE;
    for _ in 0..nu {
        coeffs.push(acc);
        acc *= inv;
    }
    PseudoPolynomial::new(crate::focore::Alpha::from_nu(nu), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focore::{eval_at, Alpha};
    use approx::assert_relative_eq;

    #[test]
    fn char_points_at_half_order() {
        let c = explicit_char_points(1.0, 0.5).unwrap();
        assert_relative_eq!(c.omega_min.unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(c.magnitude_at_min.unwrap(), std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(c.phase_at_min_deg.unwrap(), -45.0, max_relative = 1e-12);
        assert_relative_eq!(c.phase_at_z_deg, -67.5, max_relative = 1e-12);
    }

    #[test]
    fn integer_order_has_no_interior_minimum() {
        let c = explicit_char_points(2.0, 1.0).unwrap();
        assert!(c.omega_min.is_none());
        assert_relative_eq!(c.phase_at_z_deg, -45.0, max_relative = 1e-12);
    }

    #[test]
    fn asymptotics_of_half_order_pseudo_zero() {
        let f = Factor::ExplicitX {
            z: Complex64::ONE,
            alpha: Alpha::from_nu(2),
            k: 1,
            pair: false,
        };
        let a = asymptotics(&f).unwrap();
        assert_relative_eq!(a.high_slope_db_dec, 10.0);
        assert_relative_eq!(a.high_phase_deg, -135.0);
        assert_relative_eq!(a.low_slope_db_dec, 0.0);
    }

    #[test]
    fn asymptotics_of_quarter_order_pair_of_pseudo_poles() {
        let f = Factor::ExplicitX {
            z: Complex64::new(0.5, 1.0),
            alpha: Alpha::from_nu(4),
            k: -1,
            pair: true,
        };
        let a = asymptotics(&f).unwrap();
        assert_relative_eq!(a.high_slope_db_dec, -10.0);
        assert_relative_eq!(a.high_phase_deg, 315.0);
    }

    #[test]
    fn asymptotics_of_integer_order_zero_is_classical() {
        let f = Factor::ExplicitX {
            z: Complex64::ONE,
            alpha: Alpha::Real(1.0),
            k: 1,
            pair: false,
        };
        let a = asymptotics(&f).unwrap();
        assert_relative_eq!(a.high_slope_db_dec, 20.0);
        assert_relative_eq!(a.high_phase_deg, -90.0);
    }

    #[test]
    fn asymptotics_rejects_plain_gain() {
        assert!(asymptotics(&Factor::gain(2.0)).is_err());
    }

    #[test]
    fn plan_explicit_real_zero_round_trip() {
        let plan = CancellationPlan::new(
            CancelTarget::Real { z: 1.0 },
            1,
            2,
            Method::Explicit,
        )
        .unwrap();
        // Loop effect: Z * compensator must equal the residual.
        let z_factor = Factor::io_rational(vec![1.0, -1.0], vec![1.0]);
        let s = Complex64::new(0.0, 0.7);
        let lhs = eval_at(
            &crate::focore::FactoredTf::new(vec![z_factor, plan.compensator.clone()]),
            s,
        )
        .unwrap();
        let rhs = eval_at(&crate::focore::FactoredTf::new(vec![plan.residual.clone()]), s).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn plan_mirror_residual_is_all_pass() {
        let plan =
            CancellationPlan::new(CancelTarget::Real { z: 1.0 }, 1, 2, Method::Mirror).unwrap();
        for omega in [0.1, 1.0, 10.0] {
            let v = crate::focore::factor_value(&plan.residual, Complex64::new(0.0, omega)).unwrap();
            assert_relative_eq!(v.norm(), 1.0, max_relative = 1e-12);
        }
        // Spec point: (1-j)/(1+j) = -j.
        let v = crate::focore::factor_value(&plan.residual, Complex64::new(0.0, 1.0)).unwrap();
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn stable_pair_rejects_mirror_and_zero_sign() {
        let p = Complex64::new(-0.2, 1.0);
        assert!(CancellationPlan::new(CancelTarget::StablePair { p }, -1, 2, Method::Mirror)
            .is_err());
        assert!(CancellationPlan::new(CancelTarget::StablePair { p }, 1, 2, Method::Explicit)
            .is_err());
    }
}
