//! Explicit expansion splits: real targets, right-half-plane conjugate
//! pairs, and stable pole pairs.

use super::q_single;
use crate::error::{Error, Result};
use crate::focore::{matignon_stable, pseudo_roots, Alpha, Factor, PseudoPolynomial};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Splits `Z^k = (1 - s/z)^k`, `z > 0`, into the fractional residual
/// `X^k = (1 - (s/z)^(1/nu))^k` and the expansion factor `Q^k`, where
/// `Q(w) = sum_n (w/z^(1/nu))^n` has all `nu - 1` roots on the circle of
/// radius `z^(1/nu)` at arguments `2 pi n / nu`, strictly inside the stable
/// sector.  Returns `(X, Q)`; `X * Q = Z` holds as a polynomial identity in
/// `w = s^(1/nu)`.
pub fn expand_real(z: f64, nu: u32, k: i8) -> Result<(Factor, Factor)> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Domain(format!("expansion target z = {z} must be real > 0")));
    }
    check_nu_k(nu, k)?;
    let q = q_single(Complex64::new(z, 0.0), nu)?;
    verify_sector(&q)?;
    let x = Factor::ExplicitX {
        z: Complex64::new(z, 0.0),
        alpha: Alpha::from_nu(nu),
        k,
        pair: false,
    };
    Ok((x, Factor::PseudoPoly { poly: q, k }))
}

/// Pair form of [`expand_real`] for a right-half-plane conjugate pair
/// `(z, conj z)`: returns the real-response residual
/// `X_pair^k = [(1 - (s/z)^(1/nu))(1 - (s/conj z)^(1/nu))]^k` and the
/// real-coefficient expansion polynomial of degree `2(nu - 1)`.
pub fn expand_pair(z: Complex64, nu: u32, k: i8) -> Result<(Factor, Factor)> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain("pair target is not finite".into()));
    }
    if z.re <= 0.0 {
        return Err(Error::Domain(format!(
            "pair target {z} is not in the open right half plane; a stable pair is handled by stable_pair_cancel"
        )));
    }
    if z.im == 0.0 {
        return Err(Error::Domain("degenerate pair: Im z = 0 (use the single form)".into()));
    }
    check_nu_k(nu, k)?;
    let q = pair_remainder(z, nu)?;
    verify_sector(&q)?;
    let x = Factor::ExplicitX { z, alpha: Alpha::from_nu(nu), k, pair: true };
    Ok((x, Factor::PseudoPoly { poly: q, k }))
}

/// `Q_{z,nu}(w) * Q_{conj z,nu}(w)`, realized with exactly real
/// coefficients.
fn pair_remainder(z: Complex64, nu: u32) -> Result<PseudoPolynomial> {
    let q = q_single(z, nu)?;
    let prod = q.mul(&q.conj())?;
    PseudoPolynomial::from_real(prod.alpha(), prod.realized()?)
}

fn check_nu_k(nu: u32, k: i8) -> Result<()> {
    if nu < 2 {
        return Err(Error::Domain(format!("expansion order nu = {nu} must be >= 2")));
    }
    if k != 1 && k != -1 {
        return Err(Error::Domain(format!("exponent sign k = {k}, expected +1 or -1")));
    }
    Ok(())
}

/// Every constructed expansion polynomial must pass the sector test; this
/// is the safety property the whole method rests on, so it is checked at
/// construction rather than assumed.
fn verify_sector(q: &PseudoPolynomial) -> Result<()> {
    let report = matignon_stable(q)?;
    if report.stable && !report.indeterminate {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "expansion polynomial has a root at or outside the stable sector (margin {:?} rad)",
            report.min_margin_rad
        )))
    }
}

/// Partial cancellation of a stable but low-damped pole pair `P^-1`,
/// `P = (1 - s/p)(1 - s/conj p)` with `p` strictly inside the left half
/// plane.
#[derive(Debug, Clone, PartialEq)]
pub struct StablePairSplit {
    /// Controller-side factor: the principal-root pair
    /// `(1 - (s/p)^(1/nu))(1 - (s/conj p)^(1/nu))`, a fractional notch that
    /// exactly equals `P / remaining`, so multiplying the loop by it
    /// replaces `P^-1` with `remaining^-1`.
    pub compensator: Factor,
    /// What the loop keeps: the inverse of the remaining-root polynomial.
    pub residual: Factor,
    /// The remaining-root polynomial itself: real coefficients, degree
    /// `2(nu - 1)`, roots at arguments `(arg p + 2 pi n)/nu`, `n >= 1`,
    /// all strictly inside the stable sector and much better damped than
    /// the principal pair.
    pub remaining: PseudoPolynomial,
    /// True when every remaining root also clears the non-oscillation
    /// threshold `|arg| >= pi/nu`; a false value warns that the kept poles
    /// still produce an oscillatory step response.
    pub non_oscillatory: bool,
    /// Implicit counterpart of `compensator`: `P^((nu-1)/nu)`.
    pub implicit_compensator: Factor,
    /// Implicit counterpart of `residual`: `P^(-1/nu)`, a flattened
    /// fractional pole pair.
    pub implicit_residual: Factor,
}

/// Splits a stable pole pair so that only its principal `w`-plane roots
/// are cancelled.
///
/// With `p` in the open left half plane, every `nu`-th root of `p` except
/// the principal one sits deep inside the stable sector; the principal
/// roots `p^(1/nu)`, `conj(p)^(1/nu)` are the resonant ones (argument
/// `|arg p|/nu`, closest to the boundary `pi/(2 nu)`).  Cancelling exactly
/// those two replaces the pair's resonance with the flatter response of
/// the remaining roots.
pub fn stable_pair_cancel(p: Complex64, nu: u32) -> Result<StablePairSplit> {
    if !(p.re.is_finite() && p.im.is_finite()) {
        return Err(Error::Domain("pole pair is not finite".into()));
    }
    let phi = p.arg().abs();
    if !(phi > PI / 2.0 && phi < PI) {
        return Err(Error::Domain(format!(
            "pole pair target {p} must lie strictly inside the open left half plane with Im p != 0"
        )));
    }
    check_nu_k(nu, -1)?;

    let remaining = pair_remainder(p, nu)?;
    verify_sector(&remaining)?;

    let threshold = PI / f64::from(nu);
    let non_oscillatory = pseudo_roots(&remaining)?
        .iter()
        .all(|r| r.arg().abs() >= threshold - 1e-12);

    let alpha = Alpha::from_nu(nu);
    let beta_q = f64::from(nu - 1) / f64::from(nu);
    Ok(StablePairSplit {
        compensator: Factor::ExplicitX { z: p, alpha, k: 1, pair: true },
        residual: Factor::PseudoPoly { poly: remaining.clone(), k: -1 },
        remaining,
        non_oscillatory,
        implicit_compensator: Factor::ImplicitPower {
            z: p,
            beta: beta_q,
            pair: true,
            mirrored: false,
        },
        implicit_residual: Factor::ImplicitPower {
            z: p,
            beta: -1.0 / f64::from(nu),
            pair: true,
            mirrored: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focore::{eval_at, factor_value, FactoredTf};
    use approx::assert_relative_eq;

    #[test]
    fn real_expansion_for_nu_two_is_one_plus_root_s() {
        let (x, q) = expand_real(1.0, 2, 1).unwrap();
        match &q {
            Factor::PseudoPoly { poly, k } => {
                assert_eq!(*k, 1);
                assert_eq!(poly.coeffs(), &[Complex64::ONE, Complex64::ONE]);
            }
            other => panic!("unexpected factor {other:?}"),
        }
        match &x {
            Factor::ExplicitX { alpha, .. } => assert_eq!(*alpha, Alpha::from_nu(2)),
            other => panic!("unexpected factor {other:?}"),
        }
    }

    #[test]
    fn product_reproduces_the_binomial_on_the_axis() {
        let (x, q) = expand_real(1.0, 2, 1).unwrap();
        let tf = FactoredTf::new(vec![x, q]);
        for omega in [0.1, 1.0, 10.0] {
            let s = Complex64::new(0.0, omega);
            let v = eval_at(&tf, s).unwrap();
            assert!((v - (Complex64::ONE - s)).norm() <= 1e-12, "omega {omega}: {v}");
        }
    }

    #[test]
    fn cubic_expansion_roots_sit_at_plus_minus_120_degrees() {
        let (_, q) = expand_real(1.0, 3, 1).unwrap();
        let poly = match q {
            Factor::PseudoPoly { poly, .. } => poly,
            _ => unreachable!(),
        };
        let roots = pseudo_roots(&poly).unwrap();
        for r in roots {
            assert_relative_eq!(r.arg().abs(), 2.0 * PI / 3.0, max_relative = 1e-12);
            assert_relative_eq!(r.norm(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn pair_expansion_matches_the_closed_form() {
        // z = e^{j pi/3}, nu = 2: residual pair is s - sqrt(3) s^(1/2) + 1.
        let z = Complex64::from_polar(1.0, PI / 3.0);
        let (x, q) = expand_pair(z, 2, 1).unwrap();
        for omega in [0.2, 1.0, 5.0] {
            let s = Complex64::new(0.0, omega);
            let v = factor_value(&x, s).unwrap();
            let sa = crate::focore::complex_power(s, 0.5).unwrap();
            let closed = s - 3.0f64.sqrt() * sa + Complex64::ONE;
            assert!((v - closed).norm() <= 1e-12 * closed.norm().max(1.0));
        }
        // Remainder has real coefficients and degree 2(nu-1) = 2.
        let poly = match q {
            Factor::PseudoPoly { poly, .. } => poly,
            _ => unreachable!(),
        };
        assert_eq!(poly.degree(), 2);
        assert!(poly.is_real());
    }

    #[test]
    fn pair_expansion_worst_case_clears_the_sector() {
        // arg z just under pi/2, nu = 4: every remaining root must keep
        // |arg| > pi/8.
        let z = Complex64::from_polar(1.0, PI / 2.0 - 1e-6);
        let (_, q) = expand_pair(z, 4, 1).unwrap();
        let poly = match q {
            Factor::PseudoPoly { poly, .. } => poly,
            _ => unreachable!(),
        };
        for r in pseudo_roots(&poly).unwrap() {
            assert!(r.arg().abs() > PI / 8.0, "root {r} inside the sector");
        }
    }

    #[test]
    fn pair_expansion_rejects_left_half_plane_and_real_targets() {
        assert!(expand_pair(Complex64::new(-1.0, 1.0), 2, 1).is_err());
        assert!(expand_pair(Complex64::new(1.0, 0.0), 2, 1).is_err());
    }

    #[test]
    fn stable_pair_principal_roots_and_remainder() {
        // The worked pair: p at argument 99 degrees reflected into the
        // left half plane, magnitude 1.
        let p = Complex64::from_polar(1.0, 11.0 * PI / 20.0);
        let split = stable_pair_cancel(p, 2).unwrap();

        // Compensator zeros are the principal roots at +-49.5 degrees.
        match &split.compensator {
            Factor::ExplicitX { z, alpha, k, pair } => {
                assert_eq!(*z, p);
                assert_eq!(*alpha, Alpha::from_nu(2));
                assert_eq!((*k, *pair), (1, true));
            }
            other => panic!("unexpected factor {other:?}"),
        }

        // Remaining roots at |arg| = 130.5 degrees: stable and clear of the
        // oscillation threshold pi/2.
        let roots = pseudo_roots(&split.remaining).unwrap();
        for r in &roots {
            // (phi + 2 pi)/2 = 229.5 degrees, wrapped to -130.5.
            assert_relative_eq!(
                r.arg().abs(),
                2.0 * PI - (11.0 * PI / 20.0 + 2.0 * PI) / 2.0,
                max_relative = 1e-9
            );
        }
        assert!(split.non_oscillatory);

        // Identity: P = compensator * remaining pointwise, so the loop's
        // P^-1 times the compensator leaves remaining^-1.
        let pair_poly = Factor::io_rational(
            vec![1.0, -2.0 * p.re / p.norm_sqr(), 1.0 / p.norm_sqr()],
            vec![1.0],
        );
        for omega in [0.3, 1.0, 3.0] {
            let s = Complex64::new(0.0, omega);
            let lhs = eval_at(&FactoredTf::new(vec![pair_poly.clone()]), s).unwrap();
            let rhs = eval_at(&FactoredTf::new(vec![split.compensator.clone()]), s).unwrap()
                * split.remaining.eval_s(s).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm(), "omega {omega}");
        }
    }

    #[test]
    fn stable_pair_rejects_rhp_and_real_poles() {
        assert!(stable_pair_cancel(Complex64::new(0.5, 1.0), 2).is_err());
        assert!(stable_pair_cancel(Complex64::new(-1.0, 0.0), 2).is_err());
    }
}
