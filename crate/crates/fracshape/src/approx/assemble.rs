//! Factor-by-factor rational approximation of a factored transfer function.
//!
//! Each factor is approximated independently on the same band and the
//! results are multiplied.  Fractional monomials get a ladder each; pseudo
//! polynomials substitute a ladder per distinct fractional exponent and
//! recombine over a common denominator; binomial powers go through the
//! affine-substituted forms.  Integer-order content is passed through
//! exactly, never approximated.

use super::{approx_implicit_pair, approx_implicit_real, oustaloup, poly_mul_real, BandSpec, RationalTf};
use crate::error::{Error, Result};
use crate::focore::{Factor, FactoredTf};
use num_complex::Complex64;

/// Snap tolerance for "this exponent is an integer".
const EXP_SNAP: f64 = 1e-9;

/// Splits an exponent into integer and fractional-residue parts,
/// `e = i + f` with `f` in `(-1, 1)` carrying the sign of `e`'s remainder
/// and snapped to zero when `e` is an integer to within 1e-9.
fn split_exponent(e: f64) -> (i64, f64) {
    let i = e.trunc();
    let f = e - i;
    if f.abs() < EXP_SNAP {
        (i as i64, 0.0)
    } else if f.abs() > 1.0 - EXP_SNAP {
        let carry = f.signum();
        ((i + carry) as i64, 0.0)
    } else {
        (i as i64, f)
    }
}

fn s_to_the(i: u32) -> RationalTf {
    let mut num = vec![0.0; i as usize + 1];
    num[i as usize] = 1.0;
    RationalTf::new(num, vec![1.0]).expect("monomial is a valid rational")
}

fn integer_monomial(i: i64) -> Result<RationalTf> {
    let m = s_to_the(i.unsigned_abs() as u32);
    if i >= 0 {
        Ok(m)
    } else {
        m.recip()
    }
}

/// Exact rational for an integer power of a binomial with root `r`
/// (`(1 - s/r)^i`, real `r`) guarded against `i = 0`.
fn integer_binomial(c: f64, i: i64) -> Result<RationalTf> {
    let mut p = vec![1.0];
    for _ in 0..i.unsigned_abs() {
        p = poly_mul_real(&p, &[1.0, c]);
    }
    let tf = RationalTf::new(p, vec![1.0])?;
    if i >= 0 {
        Ok(tf)
    } else {
        tf.recip()
    }
}

/// Exact rational for `[(1 - s/p)(1 - s/conj p)]^i`.
fn integer_pair(p: Complex64, i: i64) -> Result<RationalTf> {
    let r2 = p.norm_sqr();
    let quad = [1.0, -2.0 * p.re / r2, 1.0 / r2];
    let mut acc = vec![1.0];
    for _ in 0..i.unsigned_abs() {
        acc = poly_mul_real(&acc, &quad);
    }
    let tf = RationalTf::new(acc, vec![1.0])?;
    if i >= 0 {
        Ok(tf)
    } else {
        tf.recip()
    }
}

fn poly_add_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] += c;
    }
    out
}

fn approx_monomial(beta: f64, band: &BandSpec) -> Result<RationalTf> {
    if beta == 0.0 {
        return Ok(RationalTf::one());
    }
    // Split at the floor so the residue is a positive power in (0, 1); a
    // negative monomial then inherits an exact integrator and keeps the
    // true stationary slope.
    let fl = beta.floor();
    let (i, f) = if beta - fl < EXP_SNAP {
        (fl as i64, 0.0)
    } else if beta - fl > 1.0 - EXP_SNAP {
        (fl as i64 + 1, 0.0)
    } else {
        (fl as i64, beta - fl)
    };
    let mut acc = integer_monomial(i)?;
    if f != 0.0 {
        acc = acc.mul(&oustaloup(f, band)?)?;
    }
    Ok(acc)
}

fn approx_explicit(z: Complex64, alpha: f64, k: i8, pair: bool, band: &BandSpec) -> Result<RationalTf> {
    let tf = if alpha == 1.0 {
        // Degenerate explicit factor is already rational.
        if pair {
            integer_pair(z, 1)?
        } else {
            if z.im != 0.0 {
                return Err(Error::Unsupported(
                    "an unpaired explicit factor with a complex root has no \
                     real-coefficient rational form; set pair true"
                        .into(),
                ));
            }
            RationalTf::new(vec![1.0, -1.0 / z.re], vec![1.0])?
        }
    } else {
        let h = oustaloup(alpha, band)?;
        let (n, d) = (h.num(), h.den());
        if pair {
            // (1 - c H)(1 - conj(c) H) with c = z^-alpha keeps everything real.
            let c = crate::focore::complex_power(z, -alpha)?;
            let (a, b) = (2.0 * c.re, c.norm_sqr());
            let dd = poly_mul_real(d, d);
            let nd: Vec<f64> = poly_mul_real(n, d).iter().map(|x| -a * x).collect();
            let nn: Vec<f64> = poly_mul_real(n, n).iter().map(|x| b * x).collect();
            RationalTf::new(poly_add_real(&poly_add_real(&dd, &nd), &nn), dd)?
        } else {
            if z.im != 0.0 {
                return Err(Error::Unsupported(
                    "an unpaired explicit factor with a complex root has no \
                     real-coefficient rational form; set pair true"
                        .into(),
                ));
            }
            if z.re <= 0.0 {
                return Err(Error::Unsupported(
                    "an unpaired explicit factor needs a positive real root \
                     for a real-coefficient rational form"
                        .into(),
                ));
            }
            let c = z.re.powf(-alpha);
            let scaled: Vec<f64> = n.iter().map(|x| -c * x).collect();
            RationalTf::new(poly_add_real(d, &scaled), d.to_vec())?
        }
    };
    if k < 0 {
        tf.recip()
    } else {
        Ok(tf)
    }
}

fn approx_pseudo_poly(
    poly: &crate::focore::PseudoPolynomial,
    k: i8,
    band: &BandSpec,
) -> Result<RationalTf> {
    let coeffs = poly.realized().map_err(|_| {
        Error::Unsupported(
            "a pseudo polynomial with complex coefficients has no \
             real-coefficient rational approximation"
                .into(),
        )
    })?;
    let alpha = poly.alpha().value();

    // One ladder per distinct fractional exponent residue.
    let mut residues: Vec<(f64, RationalTf)> = Vec::new();
    let mut terms: Vec<(f64, u32, Option<usize>)> = Vec::new(); // coeff, s power, residue idx
    for (m, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let (i, f) = split_exponent(m as f64 * alpha);
        debug_assert!(i >= 0);
        let idx = if f == 0.0 {
            None
        } else {
            match residues.iter().position(|(g, _)| (g - f).abs() < EXP_SNAP) {
                Some(j) => Some(j),
                None => {
                    residues.push((f, oustaloup(f, band)?));
                    Some(residues.len() - 1)
                }
            }
        };
        terms.push((c, i as u32, idx));
    }
    if terms.is_empty() {
        return Err(Error::Domain("pseudo polynomial with no nonzero terms".into()));
    }

    // Common denominator: the product of every residue ladder's denominator.
    let mut den = vec![1.0];
    for (_, h) in &residues {
        den = poly_mul_real(&den, h.den());
    }
    let mut num = vec![0.0];
    for (c, ipow, idx) in terms {
        let mut t = vec![0.0; ipow as usize + 1];
        t[ipow as usize] = c;
        match idx {
            None => {
                for (_, h) in &residues {
                    t = poly_mul_real(&t, h.den());
                }
            }
            Some(j) => {
                t = poly_mul_real(&t, residues[j].1.num());
                for (jj, (_, h)) in residues.iter().enumerate() {
                    if jj != j {
                        t = poly_mul_real(&t, h.den());
                    }
                }
            }
        }
        num = poly_add_real(&num, &t);
    }
    let tf = RationalTf::new(num, den)?;
    if k < 0 {
        tf.recip()
    } else {
        Ok(tf)
    }
}

fn approx_implicit(
    z: Complex64,
    beta: f64,
    pair: bool,
    mirrored: bool,
    band: &BandSpec,
) -> Result<RationalTf> {
    if beta == 0.0 {
        return Ok(RationalTf::one());
    }
    let (i, f) = split_exponent(beta);
    let mut acc = RationalTf::one();
    if pair {
        // Mirrored pair (1 + s/z)(1 + s/conj z) is the plain pair at -z.
        let p_eff = if mirrored { -z } else { z };
        if i != 0 {
            acc = acc.mul(&integer_pair(p_eff, i)?)?;
        }
        if f != 0.0 {
            acc = acc.mul(&approx_implicit_pair(p_eff, f, band)?)?;
        }
    } else {
        if z.im != 0.0 {
            return Err(Error::Unsupported(
                "an unpaired binomial power with a complex root has no \
                 real-coefficient rational form; set pair true"
                    .into(),
            ));
        }
        if z.re <= 0.0 {
            return Err(Error::Domain(format!(
                "binomial corner z must be positive, got {}",
                z.re
            )));
        }
        let c = if mirrored { 1.0 / z.re } else { -1.0 / z.re };
        if i != 0 {
            acc = acc.mul(&integer_binomial(c, i)?)?;
        }
        if f != 0.0 {
            acc = acc.mul(&approx_implicit_real(z.re, f, mirrored, band)?)?;
        }
    }
    Ok(acc)
}

fn approx_factor(factor: &Factor, band: &BandSpec) -> Result<RationalTf> {
    match factor {
        Factor::Gain { g } => RationalTf::new(vec![*g], vec![1.0]),
        Factor::Monomial { beta } => approx_monomial(*beta, band),
        Factor::ExplicitX { z, alpha, k, pair } => {
            approx_explicit(*z, alpha.value(), *k, *pair, band)
        }
        Factor::PseudoPoly { poly, k } => approx_pseudo_poly(poly, *k, band),
        Factor::ImplicitPower { z, beta, pair, mirrored } => {
            approx_implicit(*z, *beta, *pair, *mirrored, band)
        }
        Factor::IoRational { num, den } => RationalTf::new(num.clone(), den.clone()),
        Factor::Product { factors } => {
            let mut acc = RationalTf::one();
            for f in factors {
                acc = acc.mul(&approx_factor(f, band)?)?;
            }
            Ok(acc)
        }
    }
}

/// Band-limited rational approximation of a whole factored transfer
/// function: every fractional factor is fit on `band`, integer-order
/// factors pass through exactly, and the per-factor results are multiplied
/// (with the sign flip if the function is negated).
pub fn approximate_tf(tf: &FactoredTf, band: &BandSpec) -> Result<RationalTf> {
    let mut acc = RationalTf::one();
    for f in tf.flattened_factors() {
        acc = acc.mul(&approx_factor(f, band)?)?;
    }
    if tf.negated {
        acc = acc.scale(-1.0)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focore::{eval_at, Alpha, PseudoPolynomial};
    use approx::assert_relative_eq;

    fn band(wl: f64, wh: f64, n: u32) -> BandSpec {
        BandSpec::new(wl, wh, n).unwrap()
    }

    fn tf_of(factors: Vec<Factor>) -> FactoredTf {
        FactoredTf::new(factors)
    }

    #[test]
    fn inverted_half_order_binomial_matches_its_exact_value_at_one() {
        // (1 + s^(1/2))^(-1) at s = j: |1 + e^(j pi/4)|^(-1).
        let q = PseudoPolynomial::from_real(
            Alpha::Ratio { num: 1, den: 2 },
            vec![1.0, 1.0],
        )
        .unwrap();
        let tf = tf_of(vec![Factor::PseudoPoly { poly: q.clone(), k: -1 }]);
        let h = approximate_tf(&tf, &band(1e-3, 1e3, 5)).unwrap();
        let got = h.eval(Complex64::new(0.0, 1.0));
        let want = eval_at(&tf, Complex64::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(want.norm(), 0.5411961001461971, max_relative = 1e-12);
        assert_relative_eq!(got.norm(), want.norm(), max_relative = 0.01);
        assert!((got.arg() - want.arg()).to_degrees().abs() < 1.0);
    }

    #[test]
    fn monomial_split_reuses_the_integrator_anchored_form() {
        let b = band(0.01, 100.0, 5);
        let via_tf = approx_monomial(-0.5, &b).unwrap();
        let direct = super::super::approx_neg_power(0.5, &b).unwrap();
        assert_eq!(via_tf.num(), direct.num());
        assert_eq!(via_tf.den(), direct.den());

        let h = approx_monomial(1.5, &b).unwrap();
        for &w in &[0.1, 1.0, 10.0] {
            assert_relative_eq!(
                h.eval(Complex64::new(0.0, w)).norm(),
                w.powf(1.5),
                max_relative = 0.02
            );
        }
    }

    #[test]
    fn explicit_pair_approximation_tracks_the_exact_factor() {
        let z = Complex64::from_polar(1.0, 0.55 * std::f64::consts::PI);
        let tf = tf_of(vec![Factor::ExplicitX {
            z,
            alpha: Alpha::Ratio { num: 1, den: 2 },
            k: 1,
            pair: true,
        }]);
        let h = approximate_tf(&tf, &band(1e-3, 1e3, 6)).unwrap();
        for &w in &[0.05, 0.3, 1.0, 4.0, 20.0] {
            let s = Complex64::new(0.0, w);
            let want = eval_at(&tf, s).unwrap();
            let got = h.eval(s);
            assert_relative_eq!(got.norm(), want.norm(), max_relative = 0.03);
            assert!((got.arg() - want.arg()).to_degrees().abs() < 2.0);
        }
    }

    #[test]
    fn integer_order_content_passes_through_exactly() {
        let tf = FactoredTf::negated(vec![
            Factor::gain(2.0),
            Factor::io_rational(vec![-1.0, 1.0], vec![1.0, 0.5]),
            Factor::ImplicitPower {
                z: Complex64::new(3.0, 0.0),
                beta: -2.0,
                pair: false,
                mirrored: true,
            },
        ]);
        let h = approximate_tf(&tf, &band(0.1, 10.0, 2)).unwrap();
        // -2 (s-1) / ((1+s/2)(1+s/3)^2): entirely rational, no ladder.
        assert_eq!(h.degrees(), (1, 3));
        let s = Complex64::new(0.3, 0.7);
        let want = eval_at(&tf, s).unwrap();
        let got = h.eval(s);
        assert_relative_eq!(got.re, want.re, max_relative = 1e-12);
        assert_relative_eq!(got.im, want.im, max_relative = 1e-12);
    }

    #[test]
    fn unpaired_complex_roots_are_refused() {
        let tf = tf_of(vec![Factor::ExplicitX {
            z: Complex64::new(1.0, 1.0),
            alpha: Alpha::Ratio { num: 1, den: 2 },
            k: 1,
            pair: false,
        }]);
        match approximate_tf(&tf, &band(0.1, 10.0, 2)) {
            Err(Error::Unsupported(_)) => {}
            other => panic!("expected Unsupported, got {other:?}"),
        }
    }

    #[test]
    fn pseudo_polynomial_with_mixed_exponents_combines_over_a_common_denominator() {
        // 1 + 2 s^(1/2) + s + s^(3/2): residues {1/2} only.
        let q = PseudoPolynomial::from_real(
            Alpha::Ratio { num: 1, den: 2 },
            vec![1.0, 2.0, 1.0, 1.0],
        )
        .unwrap();
        let tf = tf_of(vec![Factor::PseudoPoly { poly: q, k: 1 }]);
        let h = approximate_tf(&tf, &band(1e-3, 1e3, 5)).unwrap();
        for &w in &[0.1, 1.0, 7.0] {
            let s = Complex64::new(0.0, w);
            let want = eval_at(&tf, s).unwrap();
            let got = h.eval(s);
            assert_relative_eq!(got.norm(), want.norm(), max_relative = 0.03);
            assert!((got.arg() - want.arg()).to_degrees().abs() < 2.0);
        }
    }
}
