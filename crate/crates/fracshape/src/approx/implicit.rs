//! Rational approximation of binomial fractional powers `(1 -+ s/z)^beta`.
//!
//! The trick is a change of variable: with `x = 1 -+ s/z`, the target is
//! `x^beta`, so a ladder for the pure power composed with the affine map
//! does the job.  `x^-a` uses the integrator-anchored form `H_{1-a}(x)/x`,
//! which lands every corner at a finite point `s = +-z (1 + w)` -- the
//! composition is carried out root by root, never through an ill-scaled
//! coefficient substitution.
//!
//! Because `x(j omega)` sweeps magnitudes `sqrt(1 + (omega/z)^2)` rather
//! than `omega` itself, the internal ladder band is widened to cover the
//! swept range with a decade of margin on both sides; the caller's band
//! keeps its meaning as "where the fit is wanted in `omega`".

use super::oustaloup::corners;
use super::{BandSpec, RationalTf};
use crate::error::{Error, Result};
use crate::focore::poly_mul;
use num_complex::Complex64;

fn check_exponent(beta: f64) -> Result<f64> {
    let a = beta.abs();
    if !(beta.is_finite() && a > 0.0 && a <= 1.0) {
        return Err(Error::Domain(format!(
            "binomial exponent magnitude must lie in (0, 1], got {beta}"
        )));
    }
    Ok(a)
}

fn check_stable_result(h: &RationalTf) -> Result<()> {
    for p in h.poles()? {
        if p.re >= 0.0 {
            return Err(Error::Numerical(format!(
                "approximation of a stable binomial produced pole {p}; \
                 this indicates a conditioning failure -- reduce N or narrow the band"
            )));
        }
    }
    Ok(())
}

/// Rational approximation of `(1 - s/z)^beta` (or `(1 + s/z)^beta` when
/// `mirrored`), `z > 0`, `0 < |beta| <= 1`.
///
/// `|beta| = 1` returns the exact first-order factor.  Otherwise the fit
/// holds to within about 2 dB and 5 degrees on the inner part of the band
/// (a decade in from each edge); see the crate docs for edge behaviour.
/// The mirrored variant is stable and its result is verified to keep every
/// pole in the open left half plane; the plain variant faithfully carries
/// the target's right-half-plane singularities.
pub fn approx_implicit_real(z: f64, beta: f64, mirrored: bool, band: &BandSpec) -> Result<RationalTf> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Domain(format!("binomial corner z must be positive, got {z}")));
    }
    let alpha = check_exponent(beta)?;
    // Root of the binomial in s: +z plain, -z mirrored.
    let c = if mirrored { 1.0 / z } else { -1.0 / z };
    let h = if alpha == 1.0 {
        RationalTf::new(vec![1.0], vec![1.0, c])?
    } else {
        let x_min = (1.0 + (band.omega_l() / z).powi(2)).sqrt();
        let x_max = (1.0 + (band.omega_h() / z).powi(2)).sqrt();
        let inner = band.widened_to_cover(x_min, x_max);
        let (zs, ps) = corners(1.0 - alpha, &inner);
        let gain = inner.omega_h().powf(1.0 - alpha);
        let mut num = vec![gain];
        for w in zs {
            num = super::poly_mul_real(&num, &[1.0 + w, c]);
        }
        let mut den = vec![1.0, c];
        for w in ps {
            den = super::poly_mul_real(&den, &[1.0 + w, c]);
        }
        RationalTf::new(num, den)?
    };
    let h = if beta > 0.0 { h.recip()? } else { h };
    if mirrored {
        check_stable_result(&h)?;
    }
    Ok(h)
}

/// Rational approximation of `[(1 - s/p)(1 - s/conj(p))]^beta` for a true
/// complex pair (`p` off both axes), `0 < |beta| <= 1`.
///
/// Each root gets the same widened ladder band (sharing corners is what
/// makes the product's coefficients conjugate-cancel to real); the complex
/// intermediates are multiplied and rounded to real under a 1e-10 relative
/// residue check.  A pair close to the imaginary axis concentrates its
/// corners near the resonance; expect narrow spikes there and validate the
/// fit on the window that matters.
pub fn approx_implicit_pair(p: Complex64, beta: f64, band: &BandSpec) -> Result<RationalTf> {
    if !(p.re.is_finite() && p.im.is_finite()) || p.re == 0.0 || p.im == 0.0 {
        return Err(Error::Domain(format!(
            "pair root must be complex and off both axes, got {p}"
        )));
    }
    let alpha = check_exponent(beta)?;
    let h = if alpha == 1.0 {
        let r2 = p.norm_sqr();
        RationalTf::new(vec![1.0], vec![1.0, -2.0 * p.re / r2, 1.0 / r2])?
    } else {
        let (wl, wh) = (band.omega_l(), band.omega_h());
        // |x(j omega)| = |p - j omega| / |p| over the band, for both roots.
        let seg_min = |r: Complex64| {
            let w = r.im.clamp(wl, wh);
            (r - Complex64::new(0.0, w)).norm() / r.norm()
        };
        let seg_max = |r: Complex64| {
            let at = |w: f64| (r - Complex64::new(0.0, w)).norm();
            at(wl).max(at(wh)) / r.norm()
        };
        let lo = seg_min(p).min(seg_min(p.conj()));
        let hi = seg_max(p).max(seg_max(p.conj()));
        let inner = band.widened_to_cover(lo, hi);
        let (zs, ps) = corners(1.0 - alpha, &inner);
        let gain = inner.omega_h().powf(1.0 - alpha);

        let one_root = |r: Complex64| -> (Vec<Complex64>, Vec<Complex64>) {
            let a = -Complex64::ONE / r;
            let mut num = vec![Complex64::new(gain, 0.0)];
            for &w in &zs {
                num = poly_mul(&num, &[Complex64::new(1.0 + w, 0.0), a]);
            }
            let mut den = vec![Complex64::ONE, a];
            for &w in &ps {
                den = poly_mul(&den, &[Complex64::new(1.0 + w, 0.0), a]);
            }
            (num, den)
        };
        let (n1, d1) = one_root(p);
        let (n2, d2) = one_root(p.conj());
        RationalTf::from_complex_polys(&poly_mul(&n1, &n2), &poly_mul(&d1, &d2))?
    };
    let h = if beta > 0.0 { h.recip()? } else { h };
    if p.re < 0.0 {
        check_stable_result(&h)?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focore::complex_power;
    use approx::assert_relative_eq;

    fn band(wl: f64, wh: f64, n: u32) -> BandSpec {
        BandSpec::new(wl, wh, n).unwrap()
    }

    fn exact_real(z: f64, beta: f64, mirrored: bool, w: f64) -> Complex64 {
        let root = if mirrored { -z } else { z };
        let x = Complex64::ONE - Complex64::new(0.0, w) / root;
        complex_power(x, beta).unwrap()
    }

    fn exact_pair(p: Complex64, beta: f64, w: f64) -> Complex64 {
        let s = Complex64::new(0.0, w);
        let x1 = Complex64::ONE - s / p;
        let x2 = Complex64::ONE - s / p.conj();
        complex_power(x1, beta).unwrap() * complex_power(x2, beta).unwrap()
    }

    #[test]
    fn mirrored_half_power_matches_closed_form_mid_band() {
        // (1 + s)^(-1/2): magnitude (1 + w^2)^(-1/4), phase -atan(w)/2.
        let h = approx_implicit_real(1.0, -0.5, true, &band(0.01, 100.0, 5)).unwrap();
        for &w in &[0.1, 0.54, 1.0, 3.0, 10.0] {
            let got = h.eval(Complex64::new(0.0, w));
            let want = exact_real(1.0, -0.5, true, w);
            assert_relative_eq!(got.norm(), want.norm(), max_relative = 0.02);
            assert!((got.arg() - want.arg()).abs() < 2f64.to_radians());
        }
        let dc = h.eval(Complex64::ZERO).re;
        assert_relative_eq!(dc, 1.0, epsilon = 0.01);
        // Exact value (1 + 0.54^2)^(-1/4) = 0.93803...; the fit carries a
        // few tenths of a percent of ladder ripple on top.
        assert_relative_eq!(
            h.eval(Complex64::new(0.0, 0.54)).norm(),
            0.9380332,
            epsilon = 0.01
        );
    }

    #[test]
    fn plain_variant_keeps_the_unstable_root_faithfully() {
        let h = approx_implicit_real(2.0, -0.5, false, &band(0.01, 100.0, 4)).unwrap();
        let poles = h.poles().unwrap();
        assert!(poles.iter().all(|p| p.re > 0.0), "expected every pole mapped to s = z(1+w) > 0");
        // The frequency response still matches the principal-branch target.
        for &w in &[0.2, 1.0, 5.0] {
            let got = h.eval(Complex64::new(0.0, w));
            let want = exact_real(2.0, -0.5, false, w);
            assert_relative_eq!(got.norm(), want.norm(), max_relative = 0.02);
            assert!((got.arg() - want.arg()).abs() < 2f64.to_radians());
        }
    }

    #[test]
    fn mirrored_results_are_stable_and_positive_exponent_is_the_reciprocal() {
        let b = band(0.01, 100.0, 5);
        let neg = approx_implicit_real(3.0, -0.25, true, &b).unwrap();
        let pos = approx_implicit_real(3.0, 0.25, true, &b).unwrap();
        for p in pos.poles().unwrap().iter().chain(neg.poles().unwrap().iter()) {
            assert!(p.re < 0.0);
        }
        let s = Complex64::new(0.0, 1.7);
        let prod = neg.eval(s) * pos.eval(s);
        assert_relative_eq!(prod.re, 1.0, epsilon = 1e-9);
        assert_relative_eq!(prod.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn unit_exponent_is_exact() {
        let b = band(0.1, 10.0, 3);
        let h = approx_implicit_real(2.0, -1.0, true, &b).unwrap();
        assert_eq!(h.num(), &[1.0]);
        assert_eq!(h.den(), &[1.0, 0.5]);
        let hp = approx_implicit_pair(Complex64::new(-1.0, 1.0), 1.0, &b).unwrap();
        assert_eq!(hp.den(), &[1.0]);
        assert_eq!(hp.num(), &[1.0, 1.0, 0.5]);
    }

    #[test]
    fn well_damped_pair_tracks_exact_response() {
        let p = Complex64::new(-1.0, 1.0);
        let h = approx_implicit_pair(p, -0.5, &band(0.01, 100.0, 5)).unwrap();
        for &w in &[0.1, 0.5, 1.0, 1.41, 5.0, 10.0] {
            let got = h.eval(Complex64::new(0.0, w));
            let want = exact_pair(p, -0.5, w);
            let err_db = 20.0 * (got.norm() / want.norm()).log10();
            let err_deg = (got.arg() - want.arg()).to_degrees();
            assert!(err_db.abs() < 0.5, "magnitude off by {err_db:.3} dB at {w}");
            assert!(err_deg.abs() < 3.0, "phase off by {err_deg:.2} deg at {w}");
        }
        assert!(h.poles().unwrap().iter().all(|q| q.re < 0.0));
        assert_relative_eq!(h.eval(Complex64::ZERO).re, 1.0, epsilon = 0.01);
    }

    #[test]
    fn low_damped_pair_is_accurate_below_the_resonance_spikes() {
        // A lightly damped pair concentrates its ladder corners near the
        // resonance; the fit is clean below it even though narrow spikes sit
        // at the corner frequencies above.
        let p = Complex64::new(-0.514, 16.346);
        let h = approx_implicit_pair(p, 0.5, &band(0.5, 500.0, 5)).unwrap();
        for i in 0..=40 {
            let w = 5.0 * (16.0f64 / 5.0).powf(i as f64 / 40.0);
            let got = h.eval(Complex64::new(0.0, w));
            let want = exact_pair(p, 0.5, w);
            let err_db = 20.0 * (got.norm() / want.norm()).log10();
            let err_deg = (got.arg() - want.arg()).to_degrees();
            assert!(err_db.abs() < 0.5, "magnitude off by {err_db:.3} dB at {w:.3}");
            assert!(err_deg.abs() < 3.0, "phase off by {err_deg:.2} deg at {w:.3}");
        }
    }

    #[test]
    fn pair_rejects_axis_roots_and_bad_exponents() {
        let b = band(0.1, 10.0, 3);
        assert!(approx_implicit_pair(Complex64::new(0.0, 2.0), -0.5, &b).is_err());
        assert!(approx_implicit_pair(Complex64::new(-2.0, 0.0), -0.5, &b).is_err());
        assert!(approx_implicit_pair(Complex64::new(-1.0, 1.0), 1.5, &b).is_err());
        assert!(approx_implicit_real(-1.0, -0.5, true, &b).is_err());
        assert!(approx_implicit_real(1.0, 0.0, true, &b).is_err());
    }
}
