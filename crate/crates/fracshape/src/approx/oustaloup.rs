//! The recursive zero/pole ladder for `s^alpha` and its integrator-anchored
//! negative-power companion.

use super::{poly_mul_real, BandSpec, RationalTf};
use crate::error::{Error, Result};

/// Corner frequencies of the ladder: `2N+1` zeros (minus sign) and poles
/// (plus sign), geometric in the band.
pub(super) fn corners(alpha: f64, band: &BandSpec) -> (Vec<f64>, Vec<f64>) {
    let n = band.n() as i64;
    let (wl, wh) = (band.omega_l(), band.omega_h());
    let ratio = wh / wl;
    let count = (2 * n + 1) as f64;
    let corner = |k: i64, sign: f64| -> f64 {
        let expo = (k + n) as f64 + (1.0 + sign * alpha) / 2.0;
        wl * ratio.powf(expo / count)
    };
    let zeros = (-n..=n).map(|k| corner(k, -1.0)).collect();
    let poles = (-n..=n).map(|k| corner(k, 1.0)).collect();
    (zeros, poles)
}

fn poly_from_negative_roots(corner_mags: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &w in corner_mags {
        p = poly_mul_real(&p, &[w, 1.0]);
    }
    p
}

/// Band-limited approximation of `s^alpha`, `0 < alpha < 1`: gain
/// `omega_h^alpha` times `2N+1` interlaced zero/pole sections, all on the
/// negative real axis.  Exact magnitude at `omega_h` by construction;
/// accuracy degrades toward the band edges (the outermost ~10% of each
/// decade span droops), so size the band a decade past where it matters.
pub fn oustaloup(alpha: f64, band: &BandSpec) -> Result<RationalTf> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "ladder exponent must lie strictly in (0, 1), got {alpha}"
        )));
    }
    let (zeros, poles) = corners(alpha, band);
    let gain = band.omega_h().powf(alpha);
    let num: Vec<f64> = poly_from_negative_roots(&zeros)
        .into_iter()
        .map(|c| c * gain)
        .collect();
    let den = poly_from_negative_roots(&poles);
    RationalTf::new(num, den)
}

/// Band-limited approximation of `s^-alpha`, `0 < alpha < 1`, as the
/// `s^(1-alpha)` ladder divided by an exact integrator.  The deliberate
/// pole at the origin keeps the stationary character of the true power:
/// the DC gain diverges instead of flattening at a finite value.
pub fn approx_neg_power(alpha: f64, band: &BandSpec) -> Result<RationalTf> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "negative-power exponent must lie strictly in (0, 1), got {alpha}"
        )));
    }
    let ladder = oustaloup(1.0 - alpha, band)?;
    let mut den = vec![0.0];
    den.extend_from_slice(ladder.den());
    RationalTf::new(ladder.num().to_vec(), den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn band(wl: f64, wh: f64, n: u32) -> BandSpec {
        BandSpec::new(wl, wh, n).unwrap()
    }

    #[test]
    fn first_zero_matches_closed_form() {
        // alpha = 1/2 over [0.01, 100] with N = 1: innermost zero at
        // -omega_l * (omega_h/omega_l)^(1/12) = -0.01 * 10^(1/3).
        let h = oustaloup(0.5, &band(0.01, 100.0, 1)).unwrap();
        let zeros = h.zeros().unwrap();
        assert_eq!(zeros.len(), 3);
        let innermost = zeros
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(innermost, -0.021544346900318832, max_relative = 1e-12);
    }

    #[test]
    fn order_is_exactly_2n_plus_1_and_all_corners_negative_real() {
        for n in [1u32, 3, 5, 8] {
            let h = oustaloup(0.37, &band(0.01, 100.0, n)).unwrap();
            let want = (2 * n + 1) as usize;
            assert_eq!(h.degrees(), (want, want));
            for r in h.poles().unwrap().iter().chain(h.zeros().unwrap().iter()) {
                assert!(r.re < 0.0, "corner {r} not in the open left half plane");
                assert!(r.im.abs() < 1e-9 * r.re.abs());
            }
        }
    }

    #[test]
    fn magnitude_tracks_the_true_power_mid_band() {
        let h = oustaloup(0.5, &band(0.01, 100.0, 5)).unwrap();
        for &w in &[0.1, 0.54, 1.0, 3.0, 10.0] {
            let got = h.eval(Complex64::new(0.0, w)).norm();
            assert_relative_eq!(got, w.sqrt(), max_relative = 0.01);
        }
        // At the band edge the fit droops; it must still be within ~2 dB.
        let top = h.eval(Complex64::new(0.0, 100.0)).norm();
        assert!((20.0 * (top / 10.0).log10()).abs() < 2.0);
    }

    #[test]
    fn neg_power_has_one_origin_pole_and_correct_low_frequency_slope() {
        let h = approx_neg_power(0.5, &band(0.01, 100.0, 5)).unwrap();
        assert_eq!(h.den()[0], 0.0);
        assert!(h.den()[1] != 0.0);
        let m = |w: f64| h.eval(Complex64::new(0.0, w)).norm();
        // Inside the band the slope is the fractional -10 dB/dec; below it
        // the ladder flattens and the exact integrator takes over at
        // -20 dB/dec, so the DC gain diverges like the true power's.
        let mid_slope = (m(1.0).log10() - m(0.1).log10()) * 20.0;
        assert_relative_eq!(mid_slope, -10.0, epsilon = 0.3);
        let low_slope = (m(1e-4).log10() - m(1e-5).log10()) * 20.0;
        assert_relative_eq!(low_slope, -20.0, epsilon = 0.05);
        assert_relative_eq!(m(1.0), 1.0, max_relative = 0.02);
    }

    #[test]
    fn ladder_rejects_exponents_outside_unit_interval() {
        let b = band(0.01, 100.0, 3);
        assert!(oustaloup(0.0, &b).is_err());
        assert!(oustaloup(1.0, &b).is_err());
        assert!(oustaloup(-0.5, &b).is_err());
        assert!(approx_neg_power(1.0, &b).is_err());
    }
}
