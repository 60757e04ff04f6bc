//! Band-limited integer-order approximation of fractional factors.
//!
//! The workhorse is the recursive zero/pole ladder of [`oustaloup`]: `2N+1`
//! alternating real zeros and poles spread geometrically over a band
//! `[omega_l, omega_h]`, approximating `s^alpha` there.  Everything else is
//! built from it:
//!
//! * `s^-alpha` multiplies the `1-alpha` ladder by an exact integrator, so
//!   the stationary gain stays correct ([`approx_neg_power`]).
//! * binomial powers `(1 -+ s/z)^(+-alpha)` substitute the affine map
//!   `1 -+ s/z` into the ladder ([`approx_implicit_real`]); conjugate pairs
//!   run the substitution once per root with complex coefficients and
//!   multiply, which cancels the imaginary parts
//!   ([`approx_implicit_pair`]).
//! * whole factored transfer functions are assembled factor by factor
//!   ([`approximate_tf`]).
//!
//! JSON schema: `{"num": [c0, c1, ...], "den": [c0, c1, ...]}`, ascending
//! powers of `s`.

mod assemble;
mod implicit;
mod oustaloup;

pub use assemble::approximate_tf;
pub use implicit::{approx_implicit_pair, approx_implicit_real};
pub use oustaloup::{approx_neg_power, oustaloup};

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative imaginary residue allowed before a complex coefficient product
/// is rounded to real.
pub const RATIONAL_REALNESS_TOL: f64 = 1e-10;

/// Degree guard for assembled rationals; past this the result is useless
/// numerically and the build refuses rather than grinding on.
const MAX_RATIONAL_DEGREE: usize = 400;

/// Frequency band and half-order of a ladder approximation: `2N+1`
/// zero/pole sections over `[omega_l, omega_h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBand")]
pub struct BandSpec {
    omega_l: f64,
    omega_h: f64,
    n: u32,
}

#[derive(Deserialize)]
struct RawBand {
    omega_l: f64,
    omega_h: f64,
    n: u32,
}

impl TryFrom<RawBand> for BandSpec {
    type Error = Error;
    fn try_from(raw: RawBand) -> Result<BandSpec> {
        BandSpec::new(raw.omega_l, raw.omega_h, raw.n)
    }
}

impl BandSpec {
    pub fn new(omega_l: f64, omega_h: f64, n: u32) -> Result<BandSpec> {
        if !(omega_l.is_finite() && omega_h.is_finite() && omega_l > 0.0 && omega_h > omega_l) {
            return Err(Error::Domain(format!(
                "band [{omega_l}, {omega_h}] must satisfy 0 < omega_l < omega_h"
            )));
        }
        if omega_h / omega_l < 10.0 {
            return Err(Error::Domain(
                "band must span at least one decade for a meaningful fit".into(),
            ));
        }
        if n < 1 {
            return Err(Error::Domain("ladder half-order N must be >= 1".into()));
        }
        Ok(BandSpec { omega_l, omega_h, n })
    }

    pub fn omega_l(&self) -> f64 {
        self.omega_l
    }

    pub fn omega_h(&self) -> f64 {
        self.omega_h
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The band widened (never narrowed) to cover `[lo/10, 10*hi]`; used
    /// when a substitution stretches the points the ladder is evaluated at.
    pub(crate) fn widened_to_cover(&self, lo: f64, hi: f64) -> BandSpec {
        BandSpec {
            omega_l: self.omega_l.min(lo / 10.0),
            omega_h: self.omega_h.max(10.0 * hi),
            n: self.n,
        }
    }
}

/// A real-coefficient rational function of `s`, coefficients ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RationalTf {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<RationalTf> {
        let trim = |mut v: Vec<f64>| {
            while v.len() > 1 && v[v.len() - 1] == 0.0 {
                v.pop();
            }
            v
        };
        let (num, den) = (trim(num), trim(den));
        if num.is_empty() || den.is_empty() {
            return Err(Error::Domain("rational with empty coefficients".into()));
        }
        if !num.iter().chain(&den).all(|c| c.is_finite()) {
            return Err(Error::Domain("rational coefficient not finite".into()));
        }
        if den.iter().all(|&c| c == 0.0) {
            return Err(Error::Domain("rational denominator is zero".into()));
        }
        Ok(RationalTf { num, den })
    }

    pub fn one() -> RationalTf {
        RationalTf { num: vec![1.0], den: vec![1.0] }
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// Builds from complex coefficient polynomials whose imaginary parts
    /// must be numerical noise (relative residue <= 1e-10), as produced by
    /// conjugate-symmetric constructions.
    pub fn from_complex_polys(num: &[Complex64], den: &[Complex64]) -> Result<RationalTf> {
        Ok(RationalTf::new(round_real(num)?, round_real(den)?)?)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        horner(&self.num, s) / horner(&self.den, s)
    }

    /// Magnitude in dB and phase in degrees at `s = j omega`, phase taken
    /// principal (the callers compare against principal-phase oracles).
    pub fn bode_at(&self, omega: f64) -> (f64, f64) {
        let v = self.eval(Complex64::new(0.0, omega));
        (20.0 * v.norm().log10(), v.arg().to_degrees())
    }

    pub fn mul(&self, other: &RationalTf) -> Result<RationalTf> {
        let num = poly_mul_real(&self.num, &other.num);
        let den = poly_mul_real(&self.den, &other.den);
        if num.len().max(den.len()) > MAX_RATIONAL_DEGREE + 1 {
            return Err(Error::Numerical(format!(
                "assembled rational degree exceeds {MAX_RATIONAL_DEGREE}"
            )));
        }
        RationalTf::new(num, den)
    }

    pub fn recip(&self) -> Result<RationalTf> {
        if self.num.iter().all(|&c| c == 0.0) {
            return Err(Error::Domain("cannot invert a zero rational".into()));
        }
        RationalTf::new(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, g: f64) -> Result<RationalTf> {
        RationalTf::new(self.num.iter().map(|c| c * g).collect(), self.den.clone())
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        real_roots_of(&self.den)
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        real_roots_of(&self.num)
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.num.len() - 1, self.den.len() - 1)
    }

    pub fn as_factor(&self) -> crate::focore::Factor {
        crate::focore::Factor::io_rational(self.num.clone(), self.den.clone())
    }
}

impl Serialize for RationalTf {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RationalTf", 2)?;
        st.serialize_field("num", &self.num)?;
        st.serialize_field("den", &self.den)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for RationalTf {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: Vec<f64>,
            den: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        RationalTf::new(raw.num, raw.den).map_err(serde::de::Error::custom)
    }
}

fn horner(coeffs: &[f64], s: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

pub(crate) fn poly_mul_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn round_real(coeffs: &[Complex64]) -> Result<Vec<f64>> {
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let worst = coeffs.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
    if worst > RATIONAL_REALNESS_TOL * max {
        return Err(Error::Numerical(format!(
            "coefficients are not real (residue {:.3e} of {:.3e}); \
             a smaller N or a narrower band conditions the product better",
            worst, max
        )));
    }
    Ok(coeffs.iter().map(|c| c.re).collect())
}

fn real_roots_of(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let p = crate::focore::PseudoPolynomial::from_real(
        crate::focore::Alpha::Real(1.0),
        coeffs.to_vec(),
    )?;
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    crate::focore::pseudo_roots(&p)
}
