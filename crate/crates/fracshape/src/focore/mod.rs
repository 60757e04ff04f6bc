//! Core algebra for commensurate fractional-order transfer functions.
//!
//! A transfer function is kept as an ordered product of [`Factor`]s rather
//! than as one flattened rational, because the factors carry the structure
//! the rest of the crate needs: which terms are fractional, where the branch
//! cuts sit, and what can be cancelled exactly.
//!
//! JSON schema (used by the CLI and the file formats):
//!
//! ```json
//! {"factors": [{"kind": "gain", "g": 0.68},
//!              {"kind": "monomial", "beta": -1.0},
//!              {"kind": "explicit_x", "z": {"re": 1.0, "im": 0.0},
//!               "alpha": {"num": 1, "den": 2}, "k": 1, "pair": false},
//!              {"kind": "pseudo_poly",
//!               "poly": {"alpha": {"num": 1, "den": 2},
//!                        "coeffs": [{"re": 1.0, "im": 0.0},
//!                                   {"re": 1.0, "im": 0.0}]},
//!               "k": -1},
//!              {"kind": "implicit_power", "z": {"re": 1.0, "im": 0.0},
//!               "beta": -0.5, "pair": false, "mirrored": true},
//!              {"kind": "io_rational", "num": [-1.0, 1.0],
//!               "den": [1.0, 0.8333333333333334, 0.16666666666666666]}],
//!  "negated": false}
//! ```
//!
//! Complex scalars serialize as `{"re": ..., "im": ...}`; polynomial
//! coefficient lists are ascending in the power of `s` (or of `w = s^alpha`).
//! A `product` kind (a grouped sub-product) is accepted on input; emitted
//! files always contain the flattened form.

mod eval;
mod pseudo;

pub use eval::{complex_power, eval_at, eval_freq, factor_value, log_grid, log_grid_per_decade};
pub(crate) use eval::wrap_pm180;
pub(crate) use pseudo::{poly_add, poly_mul};
pub use pseudo::{
    common_base, matignon_stable, pseudo_roots, to_pseudo_rational,
    to_pseudo_rational_with_base, PseudoPolynomial, PseudoRational, RootMargin,
    StabilityReport,
};

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance below which a coefficient's imaginary residue counts as zero,
/// relative to the largest coefficient magnitude.
pub const REALNESS_TOL: f64 = 1e-12;

pub(crate) mod serde_complex {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    pub(crate) struct ReIm {
        pub re: f64,
        pub im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReIm { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Complex64, D::Error> {
        let ReIm { re, im } = ReIm::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Commensurate order, kept as an exact rational whenever it comes from an
/// expansion with integer `nu`, so the Matignon sector boundary `alpha*pi/2`
/// does not drift through repeated float arithmetic.
///
/// Serializes untagged: `{"num": 1, "den": 2}` or a bare float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alpha {
    Ratio { num: u32, den: u32 },
    Real(f64),
}

impl Alpha {
    /// `1/nu`, the base order of an expansion with `nu` sectors.
    pub fn from_nu(nu: u32) -> Alpha {
        Alpha::Ratio { num: 1, den: nu }
    }

    pub fn value(self) -> f64 {
        match self {
            Alpha::Ratio { num, den } => f64::from(num) / f64::from(den),
            Alpha::Real(x) => x,
        }
    }

    /// Exact or reconstructed rational form. Floats are accepted when they
    /// sit within 1e-12 of `p/q` for some `q <= 1024`; anything else is not
    /// commensurable with other rational orders.
    pub fn ratio(self) -> Option<(u32, u32)> {
        match self {
            Alpha::Ratio { num, den } => {
                if den == 0 {
                    None
                } else {
                    let g = gcd(num.max(1), den);
                    Some((num / g, den / g))
                }
            }
            Alpha::Real(x) => {
                if !(x.is_finite() && x > 0.0) {
                    return None;
                }
                for den in 1..=1024u32 {
                    let num = (x * f64::from(den)).round();
                    if num >= 1.0
                        && num <= u32::MAX as f64
                        && (x - num / f64::from(den)).abs() <= 1e-12
                    {
                        let num = num as u32;
                        let g = gcd(num, den);
                        return Some((num / g, den / g));
                    }
                }
                None
            }
        }
    }

    /// Checks `0 < alpha <= 1`.
    pub(crate) fn validate_unit(self) -> Result<()> {
        if let Alpha::Ratio { den: 0, .. } = self {
            return Err(Error::Domain("alpha ratio has zero denominator".into()));
        }
        let v = self.value();
        if v.is_finite() && v > 0.0 && v <= 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("alpha = {v} outside (0, 1]")))
        }
    }
}

pub(crate) fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// One multiplicative building block of a transfer function.
///
/// The variants mirror the objects of the compensation constructions:
///
/// * `Gain` -- a real constant `g`.
/// * `Monomial` -- `s^beta` for real `beta` (integrators, differentiators,
///   and bare fractional operators).
/// * `ExplicitX` -- the explicit pseudo binomial `(1 - (s/z)^alpha)^k`, the
///   fractional residual left behind by a partial cancellation; with
///   `pair = true` it is the conjugate-pair product
///   `(1 - (s/z)^alpha)^k (1 - (s/conj z)^alpha)^k`, which has a real
///   response.
/// * `PseudoPoly` -- a polynomial in `w = s^alpha` raised to `k = +/-1`;
///   houses the expansion factors `Q` and their pair products.
/// * `ImplicitPower` -- `(1 - s/z)^beta`, or `(1 + s/z)^beta` when
///   `mirrored`, optionally times the conjugate-root twin when `pair`;
///   houses the implicit lead-lag terms and mirrored (pseudo) poles.
/// * `IoRational` -- a plain integer-order rational block, coefficients
///   ascending in `s`.
/// * `Product` -- a grouped sub-product, used where one logical object
///   (for example an implicit residual) is built from several powers.
///   Serialization flattens it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    Gain {
        g: f64,
    },
    Monomial {
        beta: f64,
    },
    ExplicitX {
        #[serde(with = "serde_complex")]
        z: Complex64,
        alpha: Alpha,
        k: i8,
        #[serde(default)]
        pair: bool,
    },
    PseudoPoly {
        poly: PseudoPolynomial,
        k: i8,
    },
    ImplicitPower {
        #[serde(with = "serde_complex")]
        z: Complex64,
        beta: f64,
        #[serde(default)]
        pair: bool,
        #[serde(default)]
        mirrored: bool,
    },
    IoRational {
        num: Vec<f64>,
        den: Vec<f64>,
    },
    Product {
        factors: Vec<Factor>,
    },
}

impl Factor {
    pub fn gain(g: f64) -> Factor {
        Factor::Gain { g }
    }

    pub fn monomial(beta: f64) -> Factor {
        Factor::Monomial { beta }
    }

    pub fn io_rational(num: Vec<f64>, den: Vec<f64>) -> Factor {
        Factor::IoRational { num, den }
    }

    /// Structural validation: finite parameters, nonzero roots where a root
    /// is divided by, exponent signs restricted to +/-1.
    pub fn validate(&self) -> Result<()> {
        match self {
            Factor::Gain { g } => {
                if !g.is_finite() {
                    return Err(Error::Parse("gain is not finite".into()));
                }
            }
            Factor::Monomial { beta } => {
                if !beta.is_finite() {
                    return Err(Error::Parse("monomial exponent is not finite".into()));
                }
            }
            Factor::ExplicitX { z, alpha, k, .. } => {
                validate_root(*z)?;
                alpha.validate_unit()?;
                validate_k(*k)?;
            }
            Factor::PseudoPoly { poly, k } => {
                poly.validate()?;
                validate_k(*k)?;
            }
            Factor::ImplicitPower { z, beta, .. } => {
                validate_root(*z)?;
                if !beta.is_finite() {
                    return Err(Error::Parse("implicit exponent is not finite".into()));
                }
            }
            Factor::IoRational { num, den } => {
                if num.is_empty() || den.is_empty() {
                    return Err(Error::Parse("io_rational with empty coefficients".into()));
                }
                if !num.iter().chain(den).all(|c| c.is_finite()) {
                    return Err(Error::Parse("io_rational coefficient not finite".into()));
                }
                if den.iter().all(|&c| c == 0.0) {
                    return Err(Error::Parse("io_rational denominator is zero".into()));
                }
            }
            Factor::Product { factors } => {
                for f in factors {
                    f.validate()?;
                }
            }
        }
        Ok(())
    }
}

fn validate_root(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Parse("root is not finite".into()));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Parse("root at the origin".into()));
    }
    Ok(())
}

fn validate_k(k: i8) -> Result<()> {
    if k == 1 || k == -1 {
        Ok(())
    } else {
        Err(Error::Parse(format!("exponent sign k = {k}, expected +1 or -1")))
    }
}

/// An ordered product of factors, with a marker recording whether the whole
/// loop was negated for analysis (used when a plant with negative DC gain is
/// analyzed as `-G` so that classical margin conventions apply).
///
/// An empty factor list evaluates to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredTf {
    pub factors: Vec<Factor>,
    pub negated: bool,
}

impl FactoredTf {
    pub fn new(factors: Vec<Factor>) -> FactoredTf {
        FactoredTf { factors, negated: false }
    }

    pub fn negated(factors: Vec<Factor>) -> FactoredTf {
        FactoredTf { factors, negated: true }
    }

    pub fn one() -> FactoredTf {
        FactoredTf::new(Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        for f in &self.factors {
            f.validate()?;
        }
        Ok(())
    }

    /// Factors with every `Product` group flattened, depth first.
    pub fn flattened_factors(&self) -> Vec<&Factor> {
        let mut out = Vec::with_capacity(self.factors.len());
        fn walk<'a>(f: &'a Factor, out: &mut Vec<&'a Factor>) {
            match f {
                Factor::Product { factors } => {
                    for g in factors {
                        walk(g, out);
                    }
                }
                other => out.push(other),
            }
        }
        for f in &self.factors {
            walk(f, &mut out);
        }
        out
    }

    /// The same transfer function times the factors of `other`.
    pub fn concat(&self, other: &FactoredTf) -> FactoredTf {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        FactoredTf { factors, negated: self.negated ^ other.negated }
    }

    pub fn from_json(text: &str) -> Result<FactoredTf> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("factored tf serialization cannot fail")
    }
}

impl Serialize for FactoredTf {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let flat = self.flattened_factors();
        let mut st = s.serialize_struct("FactoredTf", 2)?;
        st.serialize_field("factors", &flat)?;
        st.serialize_field("negated", &self.negated)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for FactoredTf {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            factors: Vec<Factor>,
            #[serde(default)]
            negated: bool,
        }
        let raw = Raw::deserialize(d)?;
        let tf = FactoredTf { factors: raw.factors, negated: raw.negated };
        tf.validate().map_err(serde::de::Error::custom)?;
        Ok(tf)
    }
}

/// A sampled frequency response on a strictly increasing positive grid.
///
/// `phase_unwrapped_deg` is continuous in degrees, anchored at the lowest
/// frequency by the sum of the per-factor principal arguments (monomials and
/// origin roots contribute their exact `90 * beta`).  The anchor equals the
/// true phase whenever each individual factor's phase at the lowest grid
/// frequency lies within (-180, 180], which holds when the grid starts below
/// the factors' corner frequencies; start the grid lower if a high-degree
/// pseudo polynomial is evaluated only far above its corners.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub phase_unwrapped_deg: Vec<f64>,
}

impl FrequencyResponse {
    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 20.0 * v.norm().log10()).collect()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}
