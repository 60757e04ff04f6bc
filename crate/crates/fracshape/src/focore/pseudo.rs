//! Pseudo polynomials in `w = s^alpha`, their roots, and the sector
//! stability test for commensurate fractional-order systems.

use super::serde_complex::ReIm;
use super::{complex_power, Alpha, Factor, FactoredTf, REALNESS_TOL};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest degree `to_pseudo_rational` will build before refusing; guards
/// against adversarial inputs blowing up memory (a monomial `s^-300` over a
/// base `1/10` would otherwise allocate a 3000-term polynomial per factor).
const MAX_PSEUDO_DEGREE: usize = 2000;

/// A polynomial `sum_m c_m w^m` in `w = s^alpha`, coefficients ascending.
///
/// Coefficients are kept complex so that single conjugate-root expansion
/// factors can be represented; [`PseudoPolynomial::is_real`] reports whether
/// the polynomial is real to within `1e-12` of the largest coefficient, and
/// [`PseudoPolynomial::realized`] extracts the real coefficients.
///
/// Invariants (enforced at construction): `alpha` in `(0, 1]`, at least one
/// coefficient, leading coefficient nonzero, all coefficients finite.
/// Trailing coefficients that are exactly zero are trimmed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPolynomial {
    alpha: Alpha,
    coeffs: Vec<Complex64>,
}

impl PseudoPolynomial {
    pub fn new(alpha: Alpha, mut coeffs: Vec<Complex64>) -> Result<PseudoPolynomial> {
        alpha.validate_unit()?;
        if coeffs.is_empty() {
            return Err(Error::Domain("pseudo polynomial with no coefficients".into()));
        }
        if !coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Domain("pseudo polynomial coefficient not finite".into()));
        }
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == Complex64::ZERO {
            coeffs.pop();
        }
        if coeffs[coeffs.len() - 1] == Complex64::ZERO {
            return Err(Error::Domain("zero pseudo polynomial".into()));
        }
        Ok(PseudoPolynomial { alpha, coeffs })
    }

    pub fn from_real(alpha: Alpha, coeffs: Vec<f64>) -> Result<PseudoPolynomial> {
        PseudoPolynomial::new(alpha, coeffs.into_iter().map(|c| Complex64::new(c, 0.0)).collect())
    }

    /// The constant polynomial `c`, usable as a neutral element with any base.
    pub fn constant(alpha: Alpha, c: Complex64) -> Result<PseudoPolynomial> {
        PseudoPolynomial::new(alpha, vec![c])
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub(crate) fn validate(&self) -> Result<()> {
        // Constructed values always satisfy the invariants; this re-check
        // exists for values that arrived through deserialization paths.
        PseudoPolynomial::new(self.alpha, self.coeffs.clone()).map(|_| ())
    }

    /// Horner evaluation at a point of the w-plane.
    pub fn eval_w(&self, w: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc
    }

    /// Evaluation at a point of the s-plane through the principal branch.
    pub fn eval_s(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.eval_w(complex_power(s, self.alpha.value())?))
    }

    /// Derivative with respect to w.
    pub fn derivative_w(&self) -> PseudoPolynomial {
        if self.coeffs.len() == 1 {
            return PseudoPolynomial { alpha: self.alpha, coeffs: vec![Complex64::ZERO] };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, &c)| c * m as f64)
            .collect();
        // The derivative of a valid polynomial keeps a nonzero leading term,
        // so the constructor cannot fail here.
        PseudoPolynomial::new(self.alpha, coeffs).expect("derivative of valid polynomial")
    }

    pub fn mul(&self, other: &PseudoPolynomial) -> Result<PseudoPolynomial> {
        let alpha = self.combined_alpha(other)?;
        PseudoPolynomial::new(alpha, poly_mul(&self.coeffs, &other.coeffs))
    }

    pub fn add(&self, other: &PseudoPolynomial) -> Result<PseudoPolynomial> {
        let alpha = self.combined_alpha(other)?;
        PseudoPolynomial::new(alpha, poly_add(&self.coeffs, &other.coeffs))
    }

    pub fn scale(&self, c: Complex64) -> Result<PseudoPolynomial> {
        PseudoPolynomial::new(self.alpha, self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Same polynomial with conjugated coefficients; its roots are the
    /// conjugates of the original roots.
    pub fn conj(&self) -> PseudoPolynomial {
        PseudoPolynomial {
            alpha: self.alpha,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        self.coeffs.iter().all(|c| c.im.abs() <= REALNESS_TOL * max)
    }

    /// Real coefficient list, or a numerical-conditioning error when an
    /// imaginary residue above tolerance survived (a conjugate pair product
    /// that should have cancelled but did not).
    pub fn realized(&self) -> Result<Vec<f64>> {
        if self.is_real() {
            Ok(self.coeffs.iter().map(|c| c.re).collect())
        } else {
            let worst = self.coeffs.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
            Err(Error::Numerical(format!(
                "pseudo polynomial is not real: largest imaginary residue {worst:.3e}"
            )))
        }
    }

    /// Re-expresses the polynomial over a finer base order that divides this
    /// one, spreading coefficients apart; exact, no arithmetic on values.
    pub fn reindex_to(&self, base: Alpha) -> Result<PseudoPolynomial> {
        let j = exponent_multiple(self.alpha, base)?;
        if j == 1 {
            let mut out = self.clone();
            out.alpha = base;
            return Ok(out);
        }
        let mut coeffs = vec![Complex64::ZERO; self.degree() * j + 1];
        for (m, &c) in self.coeffs.iter().enumerate() {
            coeffs[m * j] = c;
        }
        PseudoPolynomial::new(base, coeffs)
    }
}

/// How many copies of `base` make up `alpha`; errors unless the ratio is a
/// positive integer (to 1e-9 when either order is a float).
fn exponent_multiple(alpha: Alpha, base: Alpha) -> Result<usize> {
    if let (Some((an, ad)), Some((bn, bd))) = (alpha.ratio(), base.ratio()) {
        let num = u64::from(an) * u64::from(bd);
        let den = u64::from(ad) * u64::from(bn);
        if num % den == 0 {
            return Ok((num / den) as usize);
        }
        return Err(Error::NotCommensurate(format!(
            "order {an}/{ad} is not an integer multiple of base {bn}/{bd}"
        )));
    }
    let r = alpha.value() / base.value();
    let j = r.round();
    if j >= 1.0 && (r - j).abs() <= 1e-9 * r.abs().max(1.0) {
        Ok(j as usize)
    } else {
        Err(Error::NotCommensurate(format!(
            "order {} is not an integer multiple of base {}",
            alpha.value(),
            base.value()
        )))
    }
}

impl PseudoPolynomial {
    fn combined_alpha(&self, other: &PseudoPolynomial) -> Result<Alpha> {
        // Constants are base-agnostic: adopt the other operand's order.
        if self.degree() == 0 {
            return Ok(other.alpha);
        }
        if other.degree() == 0 {
            return Ok(self.alpha);
        }
        let same = match (self.alpha.ratio(), other.alpha.ratio()) {
            (Some(a), Some(b)) => a == b,
            _ => self.alpha.value() == other.alpha.value(),
        };
        if same {
            Ok(self.alpha)
        } else {
            Err(Error::NotCommensurate(format!(
                "cannot combine pseudo polynomials with bases {} and {}",
                self.alpha.value(),
                other.alpha.value()
            )))
        }
    }
}

impl Serialize for PseudoPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let coeffs: Vec<ReIm> = self.coeffs.iter().map(|c| ReIm { re: c.re, im: c.im }).collect();
        let mut st = s.serialize_struct("PseudoPolynomial", 2)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PseudoPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: Alpha,
            coeffs: Vec<ReIm>,
        }
        let raw = Raw::deserialize(d)?;
        let coeffs = raw.coeffs.into_iter().map(|c| Complex64::new(c.re, c.im)).collect();
        PseudoPolynomial::new(raw.alpha, coeffs).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub(crate) fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; a.len().max(b.len())];
    for (i, &ai) in a.iter().enumerate() {
        out[i] += ai;
    }
    for (i, &bi) in b.iter().enumerate() {
        out[i] += bi;
    }
    out
}

/// All roots of the polynomial in the w-plane, with multiplicity, sorted by
/// real then imaginary part.
///
/// Method: balanced companion-matrix eigenvalues followed by Newton
/// polishing.  Every returned root satisfies the coefficient-relative
/// backward-error bound `|A(w_root)| <= 1e-8 * max(max_k |c_k|,
/// sum_k |c_k| |w_root|^k)`; if polishing cannot reach that residual the
/// call fails instead of returning bad roots.  (The second term is what
/// makes the bound attainable for roots far from unit magnitude, where
/// even the exact root rounded to f64 evaluates away from zero.)
///
/// Only exactly-zero leading coefficients are dropped when determining the
/// degree: a tiny lead can be legitimate structure -- a product of many
/// sub-unit factors -- and no relative threshold separates that from
/// cancellation noise.  Callers that subtract polynomials and expect exact
/// degree drops must clean their own coefficients.
pub fn pseudo_roots(p: &PseudoPolynomial) -> Result<Vec<Complex64>> {
    let max_mag = p.coeffs().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let mut coeffs: Vec<Complex64> = p.coeffs().to_vec();
    while coeffs.len() > 1 && coeffs[coeffs.len() - 1].norm() == 0.0 {
        coeffs.pop();
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Err(Error::Domain("degree-0 pseudo polynomial has no roots".into()));
    }

    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();

    let mut roots = if n == 1 {
        vec![-monic[0]]
    } else {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = Complex64::ONE;
        }
        for i in 0..n {
            m[(i, n - 1)] = -monic[i];
        }
        balance_in_place(&mut m);
        match m.schur().eigenvalues() {
            Some(ev) => ev.iter().copied().collect(),
            // The complex Schur iteration converges for these sizes in
            // practice; the fixed-point fallback keeps the call total.
            None => durand_kerner(&monic),
        }
    };

    let dp = p.derivative_w();
    // Evaluation scale sum_k |c_k| |w|^k: the smallest residual an exact
    // root rounded to f64 can guarantee is ~eps * this, so the acceptance
    // bound must grow with it for large-magnitude roots.
    let eval_scale = |w: Complex64| {
        let a = w.norm();
        let mut scale = 0.0;
        let mut pw = 1.0;
        for c in p.coeffs() {
            scale += c.norm() * pw;
            pw *= a;
        }
        scale
    };
    for r in &mut roots {
        let tol_at = |w: Complex64| 1e-8 * max_mag.max(eval_scale(w));
        let mut val = p.eval_w(*r).norm();
        for _ in 0..8 {
            if val <= tol_at(*r) {
                break;
            }
            let d = dp.eval_w(*r);
            if d.norm() == 0.0 {
                break;
            }
            let cand = *r - p.eval_w(*r) / d;
            let cand_val = p.eval_w(cand).norm();
            if cand_val < val {
                *r = cand;
                val = cand_val;
            } else {
                break;
            }
        }
        let tol = tol_at(*r);
        if val > tol {
            return Err(Error::Numerical(format!(
                "root residual {val:.3e} exceeds {tol:.3e} after polishing"
            )));
        }
    }

    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(roots)
}

/// Iterative row/column norm balancing with powers of two (exact scaling,
/// no rounding), which keeps the companion eigenproblem well conditioned
/// when coefficients span many orders of magnitude.
fn balance_in_place(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix: f64 = 2.0;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    r += m[(i, j)].norm();
                    c += m[(j, i)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut c2 = c;
            while c2 < r / radix {
                f *= radix;
                c2 *= radix * radix;
            }
            while c2 > r * radix {
                f /= radix;
                c2 /= radix * radix;
            }
            if (c2 + r) / f < 0.95 * s && f != 1.0 {
                done = false;
                for j in 0..n {
                    let v = m[(i, j)] / f;
                    m[(i, j)] = v;
                }
                for j in 0..n {
                    let v = m[(j, i)] * f;
                    m[(j, i)] = v;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Simultaneous fixed-point root iteration on a monic polynomial; fallback
/// path only.
fn durand_kerner(monic: &[Complex64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| radius * seed.powu(k as u32 + 1) / seed.norm().powi(k as i32 + 1) * 0.9)
        .collect();
    let eval = |x: Complex64| {
        let mut acc = Complex64::ONE;
        for &c in monic[..n].iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    for _ in 0..1000 {
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::ONE;
            for j in 0..n {
                if j != i {
                    den *= roots[i] - roots[j];
                }
            }
            if den.norm() == 0.0 {
                continue;
            }
            let delta = eval(roots[i]) / den;
            roots[i] -= delta;
            worst = worst.max(delta.norm() / roots[i].norm().max(1.0));
        }
        if worst < 1e-14 {
            break;
        }
    }
    roots
}

/// One root of a stability check with its angular position and sector margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootMargin {
    #[serde(with = "super::serde_complex")]
    pub root: Complex64,
    pub arg_rad: f64,
    /// `|arg(root)| - alpha*pi/2`; positive means inside the stable sector.
    pub margin_rad: f64,
}

/// Verdict of the commensurate-order sector test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Set when some root sits within 1e-10 rad of the sector boundary, so
    /// the strict verdict is numerically meaningless.
    pub indeterminate: bool,
    /// Smallest sector margin across roots; `None` for a constant
    /// denominator (no roots, vacuously stable).
    pub min_margin_rad: Option<f64>,
    pub alpha: Alpha,
    pub roots: Vec<RootMargin>,
}

/// Sector stability test for a commensurate denominator: stable iff every
/// root of the pseudo polynomial satisfies `|arg(w)| > alpha*pi/2` strictly.
///
/// A root at `w = 0` (a pole at `s = 0`) is reported unstable: it is not
/// asymptotically stable and has no argument, so it is assigned the largest
/// possible negative margin.  A constant denominator is vacuously stable.
pub fn matignon_stable(den: &PseudoPolynomial) -> Result<StabilityReport> {
    let alpha = den.alpha();
    if den.degree() == 0 {
        return Ok(StabilityReport {
            stable: true,
            indeterminate: false,
            min_margin_rad: None,
            alpha,
            roots: Vec::new(),
        });
    }
    let boundary = alpha.value() * PI / 2.0;
    let roots = pseudo_roots(den)?;
    let mut report_roots = Vec::with_capacity(roots.len());
    let mut stable = true;
    let mut indeterminate = false;
    let mut min_margin = f64::INFINITY;
    for r in roots {
        let arg = Complex64::new(r.re, if r.im == 0.0 { 0.0 } else { r.im }).arg();
        let margin = if r == Complex64::ZERO { -boundary } else { arg.abs() - boundary };
        if margin <= 0.0 {
            stable = false;
        }
        if margin.abs() <= 1e-10 {
            indeterminate = true;
        }
        min_margin = min_margin.min(margin);
        report_roots.push(RootMargin { root: r, arg_rad: arg, margin_rad: margin });
    }
    Ok(StabilityReport {
        stable,
        indeterminate,
        min_margin_rad: Some(min_margin),
        alpha,
        roots: report_roots,
    })
}

/// A ratio of two pseudo polynomials over one common base order.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoRational {
    pub num: PseudoPolynomial,
    pub den: PseudoPolynomial,
}

impl PseudoRational {
    pub fn new(num: PseudoPolynomial, den: PseudoPolynomial) -> Result<PseudoRational> {
        num.combined_alpha(&den)?;
        Ok(PseudoRational { num, den })
    }

    pub fn alpha(&self) -> Alpha {
        if self.num.degree() > 0 {
            self.num.alpha()
        } else {
            self.den.alpha()
        }
    }

    pub fn eval_w(&self, w: Complex64) -> Complex64 {
        self.num.eval_w(w) / self.den.eval_w(w)
    }
}

/// Smallest base order `1/nu` over which every factor of `tf` is expressible
/// as a polynomial ratio in `w = s^{1/nu}`.
///
/// Fails when some order is not a small rational (nothing commensurates an
/// irrational exponent) or when an implicit power carries a fractional
/// exponent (those are algebraic, not pseudo-rational; approximate them
/// first).
pub fn common_base(tf: &FactoredTf) -> Result<Alpha> {
    let mut nu: u64 = 1;
    for f in tf.flattened_factors() {
        let den = match f {
            Factor::Gain { .. } | Factor::IoRational { .. } => 1,
            Factor::Monomial { beta } => {
                if *beta == 0.0 {
                    1
                } else {
                    match Alpha::Real(beta.abs()).ratio() {
                        Some((_, d)) => d,
                        None => {
                            return Err(Error::NotCommensurate(format!(
                                "monomial exponent {beta} is not a small rational"
                            )))
                        }
                    }
                }
            }
            Factor::ExplicitX { alpha, .. } => match alpha.ratio() {
                Some((_, d)) => d,
                None => {
                    return Err(Error::NotCommensurate(format!(
                        "order {} is not a small rational",
                        alpha.value()
                    )))
                }
            },
            Factor::PseudoPoly { poly, .. } => {
                if poly.degree() == 0 {
                    1
                } else {
                    match poly.alpha().ratio() {
                        Some((_, d)) => d,
                        None => {
                            return Err(Error::NotCommensurate(format!(
                                "order {} is not a small rational",
                                poly.alpha().value()
                            )))
                        }
                    }
                }
            }
            Factor::ImplicitPower { beta, .. } => {
                let m = beta.round();
                if (beta - m).abs() <= 1e-9 {
                    1
                } else {
                    return Err(Error::NotCommensurate(format!(
                        "implicit power with fractional exponent {beta} is not pseudo-rational"
                    )));
                }
            }
            Factor::Product { .. } => unreachable!("flattened"),
        };
        let den = u64::from(den);
        nu = nu / gcd_u64(nu, den) * den;
        if nu > 4096 {
            return Err(Error::NotCommensurate(format!(
                "common base denominator exceeds 4096 (got >= {nu})"
            )));
        }
    }
    Ok(Alpha::Ratio { num: 1, den: nu as u32 })
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Converts a factored transfer function to a single pseudo-rational over
/// the factors' common base order.
pub fn to_pseudo_rational(tf: &FactoredTf) -> Result<PseudoRational> {
    let base = common_base(tf)?;
    to_pseudo_rational_with_base(tf, base)
}

/// Same as [`to_pseudo_rational`] but over a caller-chosen base `1/nu`,
/// which lets several transfer functions (plant, controller, residual) be
/// combined in one common w-plane.
pub fn to_pseudo_rational_with_base(tf: &FactoredTf, base: Alpha) -> Result<PseudoRational> {
    match base.ratio() {
        Some((1, _)) => {}
        _ => {
            return Err(Error::Domain(
                "pseudo-rational base must be the reciprocal of a positive integer".into(),
            ))
        }
    }
    let nu = base.ratio().expect("checked above").1 as usize;

    let mut num = vec![Complex64::ONE];
    let mut den = vec![Complex64::ONE];
    let push = |acc: &mut Vec<Complex64>, p: Vec<Complex64>| -> Result<()> {
        let out = poly_mul(acc, &p);
        if out.len() > MAX_PSEUDO_DEGREE + 1 {
            return Err(Error::Numerical(format!(
                "pseudo-rational degree exceeds {MAX_PSEUDO_DEGREE}"
            )));
        }
        *acc = out;
        Ok(())
    };

    for f in tf.flattened_factors() {
        match f {
            Factor::Gain { g } => {
                num.iter_mut().for_each(|c| *c *= *g);
            }
            Factor::Monomial { beta } => {
                if *beta == 0.0 {
                    continue;
                }
                let m = exponent_multiple(Alpha::Real(beta.abs()), base)?;
                let mut shift = vec![Complex64::ZERO; m + 1];
                shift[m] = Complex64::ONE;
                push(if *beta > 0.0 { &mut num } else { &mut den }, shift)?;
            }
            Factor::ExplicitX { z, alpha, k, pair } => {
                let j = exponent_multiple(*alpha, base)?;
                let build = |root: Complex64| -> Result<Vec<Complex64>> {
                    let za = complex_power(root, alpha.value())?;
                    let mut c = vec![Complex64::ZERO; j + 1];
                    c[0] = Complex64::ONE;
                    c[j] = -Complex64::ONE / za;
                    Ok(c)
                };
                let target = if *k == 1 { &mut num } else { &mut den };
                push(target, build(*z)?)?;
                if *pair {
                    push(target, build(z.conj())?)?;
                }
            }
            Factor::PseudoPoly { poly, k } => {
                let re = poly.reindex_to(base)?;
                push(if *k == 1 { &mut num } else { &mut den }, re.coeffs().to_vec())?;
            }
            Factor::ImplicitPower { z, beta, pair, mirrored } => {
                let m = beta.round();
                if (beta - m).abs() > 1e-9 {
                    return Err(Error::NotCommensurate(format!(
                        "implicit power with fractional exponent {beta} is not pseudo-rational"
                    )));
                }
                let m = m as i64;
                if m == 0 {
                    continue;
                }
                let sign = if *mirrored { 1.0 } else { -1.0 };
                let build = |root: Complex64| {
                    let mut c = vec![Complex64::ZERO; nu + 1];
                    c[0] = Complex64::ONE;
                    c[nu] = sign / root;
                    c
                };
                let target = if m > 0 { &mut num } else { &mut den };
                for _ in 0..m.unsigned_abs() {
                    push(target, build(*z))?;
                    if *pair {
                        push(target, build(z.conj()))?;
                    }
                }
            }
            Factor::IoRational { num: fnum, den: fden } => {
                let spread = |c: &[f64]| {
                    let mut out = vec![Complex64::ZERO; (c.len() - 1) * nu + 1];
                    for (i, &ci) in c.iter().enumerate() {
                        out[i * nu] = Complex64::new(ci, 0.0);
                    }
                    out
                };
                push(&mut num, spread(fnum))?;
                push(&mut den, spread(fden))?;
            }
            Factor::Product { .. } => unreachable!("flattened"),
        }
    }

    if tf.negated {
        num.iter_mut().for_each(|c| *c = -*c);
    }
    PseudoRational::new(PseudoPolynomial::new(base, num)?, PseudoPolynomial::new(base, den)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly(alpha: Alpha, coeffs: &[f64]) -> PseudoPolynomial {
        PseudoPolynomial::from_real(alpha, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn perfect_square_roots_with_multiplicity() {
        let p = poly(Alpha::Real(1.0), &[1.0, 2.0, 1.0]);
        let roots = pseudo_roots(&p).unwrap();
        assert_eq!(roots.len(), 2);
        for r in roots {
            // Double roots lose half the working precision; 1e-7 is the
            // best a generic eigenvalue path guarantees here.
            assert!((r - Complex64::new(-1.0, 0.0)).norm() < 1e-7, "root {r}");
        }
    }

    #[test]
    fn linear_expansion_factor_has_root_minus_one() {
        let p = poly(Alpha::from_nu(2), &[1.0, 1.0]);
        let roots = pseudo_roots(&p).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0].re, -1.0, max_relative = 1e-12);
        assert_relative_eq!(roots[0].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_expansion_factor_has_unit_roots_at_120_degrees() {
        let p = poly(Alpha::from_nu(3), &[1.0, 1.0, 1.0]);
        let roots = pseudo_roots(&p).unwrap();
        assert_eq!(roots.len(), 2);
        let expect = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((roots[1] - expect).norm() < 1e-10 || (roots[0] - expect).norm() < 1e-10);
        assert!((roots[0] - expect.conj()).norm() < 1e-10 || (roots[1] - expect.conj()).norm() < 1e-10);
    }

    #[test]
    fn degree_zero_has_no_roots() {
        let p = poly(Alpha::Real(1.0), &[3.0]);
        assert!(pseudo_roots(&p).is_err());
    }

    #[test]
    fn matignon_examples() {
        // Root -1 with alpha = 1/2: |arg| = pi > pi/4, margin 3*pi/4.
        let r = matignon_stable(&poly(Alpha::from_nu(2), &[1.0, 1.0])).unwrap();
        assert!(r.stable && !r.indeterminate);
        assert_relative_eq!(r.min_margin_rad.unwrap(), 3.0 * PI / 4.0, max_relative = 1e-12);

        // Root +1 with alpha = 1/2: arg 0 < pi/4 -> unstable.
        let r = matignon_stable(&poly(Alpha::from_nu(2), &[-1.0, 1.0])).unwrap();
        assert!(!r.stable);

        // Integer order recovers the classical criterion.
        let den = poly(Alpha::Real(1.0), &[1.0, 5.0 / 6.0, 1.0 / 6.0]); // (1+s/2)(1+s/3)
        let r = matignon_stable(&den).unwrap();
        assert!(r.stable);
        assert_relative_eq!(r.min_margin_rad.unwrap(), PI / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn root_at_origin_is_unstable() {
        let r = matignon_stable(&poly(Alpha::from_nu(2), &[0.0, 1.0])).unwrap();
        assert!(!r.stable);
        assert!(r.min_margin_rad.unwrap() < 0.0);
    }

    #[test]
    fn constant_denominator_is_vacuously_stable() {
        let r = matignon_stable(&poly(Alpha::Real(1.0), &[2.0])).unwrap();
        assert!(r.stable);
        assert!(r.min_margin_rad.is_none());
    }

    #[test]
    fn boundary_root_is_indeterminate() {
        // Root exactly on the sector edge arg = pi/4 for alpha = 1/2.
        let root = Complex64::from_polar(1.0, PI / 4.0);
        let p = PseudoPolynomial::new(
            Alpha::from_nu(2),
            vec![-root, Complex64::ONE],
        )
        .unwrap();
        let r = matignon_stable(&p).unwrap();
        assert!(r.indeterminate);
    }

    #[test]
    fn reindex_spreads_coefficients() {
        let p = poly(Alpha::from_nu(2), &[1.0, 2.0]);
        let q = p.reindex_to(Alpha::from_nu(6)).unwrap();
        assert_eq!(q.degree(), 3);
        assert_eq!(q.coeffs()[0], Complex64::ONE);
        assert_eq!(q.coeffs()[3], Complex64::new(2.0, 0.0));
        assert_eq!(q.coeffs()[1], Complex64::ZERO);
        // w-plane samples must agree: q(w) = p(w^3) pointwise.
        let w = Complex64::new(0.3, 0.7);
        assert!((q.eval_w(w) - p.eval_w(w.powu(3))).norm() < 1e-14);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert!(PseudoPolynomial::from_real(Alpha::Real(1.0), vec![0.0, 0.0]).is_err());
        assert!(PseudoPolynomial::from_real(Alpha::Real(1.0), vec![]).is_err());
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = poly(Alpha::Real(1.0), &[1.0, 1.0, 0.0]);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn common_base_is_lcm_of_orders() {
        let tf = FactoredTf::new(vec![
            Factor::ExplicitX {
                z: Complex64::ONE,
                alpha: Alpha::from_nu(2),
                k: 1,
                pair: false,
            },
            Factor::Monomial { beta: -1.0 / 3.0 },
            Factor::io_rational(vec![1.0], vec![1.0, 1.0]),
        ]);
        assert_eq!(common_base(&tf).unwrap(), Alpha::Ratio { num: 1, den: 6 });
    }

    #[test]
    fn pseudo_rational_matches_direct_evaluation() {
        let tf = FactoredTf::new(vec![
            Factor::gain(2.0),
            Factor::Monomial { beta: -0.5 },
            Factor::io_rational(vec![-1.0, 1.0], vec![1.0, 5.0 / 6.0, 1.0 / 6.0]),
        ]);
        let pr = to_pseudo_rational(&tf).unwrap();
        assert_eq!(pr.alpha(), Alpha::Ratio { num: 1, den: 2 });
        let s = Complex64::new(0.0, 0.7);
        let w = complex_power(s, 0.5).unwrap();
        let direct = crate::focore::eval_at(&tf, s).unwrap();
        assert!((pr.eval_w(w) - direct).norm() <= 1e-12 * direct.norm());
    }

    #[test]
    fn negation_flips_numerator_sign() {
        let tf = FactoredTf::negated(vec![Factor::gain(3.0)]);
        let pr = to_pseudo_rational(&tf).unwrap();
        assert_eq!(pr.num.coeffs()[0], Complex64::new(-3.0, 0.0));
    }

    #[test]
    fn fractional_implicit_power_is_not_pseudo_rational() {
        let tf = FactoredTf::new(vec![Factor::ImplicitPower {
            z: Complex64::ONE,
            beta: -0.5,
            pair: false,
            mirrored: false,
        }]);
        assert!(matches!(common_base(&tf), Err(Error::NotCommensurate(_))));
    }

    #[test]
    fn high_degree_conversion_is_refused() {
        let tf = FactoredTf::new(vec![
            Factor::Monomial { beta: -300.0 },
            Factor::ExplicitX {
                z: Complex64::ONE,
                alpha: Alpha::from_nu(10),
                k: 1,
                pair: false,
            },
        ]);
        assert!(to_pseudo_rational(&tf).is_err());
    }
}
