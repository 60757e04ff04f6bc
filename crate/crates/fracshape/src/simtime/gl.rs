//! Grunwald-Letnikov integration of commensurate fractional systems.
//!
//! The loop `H(w) = N(w)/D(w)`, `w = s^alpha`, is realized as a pseudo
//! state-space `D^alpha x = A x + B u`, `y = C x + D_f u` (companion form in
//! `w`), and the fractional derivative is replaced by its GL series
//!
//! ```text
//! D^alpha x(t_k) ~ h^-alpha * sum_j c_j x_{k-j},   c_0 = 1,
//! c_j = c_{j-1} (1 - (1 + alpha)/j)
//! ```
//!
//! with the full history kept (no short-memory truncation): runs here are
//! tens of thousands of steps, and the untruncated sum is what makes this
//! solver an independent check on the band-limited rational approximations.
//! Each step solves `(h^-alpha I - A) x_k = B u_k - h^-alpha sum_{j>=1} c_j
//! x_{k-j}` with the matrix factored once.  For `alpha = 1` the weights
//! collapse to `(1, -1, 0, ...)` and the scheme is backward Euler.

use super::{time_grid, TimeSeries};
use crate::error::{Error, Result};
use crate::focore::{PseudoPolynomial, PseudoRational};
use nalgebra::{DMatrix, DVector, RowDVector};

/// GL binomial weights `(-1)^j C(alpha, j)` for `j = 0..len`.
pub fn gl_weights(alpha: f64, len: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(len);
    let mut w = 1.0;
    for j in 0..len {
        if j > 0 {
            w *= 1.0 - (1.0 + alpha) / j as f64;
        }
        c.push(w);
    }
    c
}

/// Relative imaginary residue allowed when flattening coefficients that are
/// real up to rounding.
const REAL_TOL: f64 = 1e-10;

fn real_coeffs(p: &PseudoPolynomial) -> Result<Vec<f64>> {
    let scale = p.coeffs().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    p.coeffs()
        .iter()
        .map(|c| {
            if c.im.abs() <= REAL_TOL * scale {
                Ok(c.re)
            } else {
                Err(Error::Numerical(format!(
                    "coefficient {c} is not real; GL integrates real systems only"
                )))
            }
        })
        .collect()
}

/// Unit-step response of a proper pseudo-rational system by implicit GL
/// marching with zero initial conditions.
pub fn simulate_gl(sys: &PseudoRational, t_end: f64, dt: f64) -> Result<TimeSeries> {
    let t = time_grid(t_end, dt)?;
    let alpha = sys.alpha().value();
    let num = real_coeffs(&sys.num)?;
    let den = real_coeffs(&sys.den)?;
    let (dn, dd) = (num.len() - 1, den.len() - 1);
    if dn > dd {
        return Err(Error::Domain(format!(
            "improper pseudo-rational (numerator degree {dn} > denominator degree {dd} in w)"
        )));
    }
    let n = dd;
    let lead = den[n];
    let b_at = |i: usize| num.get(i).copied().unwrap_or(0.0);
    let d_feed = b_at(n) / lead;
    if n == 0 {
        let ts = TimeSeries {
            y: vec![d_feed; t.len()],
            t,
            solver: "gl".into(),
            dt,
            scenario: String::new(),
            warnings: Vec::new(),
        };
        ts.validate()?;
        return Ok(ts);
    }

    let mut a = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -den[j] / lead;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let c_out = RowDVector::from_iterator(n, (0..n).map(|i| (b_at(i) - d_feed * den[i]) / lead));

    let h_pow = dt.powf(-alpha);
    let weights = gl_weights(alpha, t.len());
    let mut m = -a;
    for i in 0..n {
        m[(i, i)] += h_pow;
    }
    let lu = m.lu();

    let mut states: Vec<DVector<f64>> = Vec::with_capacity(t.len());
    let mut y = Vec::with_capacity(t.len());
    for k in 0..t.len() {
        // rhs = B u_k - h^-alpha * sum_{j=1..k} c_j x_{k-j}
        let mut hist = DVector::<f64>::zeros(n);
        for j in 1..=k {
            hist.axpy(weights[j], &states[k - j], 1.0);
        }
        let rhs = &b - hist * h_pow;
        let x = lu.solve(&rhs).ok_or_else(|| {
            Error::Numerical("GL step matrix (h^-alpha I - A) is singular".into())
        })?;
        y.push((&c_out * &x)[0] + d_feed);
        states.push(x);
    }

    let ts = TimeSeries {
        t,
        y,
        solver: "gl".into(),
        dt,
        scenario: String::new(),
        warnings: Vec::new(),
    };
    ts.validate()?;
    Ok(ts)
}
