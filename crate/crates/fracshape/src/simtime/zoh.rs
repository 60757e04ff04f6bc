//! Controllable-canonical realization and exact zero-order-hold marching.

use super::{time_grid, TimeSeries};
use crate::approx::RationalTf;
use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector, RowDVector};
use num_complex::Complex64;

/// A single-input single-output state space `x' = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
}

impl StateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Transfer-function value `D + C (sI - A)^{-1} B`, used to verify that
    /// a realization reproduces the rational function it was built from.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let n = self.order();
        if n == 0 {
            return Ok(Complex64::new(self.d, 0.0));
        }
        let mut m = DMatrix::<Complex<f64>>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex::new(-self.a[(i, j)], 0.0);
            }
            m[(i, i)] += s;
        }
        let rhs = DVector::from_iterator(n, self.b.iter().map(|&v| Complex::new(v, 0.0)));
        let x = m.lu().solve(&rhs).ok_or_else(|| Error::Numerical(format!(
            "resolvent (sI - A) is singular at s = {s}"
        )))?;
        let mut acc = Complex::new(self.d, 0.0);
        for i in 0..n {
            acc += Complex::new(self.c[i], 0.0) * x[i];
        }
        Ok(acc)
    }
}

/// Controllable canonical realization of a proper rational function.
///
/// The denominator is normalized monic; the feedthrough `D` absorbs the
/// degree-equal part of the numerator and `C` holds the remainder.  An
/// improper function has no state space -- split off the derivative factor
/// (an `s^m` monomial) and realize the proper rest.
pub fn to_state_space(tf: &RationalTf) -> Result<StateSpace> {
    let (num, den) = (tf.num(), tf.den());
    let (dn, dd) = (num.len() - 1, den.len() - 1);
    if dn > dd {
        return Err(Error::Domain(format!(
            "improper transfer function (numerator degree {dn} > denominator degree {dd}); \
             split a derivative factor off and realize the proper remainder"
        )));
    }
    let n = dd;
    let lead = den[n];
    let b_at = |i: usize| num.get(i).copied().unwrap_or(0.0);
    let d = b_at(n) / lead;
    if n == 0 {
        return Ok(StateSpace {
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
            c: RowDVector::zeros(0),
            d,
        });
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
    let c = RowDVector::from_iterator(n, (0..n).map(|i| (b_at(i) - d * den[i]) / lead));
    Ok(StateSpace { a, b, c, d })
}

/// Unit-step response by exact zero-order-hold discretization.
///
/// The discrete pair `(Ad, Bd)` comes from one matrix exponential of the
/// augmented block `[[A, B], [0, 0]] dt`, so for piecewise-constant inputs
/// the samples carry no integration error; `dt` only sets where the exact
/// trajectory is read out.  A `dt` that under-resolves the fastest mode or
/// an unstable `A` still simulates but flags a warning on the series.
pub fn simulate_lti(ss: &StateSpace, t_end: f64, dt: f64) -> Result<TimeSeries> {
    let t = time_grid(t_end, dt)?;
    let n = ss.order();
    let mut warnings = Vec::new();
    if n > 0 {
        let ac = DMatrix::<Complex<f64>>::from_iterator(
            n,
            n,
            ss.a.iter().map(|&v| Complex::new(v, 0.0)),
        );
        if let Some(eig) = ac.schur().eigenvalues() {
            let fastest = eig.iter().map(|l| l.re.abs()).fold(0.0, f64::max);
            let most_unstable = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
            if dt * fastest > 0.5 {
                warnings.push(format!(
                    "dt = {dt} under-resolves the fastest mode (dt * |Re lambda| = {:.3})",
                    dt * fastest
                ));
            }
            if most_unstable > 1e-12 {
                warnings.push(format!(
                    "realization has an unstable mode (Re lambda = {most_unstable:.6e}); \
                     the response will diverge"
                ));
            }
        }
    }

    let y = if n == 0 {
        vec![ss.d; t.len()]
    } else {
        let mut aug = DMatrix::zeros(n + 1, n + 1);
        aug.view_mut((0, 0), (n, n)).copy_from(&(ss.a.clone() * dt));
        aug.view_mut((0, n), (n, 1)).copy_from(&(ss.b.clone() * dt));
        let e = aug.exp();
        let ad = e.view((0, 0), (n, n)).clone_owned();
        let bd = DVector::from_iterator(n, (0..n).map(|i| e[(i, n)]));
        let mut x = DVector::<f64>::zeros(n);
        let mut y = Vec::with_capacity(t.len());
        for _ in &t {
            y.push((&ss.c * &x)[0] + ss.d);
            x = &ad * &x + &bd;
        }
        y
    };

    let ts = TimeSeries {
        t,
        y,
        solver: "zoh".into(),
        dt,
        scenario: String::new(),
        warnings,
    };
    ts.validate()?;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_order_lag_realizes_to_the_textbook_matrices() {
        let tf = RationalTf::new(vec![1.0], vec![1.0, 1.0]).unwrap();
        let ss = to_state_space(&tf).unwrap();
        assert_eq!(ss.order(), 1);
        assert_relative_eq!(ss.a[(0, 0)], -1.0);
        assert_relative_eq!(ss.b[0], 1.0);
        assert_relative_eq!(ss.c[0], 1.0);
        assert_relative_eq!(ss.d, 0.0);
    }

    #[test]
    fn constant_realizes_to_pure_feedthrough() {
        let tf = RationalTf::new(vec![3.0], vec![1.0]).unwrap();
        let ss = to_state_space(&tf).unwrap();
        assert_eq!(ss.order(), 0);
        assert_relative_eq!(ss.d, 3.0);
        let ts = simulate_lti(&ss, 1.0, 0.5).unwrap();
        assert!(ts.y.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn improper_function_is_rejected_with_guidance() {
        let tf = RationalTf::new(vec![0.0, 0.0, 1.0], vec![1.0, 1.0]).unwrap();
        match to_state_space(&tf) {
            Err(Error::Domain(msg)) => assert!(msg.contains("derivative factor")),
            other => panic!("expected a domain error, got {other:?}"),
        }
    }

    #[test]
    fn realization_reproduces_the_rational_function_on_a_grid() {
        // Biproper on purpose: nonzero feedthrough exercises the D split.
        let tf =
            RationalTf::new(vec![2.0, 0.5, 1.0], vec![1.0, 1.2, 0.4, 2.0]).unwrap();
        let ss = to_state_space(&tf).unwrap();
        for i in 0..40 {
            let w = 10f64.powf(-2.0 + 4.0 * (i as f64) / 39.0);
            let s = Complex64::new(0.0, w);
            let got = ss.eval(s).unwrap();
            let want = tf.eval(s);
            assert!((got - want).norm() <= 1e-8 * want.norm().max(1.0), "at w = {w}");
        }
    }

    #[test]
    fn zoh_step_of_a_lag_is_exact() {
        let tf = RationalTf::new(vec![1.0], vec![1.0, 1.0]).unwrap();
        let ss = to_state_space(&tf).unwrap();
        let ts = simulate_lti(&ss, 5.0, 0.25).unwrap();
        for (t, y) in ts.t.iter().zip(&ts.y) {
            assert_relative_eq!(*y, 1.0 - (-t).exp(), epsilon = 1e-12);
        }
        assert!(ts.warnings.is_empty());
    }

    #[test]
    fn warnings_flag_coarse_steps_and_unstable_modes() {
        let fast = to_state_space(&RationalTf::new(vec![100.0], vec![100.0, 1.0]).unwrap())
            .unwrap();
        let ts = simulate_lti(&fast, 1.0, 0.1).unwrap();
        assert!(ts.warnings.iter().any(|w| w.contains("under-resolves")));

        let unstable =
            to_state_space(&RationalTf::new(vec![1.0], vec![-1.0, 1.0]).unwrap()).unwrap();
        let ts = simulate_lti(&unstable, 1.0, 0.01).unwrap();
        assert!(ts.warnings.iter().any(|w| w.contains("unstable")));
    }
}
