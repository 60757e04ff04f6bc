//! Internal stability of a partially cancelled loop.
//!
//! An input-output stability check of `1 + L` misses dynamics that were
//! cancelled between plant and controller: they are gone from `L` but still
//! physically present, and an unstable cancelled mode leaks into the input
//! sensitivity.  The verdict here therefore combines two sector tests: the
//! closed-loop characteristic pseudo polynomial, and the hidden (cancelled)
//! modes of the plan.

use super::DEFAULT_BAND;
use crate::approx::{approximate_tf, BandSpec};
use crate::compensate::{CancellationPlan, Method};
use crate::error::Result;
use crate::focore::{
    complex_power, matignon_stable, poly_add, poly_mul, to_pseudo_rational, Alpha, Factor,
    FactoredTf, PseudoPolynomial, PseudoRational, StabilityReport,
};
use num_complex::Complex64;

/// Verdict of the two-part internal stability check.
#[derive(Debug, Clone)]
pub struct InternalStabilityReport {
    /// Sector test of the closed-loop characteristic pseudo polynomial
    /// (num + den of `1 + L` over the common base order).
    pub loop_modes: StabilityReport,
    /// Sector test of the modes cancelled exactly between the plant's
    /// target factor and the compensator; vacuous (no roots) for methods
    /// that cancel nothing exactly.
    pub hidden_modes: StabilityReport,
    /// True iff both tests pass.
    pub internally_stable: bool,
}

/// Relative threshold for discarding top-degree coefficients of `num + den`
/// that are pure cancellation residue.
const CHAR_TRIM_REL: f64 = 1e-12;

fn coeff_scale(c: &[Complex64]) -> f64 {
    c.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Characteristic pseudo polynomial of `1 + N/D`: `D + N` with top-degree
/// coefficients below `1e-12` of the operand scale stripped (an exact
/// degree drop leaves rounding residue there, and a spurious top
/// coefficient would inject a meaningless far-away root).
fn characteristic_of(l: &PseudoRational) -> Result<PseudoPolynomial> {
    let scale = coeff_scale(l.num.coeffs()).max(coeff_scale(l.den.coeffs()));
    let mut c = poly_add(l.num.coeffs(), l.den.coeffs());
    while c.len() > 1 && c.last().expect("nonempty").norm() <= CHAR_TRIM_REL * scale {
        c.pop();
    }
    PseudoPolynomial::new(l.alpha(), c)
}

/// True when some factor forces the whole product to zero (a zero gain or a
/// zero numerator polynomial).
fn loop_is_zero(tf: &FactoredTf) -> bool {
    tf.flattened_factors().iter().any(|f| match f {
        Factor::Gain { g } => *g == 0.0,
        Factor::IoRational { num, .. } => num.iter().all(|&c| c == 0.0),
        _ => false,
    })
}

/// Open-loop denominator of `tf` with its zero factors neutralized.
/// `1 + 0` has no roots, so the closed-loop modes of an identically zero
/// loop are exactly the open-loop poles.
fn open_loop_denominator(tf: &FactoredTf) -> Result<PseudoPolynomial> {
    let neutral: Vec<Factor> = tf
        .flattened_factors()
        .into_iter()
        .map(|f| match f {
            Factor::Gain { g } if *g == 0.0 => Factor::gain(1.0),
            Factor::IoRational { num, den } if num.iter().all(|&c| c == 0.0) => {
                Factor::io_rational(vec![1.0], den.clone())
            }
            other => other.clone(),
        })
        .collect();
    Ok(to_pseudo_rational(&FactoredTf::new(neutral))?.den)
}

/// The pseudo polynomial whose roots are cancelled exactly by the plan's
/// compensator and therefore hidden from the loop transfer function.
///
/// * Expansion compensators (`Q^{+/-1}`) hide the roots of `Q`.
/// * The stable-pair principal notch hides the principal pair
///   `(1 - w/p^alpha)(1 - w/conj(p)^alpha)`.
/// * Implicit and mirror compensators cancel no root exactly (the lead-lag
///   only reshapes, the mirror's reflected pole stays in the loop as part
///   of the all-pass), so their hidden set is empty: a constant polynomial.
fn hidden_modes_poly(plan: &CancellationPlan) -> Result<PseudoPolynomial> {
    match &plan.compensator {
        Factor::PseudoPoly { poly, .. } => Ok(poly.clone()),
        Factor::ExplicitX { z, alpha, pair, .. } => {
            let principal = |root: Complex64| -> Result<Vec<Complex64>> {
                let za = complex_power(root, alpha.value())?;
                Ok(vec![Complex64::ONE, -Complex64::ONE / za])
            };
            let mut c = principal(*z)?;
            if *pair {
                c = poly_mul(&c, &principal(z.conj())?);
            }
            PseudoPolynomial::new(*alpha, c)
        }
        _ => PseudoPolynomial::constant(Alpha::from_nu(plan.nu), Complex64::ONE),
    }
}

/// Internal stability of the loop `residual * ghat * chat` left by `plan`,
/// where `ghat` is the plant without the cancellation target and `chat` the
/// controller without the compensator.
///
/// Explicit and mirror plans are pseudo-rational and are checked in the
/// common `w`-plane.  An implicit plan's residual carries a fractional
/// power of `(1 -/+ s/z)`, which no `w` commensurates; it is first
/// approximated as a rational function over the default analysis band and
/// the closed loop is then checked as an integer-order system.
pub fn internal_stability(
    plan: &CancellationPlan,
    ghat: &FactoredTf,
    chat: &FactoredTf,
) -> Result<InternalStabilityReport> {
    let l = FactoredTf::new(vec![plan.residual.clone()]).concat(ghat).concat(chat);
    let hidden = hidden_modes_poly(plan)?;
    match plan.method {
        Method::Explicit | Method::Mirror => internal_stability_parts(&hidden, &l),
        Method::Implicit => {
            let band = BandSpec::new(DEFAULT_BAND.0, DEFAULT_BAND.1, 5)?;
            let approx = approximate_tf(&l, &band)?;
            let scale = |c: &[f64]| c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let s = scale(approx.num()).max(scale(approx.den()));
            let mut c = vec![0.0; approx.num().len().max(approx.den().len())];
            for (i, &x) in approx.num().iter().enumerate() {
                c[i] += x;
            }
            for (i, &x) in approx.den().iter().enumerate() {
                c[i] += x;
            }
            while c.len() > 1 && c.last().expect("nonempty").abs() <= CHAR_TRIM_REL * s {
                c.pop();
            }
            let char_poly = PseudoPolynomial::from_real(Alpha::from_nu(1), c)?;
            let loop_modes = matignon_stable(&char_poly)?;
            let hidden_modes = matignon_stable(&hidden)?;
            Ok(InternalStabilityReport {
                internally_stable: loop_modes.stable && hidden_modes.stable,
                loop_modes,
                hidden_modes,
            })
        }
    }
}

/// Closed-loop complementary sensitivity `L/(1 + L)` as one pseudo-rational:
/// numerator of `L` over the characteristic polynomial.  This is the object
/// a fractional time-domain solver integrates.
pub fn closed_loop_pseudo(l: &FactoredTf) -> Result<PseudoRational> {
    let pr = to_pseudo_rational(l)?;
    PseudoRational::new(pr.num.clone(), characteristic_of(&pr)?)
}

/// The same verdict from explicit parts: a hidden-mode pseudo polynomial
/// and the visible loop.  This is the entry point for cancellations done
/// outside a [`CancellationPlan`] -- in particular the classical trap of
/// cancelling an unstable pole with a controller zero exactly: the visible
/// loop is clean, the hidden polynomial carries the unstable root, and the
/// verdict is unstable even though the complementary sensitivity looks
/// fine.
pub fn internal_stability_parts(
    hidden: &PseudoPolynomial,
    reduced_loop: &FactoredTf,
) -> Result<InternalStabilityReport> {
    let char_poly = if loop_is_zero(reduced_loop) {
        open_loop_denominator(reduced_loop)?
    } else {
        characteristic_of(&to_pseudo_rational(reduced_loop)?)?
    };
    let loop_modes = matignon_stable(&char_poly)?;
    let hidden_modes = matignon_stable(hidden)?;
    Ok(InternalStabilityReport {
        internally_stable: loop_modes.stable && hidden_modes.stable,
        loop_modes,
        hidden_modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compensate::CancelTarget;

    fn plant_without_zero() -> FactoredTf {
        // 1/((1 + s/2)(1 + s/3)); the removed target supplies the rest.
        FactoredTf::new(vec![Factor::io_rational(vec![1.0], vec![1.0, 5.0 / 6.0, 1.0 / 6.0])])
    }

    fn pi_with_gain(k: f64) -> FactoredTf {
        FactoredTf::new(vec![Factor::gain(k), Factor::io_rational(vec![1.0, 2.0], vec![0.0, 2.0])])
    }

    #[test]
    fn explicit_expansion_loop_is_internally_stable() {
        let plan =
            CancellationPlan::new(CancelTarget::Real { z: 1.0 }, 1, 2, Method::Explicit).unwrap();
        // Crossover-tuned gain for this loop; the verdict is flat around it.
        let rep = internal_stability(&plan, &plant_without_zero(), &pi_with_gain(1.0913)).unwrap();
        assert!(rep.loop_modes.stable);
        assert!(rep.hidden_modes.stable);
        assert!(rep.internally_stable);
        // The hidden mode is the expansion root at w = -1.
        assert_eq!(rep.hidden_modes.roots.len(), 1);
        assert!((rep.hidden_modes.roots[0].root - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn mirror_loop_is_internally_stable_with_no_hidden_modes() {
        let plan =
            CancellationPlan::new(CancelTarget::Real { z: 1.0 }, 1, 2, Method::Mirror).unwrap();
        let rep = internal_stability(&plan, &plant_without_zero(), &pi_with_gain(0.7723)).unwrap();
        assert!(rep.internally_stable);
        assert!(rep.hidden_modes.roots.is_empty());
        assert!(rep.hidden_modes.min_margin_rad.is_none());
    }

    #[test]
    fn implicit_loop_is_checked_through_the_rational_approximation() {
        let plan =
            CancellationPlan::new(CancelTarget::Real { z: 1.0 }, 1, 2, Method::Implicit).unwrap();
        let rep = internal_stability(&plan, &plant_without_zero(), &pi_with_gain(0.7244)).unwrap();
        assert!(rep.internally_stable);
        assert!(rep.hidden_modes.roots.is_empty());
        // IO path: the characteristic polynomial is integer-order.
        assert!((rep.loop_modes.alpha.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stable_plant_zero_controller_is_stable() {
        let p = Complex64::new(-0.5, 2.0);
        let plan = CancellationPlan::new(CancelTarget::StablePair { p }, -1, 2, Method::Explicit)
            .unwrap();
        let rep = internal_stability(
            &plan,
            &FactoredTf::one(),
            &FactoredTf::new(vec![Factor::gain(0.0)]),
        )
        .unwrap();
        // Loop modes are the residual's own (stable) remaining roots; the
        // hidden principal pair is stable because p is.
        assert!(rep.internally_stable);
        assert_eq!(rep.hidden_modes.roots.len(), 2);
    }

    #[test]
    fn exact_unstable_cancellation_is_flagged_through_the_parts_api() {
        // Plant 1/(1 - s) with controller (1 - s) * 2/(s + 2): the visible
        // loop 2/(s + 2) closes stably, but the cancelled pole at s = 1 is
        // a hidden unstable mode.
        let hidden =
            PseudoPolynomial::from_real(Alpha::from_nu(1), vec![1.0, -1.0]).unwrap();
        let visible =
            FactoredTf::new(vec![Factor::io_rational(vec![2.0], vec![2.0, 1.0])]);
        let rep = internal_stability_parts(&hidden, &visible).unwrap();
        assert!(rep.loop_modes.stable);
        assert!(!rep.hidden_modes.stable);
        assert!(!rep.internally_stable);
    }
}
