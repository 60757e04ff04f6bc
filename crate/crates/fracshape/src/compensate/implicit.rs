//! Implicit (lead-lag) partial cancellation and the mirror construction.

use crate::error::{Error, Result};
use crate::focore::Factor;
use num_complex::Complex64;

/// Implicit split of `Z^k = (1 - s/z)^k`: the loop keeps
/// `X-tilde = Z^k (1 + s/z)^(-k(nu-1)/nu)` and the controller divides by
/// the mirrored fractional lead-lag `Q-tilde = (1 + s/z)^(k(nu-1)/nu)`.
///
/// Returns `(Q-tilde, X-tilde)`.  The mirrored base keeps the inverted
/// compensator stable for a right-half-plane target; as `nu` grows,
/// `Q-tilde` tends to the full mirror `(1 + s/z)^k` and the residual to
/// the all-pass.  With `pair = true` both factors use the conjugate pair
/// `(z, conj z)` and have real responses.
pub fn implicit_terms(z: Complex64, nu: u32, k: i8, pair: bool) -> Result<(Factor, Factor)> {
    if nu < 2 {
        return Err(Error::Domain(format!("expansion order nu = {nu} must be >= 2")));
    }
    if k != 1 && k != -1 {
        return Err(Error::Domain(format!("exponent sign k = {k}, expected +1 or -1")));
    }
    check_target(z, pair)?;
    let beta_q = f64::from(k) * f64::from(nu - 1) / f64::from(nu);
    let q = Factor::ImplicitPower { z, beta: beta_q, pair, mirrored: true };
    let x = Factor::Product {
        factors: vec![
            Factor::ImplicitPower { z, beta: f64::from(k), pair, mirrored: false },
            Factor::ImplicitPower { z, beta: -beta_q, pair, mirrored: true },
        ],
    };
    Ok((q, x))
}

/// The mirror factor `D = (1 + s/z)^k` (single) or its conjugate-pair
/// product (double): the target reflected into the left half plane, unit
/// DC gain.  Dividing the loop by it leaves the all-pass `Z^k D^-k`.
pub fn mirror(z: Complex64, pair: bool, k: i8) -> Result<Factor> {
    if k != 1 && k != -1 {
        return Err(Error::Domain(format!("exponent sign k = {k}, expected +1 or -1")));
    }
    check_target(z, pair)?;
    Ok(Factor::ImplicitPower { z, beta: f64::from(k), pair, mirrored: true })
}

fn check_target(z: Complex64, pair: bool) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain("target is not finite".into()));
    }
    if z.re <= 0.0 {
        return Err(Error::Domain(format!("target {z} must have Re z > 0")));
    }
    if pair && z.im == 0.0 {
        return Err(Error::Domain("degenerate pair: Im z = 0 (use the single form)".into()));
    }
    if !pair && z.im != 0.0 {
        return Err(Error::Domain(
            "single-target form needs real z; set the pair flag for a conjugate pair".into(),
        ));
    }
    Ok(())
}
