//! A reference design: one non-minimum-phase plant and four controllers
//! that treat its right-half-plane zero with the different partial
//! cancellation methods, all tuned to the same crossover.

use super::{margins::tune_gain, LoopSpec};
use crate::error::Result;
use crate::focore::{Alpha, Factor, FactoredTf, PseudoPolynomial};
use num_complex::Complex64;

/// Crossover every reference loop is tuned to, rad/s.
pub const EXAMPLE_CROSSOVER: f64 = 0.54;

/// The reference plant, its four controllers, and the tuned gains.
#[derive(Debug, Clone)]
pub struct WorkedExample {
    pub plant: FactoredTf,
    /// `C1` plain PI; `C2` PI with the zero's stable mirror pole;
    /// `C3` PI with the explicit expansion divisor `(1 + s^(1/2))^-1`;
    /// `C4` PI with the implicit lead-lag `(1 + s)^(-1/2)`.
    pub controllers: [FactoredTf; 4],
    pub gains: [f64; 4],
}

/// `G = (s - 1) / ((1 + s/2)(1 + s/3))`: stable, well damped, DC gain -1,
/// with one right-half-plane zero at `s = 1` that caps the achievable
/// bandwidth and motivates every construction in this crate.
pub fn example_plant() -> FactoredTf {
    FactoredTf::new(vec![Factor::io_rational(
        vec![-1.0, 1.0],
        vec![1.0, 5.0 / 6.0, 1.0 / 6.0],
    )])
}

/// The shared PI core `(1 + 2s)/(2s)`: unit proportional gain, reset time 2.
pub fn pi_template() -> Factor {
    Factor::io_rational(vec![1.0, 2.0], vec![0.0, 2.0])
}

/// Builds the four reference controllers and tunes each loop's gain so that
/// `|L(j 0.54)| = 1` under the negated-loop convention (the plant's DC gain
/// is negative, so classical margins are read off `-G C`).
pub fn build_example_controllers() -> Result<WorkedExample> {
    let plant = example_plant();
    let z = Complex64::new(1.0, 0.0);
    let expansion_divisor = Factor::PseudoPoly {
        poly: PseudoPolynomial::from_real(Alpha::from_nu(2), vec![1.0, 1.0])?,
        k: -1,
    };
    let templates: [Vec<Factor>; 4] = [
        vec![pi_template()],
        vec![pi_template(), Factor::ImplicitPower { z, beta: -1.0, pair: false, mirrored: true }],
        vec![pi_template(), expansion_divisor],
        vec![pi_template(), Factor::ImplicitPower { z, beta: -0.5, pair: false, mirrored: true }],
    ];

    let mut gains = [0.0; 4];
    let mut controllers: Vec<FactoredTf> = Vec::with_capacity(4);
    for (i, template) in templates.into_iter().enumerate() {
        let unit = FactoredTf::new(template);
        let k = tune_gain(&LoopSpec::negated(plant.clone(), unit.clone()), EXAMPLE_CROSSOVER)?;
        let mut factors = vec![Factor::gain(k)];
        factors.extend(unit.factors);
        gains[i] = k;
        controllers.push(FactoredTf::new(factors));
    }
    let controllers: [FactoredTf; 4] =
        controllers.try_into().expect("exactly four controllers built");
    Ok(WorkedExample { plant, controllers, gains })
}
