//! Fractional-order partial cancellation of integer-order non-minimum-phase
//! zeros and unstable or low-damped poles.
//!
//! An integer-order zero `Z = 1 - s/z` (or a pole, or a conjugate pair) can be
//! split as `Z = X * Q`, where `Q` is a pseudo polynomial in `w = s^(1/nu)`
//! whose roots all lie in the stable sector, and `X = 1 - (s/z)^(1/nu)` is a
//! fractional residual with a much smaller magnitude and phase footprint.
//! Cancelling only `Q` in the controller trades the hard limitation of the
//! original root for the milder fractional one.  This crate builds those
//! compensators, analyzes the resulting loops, approximates fractional terms
//! with band-limited rational filters, and simulates closed-loop responses.
//!
//! Module map:
//!
//! * [`focore`] -- commensurate transfer-function algebra: factored
//!   representations, principal-branch evaluation, pseudo-polynomial roots,
//!   and the Matignon sector test.
//! * [`compensate`] -- the compensator factories: explicit `X`/`Q` splits,
//!   implicit lead-lag powers, mirrored poles, conjugate-pair forms, and
//!   stable pole-pair resonance reduction.
//! * [`approx`] -- Oustaloup band-limited rational approximation of
//!   fractional operators and of the implicit binomial powers, including the
//!   per-root scheme for conjugate pairs.
//! * [`loopshape`] -- sensitivities, internal stability of partially
//!   cancelled loops, stability margins, and crossover gain tuning.
//! * [`simtime`] -- state-space realization, exact zero-order-hold
//!   simulation, a Grunwald-Letnikov fractional solver, and response metrics.
//!
//! The [`loopshape::build_example_controllers`] factory and the CLI's
//! `reproduce` command regenerate a complete worked example: a plant with a
//! dominant non-minimum-phase zero controlled by four PI-based controllers
//! that cancel that zero in different ways.

pub mod approx;
pub mod compensate;
pub mod error;
pub mod focore;
pub mod loopshape;
pub mod simtime;

pub use error::{Error, Result};
pub use focore::{Alpha, Factor, FactoredTf, FrequencyResponse};
pub use focore::{PseudoPolynomial, PseudoRational, StabilityReport};
