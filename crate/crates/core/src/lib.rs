//! Information-based interest-rate term structure.
//!
//! Bond prices are conditional survival probabilities of a random
//! "liquidity-crisis" time `X` whose a priori law is read off the initial
//! discount curve (`P_{0T} = Q(X >= T)`). The market observes `X` through a
//! noisy information process, and every observable (bond prices, short and
//! forward rates, volatilities, the pricing kernel) is a ratio of tail
//! integrals against the unnormalised conditional density
//!
//! ```text
//! p_t(x) = rho_0(x) * exp(phi(x) * eta_t - phi(x)^2 * tau_t / 2)     (Brownian)
//! p_t(x) = rho_0(x) * x^(-m t) * exp(-xi_t / x)                       (gamma)
//! ```
//!
//! Module map:
//!
//! * [`curve`]: initial discount function, density, inverse.
//! * [`quad`]: tail integrals, Gaussian integrals, root finding, normal CDF.
//! * [`model`]: `phi`, information processes and observation state.
//! * [`pricer`]: closed-form/quadrature observables on a conditional density.
//! * [`deriv`]: bond options, swaptions, hybrid payoffs, vega, implied sigma.
//! * [`mc`]: path simulation and the statistical verification oracles.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod deriv;
pub mod error;
pub mod mc;
pub mod model;
pub mod pricer;
pub mod quad;

pub use curve::DiscountCurve;
pub use deriv::{BondOptionSpec, Boundary, CallQuote, SwaptionSpec};
pub use error::{Error, Result};
pub use model::{InformationProcess, MarketState, ModelSpec, Observation, PhiFunction, RateSchedule};
pub use pricer::ConditionalDensityView;
pub use mc::{Estimate, Measure, PathSample, SimulationPlan};
pub use quad::{QuadratureSpec, RootSpec};
