//! Bond options, swaptions and general payoffs through the pricing kernel.
//!
//! Under the Brownian measure B the information process is a driftless
//! Brownian motion, so at an option date `t` the sufficient statistic
//! `eta_t` is `N(0, tau_t)` and every price is a one-dimensional Gaussian
//! integral of a bracket of tail integrals.

use serde::{Deserialize, Serialize};

use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use crate::mc::{block_rng, normal, par_blocks, Estimate, Moments, SimulationPlan};
use crate::model::{InformationProcess, MarketState, ModelSpec, PhiFunction};
use crate::pricer::ConditionalDensityView;
use crate::quad::{find_root_monotone, integrate_gaussian_scaled, normal_cdf, tail_integrals, QuadratureSpec, RootSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondOptionSpec {
    pub option_maturity: f64,
    pub bond_maturity: f64,
    pub strike: f64,
}

impl BondOptionSpec {
    pub fn new(option_maturity: f64, bond_maturity: f64, strike: f64) -> Result<Self> {
        if !(option_maturity > 0.0 && bond_maturity > option_maturity && bond_maturity.is_finite()) {
            return Err(Error::domain(format!(
                "need 0 < option maturity < bond maturity, got {option_maturity} and {bond_maturity}"
            )));
        }
        if !(strike >= 0.0 && strike.is_finite()) {
            return Err(Error::domain(format!("strike must be >= 0, got {strike}")));
        }
        Ok(Self { option_maturity, bond_maturity, strike })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwaptionSpec {
    pub option_maturity: f64,
    pub payment_dates: Vec<f64>,
    pub strike: f64,
}

impl SwaptionSpec {
    pub fn new(option_maturity: f64, payment_dates: Vec<f64>, strike: f64) -> Result<Self> {
        if !(option_maturity > 0.0) {
            return Err(Error::domain("swaption maturity must be positive"));
        }
        if payment_dates.is_empty() {
            return Err(Error::domain("swaption needs at least one payment date"));
        }
        let mut prev = option_maturity;
        for &d in &payment_dates {
            if !(d > prev && d.is_finite()) {
                return Err(Error::domain("payment dates must increase strictly after the option maturity"));
            }
            prev = d;
        }
        if !(strike >= 0.0 && strike.is_finite()) {
            return Err(Error::domain(format!("strike must be >= 0, got {strike}")));
        }
        Ok(Self { option_maturity, payment_dates, strike })
    }
}

/// The strike lies outside the range of attainable bond prices, so the
/// exercise decision is known in advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    AlwaysExercised,
    NeverExercised,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CallQuote {
    pub price: f64,
    pub boundary: Option<Boundary>,
    /// Critical value of `eta_t` at which `P_{tT} = K`.
    pub critical_eta: Option<f64>,
    /// The same level in units of `xi_t` (constant-rate models).
    pub critical_xi: Option<f64>,
}

impl CallQuote {
    fn boundary(price: f64, boundary: Boundary) -> Self {
        Self { price, boundary: Some(boundary), critical_eta: None, critical_xi: None }
    }
}

/// State at `t` with sufficient statistic `eta` and variance `tau`. The raw
/// information is reported in constant-rate units `eta * sqrt(t / tau)`.
fn info_state(t: f64, eta: f64, tau: f64) -> Result<MarketState> {
    let xi = if tau > 0.0 { eta * (t / tau).sqrt() } else { 0.0 };
    MarketState::from_sufficient(t, xi, eta, tau)
}

fn brownian_tau(model: &ModelSpec, t: f64) -> Result<f64> {
    model
        .tau_at(t)
        .ok_or(Error::UnsupportedModel("closed-form derivatives need a Brownian information process"))
}

/// `(Σ_i c_i ∫_{l_i}^∞ p_t)^+` at information level `eta`, as a mantissa
/// and log-scale pair.
#[allow(clippy::too_many_arguments)]
fn clipped_bracket(
    curve: &DiscountCurve,
    model: &ModelSpec,
    t: f64,
    tau: f64,
    eta: f64,
    lowers: &[f64],
    coef: &[f64],
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let view = ConditionalDensityView::with_quadrature(curve, model, info_state(t, eta, tau)?, *quad)?;
    let (m, shift) = view.scaled_masses(lowers)?;
    let d: f64 = m.iter().zip(coef).map(|(a, c)| a * c).sum();
    Ok(if d > 0.0 { (d, shift) } else { (0.0, 0.0) })
}

/// Gaussian integral over `eta ~ N(0, tau)` of a clipped bracket, with the
/// first quadrature error surfaced.
fn gaussian_of_bracket(
    curve: &DiscountCurve,
    model: &ModelSpec,
    t: f64,
    tau: f64,
    lowers: &[f64],
    coef: &[f64],
    quad: &QuadratureSpec,
) -> Result<f64> {
    let mut failure = None;
    let v = integrate_gaussian_scaled(
        |eta| match clipped_bracket(curve, model, t, tau, eta, lowers, coef, quad) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                (0.0, 0.0)
            }
        },
        0.0,
        tau,
        quad,
    );
    match failure {
        Some(e) => Err(e),
        None => v,
    }
}

/// European call on a discount bond, by the critical-value formula.
pub fn bond_call_price(spec: &BondOptionSpec, model: &ModelSpec, curve: &DiscountCurve) -> Result<CallQuote> {
    bond_call_price_with(spec, model, curve, &QuadratureSpec::default())
}

pub fn bond_call_price_with(
    spec: &BondOptionSpec,
    model: &ModelSpec,
    curve: &DiscountCurve,
    quad: &QuadratureSpec,
) -> Result<CallQuote> {
    let BondOptionSpec { option_maturity: t, bond_maturity: mat, strike: k } = *spec;
    let tau = brownian_tau(model, t)?;
    let (pt, pmat) = (curve.discount(t)?, curve.discount(mat)?);
    let forced = pmat - k * pt;
    if k == 0.0 {
        return Ok(CallQuote::boundary(pmat, Boundary::AlwaysExercised));
    }
    if k >= 1.0 {
        return Ok(CallQuote::boundary(0.0, Boundary::NeverExercised));
    }
    if tau == 0.0 {
        return Ok(if forced > 0.0 {
            CallQuote::boundary(forced, Boundary::AlwaysExercised)
        } else {
            CallQuote::boundary(0.0, Boundary::NeverExercised)
        });
    }
    let excess = |eta: f64| -> f64 {
        info_state(t, eta, tau)
            .and_then(|s| ConditionalDensityView::with_quadrature(curve, model, s, *quad))
            .and_then(|v| v.bond_price(mat))
            .map_or(f64::NAN, |p| p - k)
    };
    let sd = tau.sqrt();
    let eta_star = match find_root_monotone(excess, (-sd, sd), &RootSpec::default()) {
        Ok(x) => x,
        Err(Error::Bracketing { .. }) => {
            return Ok(if excess(0.0) > 0.0 {
                CallQuote::boundary(forced.max(0.0), Boundary::AlwaysExercised)
            } else {
                CallQuote::boundary(0.0, Boundary::NeverExercised)
            });
        }
        Err(e) => return Err(e),
    };
    let price = critical_value_price(curve, model.phi, t, mat, k, tau, eta_star, quad)?;
    let critical_xi = match model.process {
        InformationProcess::BrownianConst { sigma } if sigma > 0.0 => Some(eta_star / sigma),
        _ => None,
    };
    Ok(CallQuote { price, boundary: None, critical_eta: Some(eta_star), critical_xi })
}

/// Integrates the exercise-region probability against the prior:
/// `∫_T ρ_0 N(d) - K ∫_t ρ_0 N(d)` with `d = ±(√tau phi(x) - eta*/√tau)`,
/// the sign following the direction of `phi`.
#[allow(clippy::too_many_arguments)]
fn critical_value_price(
    curve: &DiscountCurve,
    phi: PhiFunction,
    t: f64,
    mat: f64,
    k: f64,
    tau: f64,
    eta_star: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let sd = tau.sqrt();
    let sign = if phi.is_increasing() { 1.0 } else { -1.0 };
    let v = tail_integrals(|x| [normal_cdf(sign * (sd * phi.value(x) - eta_star / sd))], curve, &[t, mat], quad)?;
    Ok((v[1][0] - k * v[0][0]).max(0.0))
}

/// The same call by direct Gaussian integration of the clipped bracket,
/// with no root finding and no monotonicity assumption.
///
/// Accurate while `sigma |phi(x)| sqrt(t)` stays moderate where the prior
/// has mass; otherwise the integrand peaks far out in the Gaussian tail and
/// the critical-value route should be preferred.
pub fn bond_call_price_gaussian(
    spec: &BondOptionSpec,
    model: &ModelSpec,
    curve: &DiscountCurve,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let BondOptionSpec { option_maturity: t, bond_maturity: mat, strike: k } = *spec;
    let tau = brownian_tau(model, t)?;
    if tau == 0.0 {
        return Ok((curve.discount(mat)? - k * curve.discount(t)?).max(0.0));
    }
    gaussian_of_bracket(curve, model, t, tau, &[t, mat], &[-k, 1.0], quad)
}

/// Option on the swap rate:
///
/// ```text
/// E^B[(∫_t^{T_n} p_t - K Σ_i ∫_{T_i}^∞ p_t)^+]
/// ```
///
/// The positive part is taken node by node so no root structure of the
/// bracket is assumed.
pub fn swaption_price(spec: &SwaptionSpec, model: &ModelSpec, curve: &DiscountCurve) -> Result<f64> {
    swaption_price_with(spec, model, curve, &QuadratureSpec::default())
}

pub fn swaption_price_with(spec: &SwaptionSpec, model: &ModelSpec, curve: &DiscountCurve, quad: &QuadratureSpec) -> Result<f64> {
    let SwaptionSpec { option_maturity: t, ref payment_dates, strike: k } = *spec;
    let tau = brownian_tau(model, t)?;
    let n = payment_dates.len();
    let mut lowers = vec![t];
    lowers.extend_from_slice(payment_dates);
    let mut coef = vec![1.0];
    coef.extend(std::iter::repeat_n(-k, n));
    coef[n] -= 1.0;
    if tau == 0.0 {
        let d: f64 = lowers.iter().zip(&coef).map(|(&l, c)| c * curve.discount_unchecked(l)).sum();
        return Ok(d.max(0.0));
    }
    gaussian_of_bracket(curve, model, t, tau, &lowers, &coef, quad)
}

/// Price at `state` of a claim paying `payoff(view_T)` at `maturity`:
/// `E^B[pi_T H_T] / pi_t`, by Monte Carlo over the exact Gaussian law of the
/// information increment.
pub fn hybrid_price<F>(
    payoff: F,
    maturity: f64,
    model: &ModelSpec,
    curve: &DiscountCurve,
    state: &MarketState,
    plan: &SimulationPlan,
) -> Result<Estimate>
where
    F: Fn(&ConditionalDensityView) -> Result<f64> + Sync,
{
    if !model.is_brownian() {
        return Err(Error::UnsupportedModel("hybrid pricing is built on the Brownian measure"));
    }
    if !state.alive {
        return Err(Error::NotAlive { t: state.t });
    }
    if !(maturity >= state.t) || plan.n_paths == 0 {
        return Err(Error::domain("need maturity >= state time and at least one draw"));
    }
    let (t, obs) = (state.t, state.obs);
    let (xi0, eta0, tau0) = match obs {
        crate::model::Observation::Brownian { xi, eta, tau } => (xi, eta, tau),
        crate::model::Observation::Gamma { .. } => return Err(Error::domain("state does not match the model")),
    };
    let ln_pi_t = ConditionalDensityView::with_quadrature(curve, model, *state, plan.quad)?.ln_pricing_kernel()?;
    // joint Gaussian law of (Δxi, Δeta) over [t, T]
    let segments = model.sigma_segments(t, maturity).unwrap_or_default();
    let var_xi = maturity - t;
    let var_eta: f64 = segments.iter().map(|(a, b, s)| s * s * (b - a)).sum();
    let cov: f64 = segments.iter().map(|(a, b, s)| s * (b - a)).sum();
    let (l11, l21) = if var_xi > 0.0 { (var_xi.sqrt(), cov / var_xi.sqrt()) } else { (0.0, 0.0) };
    let l22 = (var_eta - l21 * l21).max(0.0).sqrt();
    let tau_t = tau0 + var_eta;
    let value = |z1: f64, z2: f64| -> Result<f64> {
        let s = MarketState::from_sufficient(maturity, xi0 + l11 * z1, eta0 + l21 * z1 + l22 * z2, tau_t)?;
        let view = ConditionalDensityView::with_quadrature(curve, model, s, plan.quad)?;
        let h = payoff(&view)?;
        Ok(if h == 0.0 { 0.0 } else { (view.ln_pricing_kernel()? - ln_pi_t).exp() * h })
    };
    let blocks = par_blocks(plan.n_paths, |block, count| {
        let mut rng = block_rng(plan.seed, block);
        let mut acc = Moments::default();
        for _ in 0..count {
            let (z1, z2) = (normal(&mut rng), normal(&mut rng));
            let v = if plan.antithetic { 0.5 * (value(z1, z2)? + value(-z1, -z2)?) } else { value(z1, z2)? };
            acc.push(v);
        }
        Ok(vec![acc])
    })?;
    let mut total = Moments::default();
    for b in &blocks {
        total.merge(b);
    }
    Ok(total.estimate())
}

fn sigma_of(model: &ModelSpec) -> Result<f64> {
    match model.process {
        InformationProcess::BrownianConst { sigma } => Ok(sigma),
        _ => Err(Error::UnsupportedModel("vega and implied rates need a constant information flow rate")),
    }
}

fn with_sigma(model: &ModelSpec, sigma: f64) -> Result<ModelSpec> {
    ModelSpec::brownian(model.phi, sigma)
}

/// `∂C/∂sigma` by central difference with step `max(1e-4, 1e-4 sigma)`,
/// one-sided when the step would cross zero.
pub fn vega(spec: &BondOptionSpec, model: &ModelSpec, curve: &DiscountCurve) -> Result<f64> {
    let sigma = sigma_of(model)?;
    let h = 1e-4_f64.max(1e-4 * sigma);
    let price = |s: f64| -> Result<f64> { Ok(bond_call_price(spec, &with_sigma(model, s)?, curve)?.price) };
    if sigma > h {
        Ok((price(sigma + h)? - price(sigma - h)?) / (2.0 * h))
    } else {
        Ok((price(sigma + h)? - price(sigma)?) / h)
    }
}

pub const IMPLIED_SIGMA_RANGE: (f64, f64) = (1e-4, 5.0);
const IMPLIED_SCAN: usize = 25;

/// Information flow rate reproducing an observed call price.
///
/// The price is first scanned on a logarithmic grid of rates; a scan that is
/// not monotone is reported rather than searched through.
pub fn implied_sigma(spec: &BondOptionSpec, observed_price: f64, template: &ModelSpec, curve: &DiscountCurve) -> Result<f64> {
    sigma_of(template)?;
    let (lo, hi) = IMPLIED_SIGMA_RANGE;
    let price = |s: f64| -> Result<f64> { Ok(bond_call_price(spec, &with_sigma(template, s)?, curve)?.price) };
    let grid: Vec<f64> = (0..IMPLIED_SCAN)
        .map(|i| lo * (hi / lo).powf(i as f64 / (IMPLIED_SCAN - 1) as f64))
        .collect();
    let prices = grid.iter().map(|&s| price(s)).collect::<Result<Vec<f64>>>()?;
    let dir = (prices[IMPLIED_SCAN - 1] - prices[0]).signum();
    for i in 1..IMPLIED_SCAN {
        if (prices[i] - prices[i - 1]) * dir < -1e-12 {
            return Err(Error::NonMonotoneVega { sigma: grid[i] });
        }
    }
    let (pmin, pmax) = (prices[0].min(prices[IMPLIED_SCAN - 1]), prices[0].max(prices[IMPLIED_SCAN - 1]));
    if !(observed_price >= pmin && observed_price <= pmax) || dir == 0.0 {
        return Err(Error::PriceRange { price: observed_price, lo: pmin, hi: pmax });
    }
    let cell = (1..IMPLIED_SCAN)
        .find(|&i| (prices[i] - observed_price) * dir >= 0.0)
        .unwrap_or(IMPLIED_SCAN - 1);
    let f = |s: f64| price(s).map_or(f64::NAN, |p| p - observed_price);
    let spec_root = RootSpec { abs_tol: 1e-14, ..RootSpec::default() };
    find_root_monotone(f, (grid[cell - 1], grid[cell]), &spec_root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RateSchedule, Sign};

    fn flat() -> DiscountCurve {
        DiscountCurve::flat(0.02).unwrap()
    }

    fn fast_decay() -> ModelSpec {
        ModelSpec::brownian(PhiFunction::exp_decay(0.05, Sign::Positive).unwrap(), 0.25).unwrap()
    }

    fn call(k: f64) -> BondOptionSpec {
        BondOptionSpec::new(2.0, 5.0, k).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(BondOptionSpec::new(5.0, 2.0, 0.9).is_err());
        assert!(BondOptionSpec::new(0.0, 2.0, 0.9).is_err());
        assert!(BondOptionSpec::new(1.0, 2.0, -0.1).is_err());
        assert!(SwaptionSpec::new(1.0, vec![2.0, 2.0], 0.1).is_err());
        assert!(SwaptionSpec::new(1.0, vec![0.5], 0.1).is_err());
        assert!(SwaptionSpec::new(1.0, vec![], 0.1).is_err());
    }

    #[test]
    fn forced_boundaries() {
        let q = bond_call_price(&call(0.0), &fast_decay(), &flat()).unwrap();
        assert!((q.price - (-0.1f64).exp()).abs() < 1e-15);
        assert_eq!(q.boundary, Some(Boundary::AlwaysExercised));
        let q = bond_call_price(&call(1.0), &fast_decay(), &flat()).unwrap();
        assert_eq!(q.price, 0.0);
        assert_eq!(vega(&call(0.0), &fast_decay(), &flat()).unwrap(), 0.0);
    }

    #[test]
    fn critical_value_reprices_to_strike() {
        let c = flat();
        for (model, k) in [(fast_decay(), 0.93), (ModelSpec::brownian(PhiFunction::Linear, 0.3).unwrap(), 0.9)] {
            let q = bond_call_price(&call(k), &model, &c).unwrap();
            let xi = q.critical_xi.unwrap();
            let v = ConditionalDensityView::new(&c, &model, MarketState::brownian(&model, 2.0, xi).unwrap()).unwrap();
            assert!((v.bond_price(5.0).unwrap() - k).abs() < 1e-10);
        }
        // closed-form check of the root for the flat linear case
        let k = (-0.08f64).exp();
        let q = bond_call_price(&BondOptionSpec::new(1.0, 5.0, k).unwrap(), &ModelSpec::brownian(PhiFunction::Linear, 0.3).unwrap(), &c)
            .unwrap();
        let p = crate::pricer::closed_form_bond_flat_linear(0.02, 0.3, 1.0, q.critical_xi.unwrap(), 5.0).unwrap();
        assert!((p - k).abs() < 1e-10);
    }

    #[test]
    fn two_evaluation_paths_agree() {
        let c = flat();
        let quad = QuadratureSpec::default();
        // Linear phi with a large rate puts the B-measure mass many standard
        // deviations out in eta, beyond any Gaussian rule; keep it moderate.
        for model in [
            fast_decay(),
            ModelSpec::brownian(PhiFunction::Linear, 0.03).unwrap(),
            ModelSpec::brownian(PhiFunction::exp_decay(0.05, Sign::Negative).unwrap(), 0.25).unwrap(),
        ] {
            for k in [0.9, 0.95] {
                let a = bond_call_price(&call(k), &model, &c).unwrap().price;
                let b = bond_call_price_gaussian(&call(k), &model, &c, &quad).unwrap();
                assert!((a - b).abs() < 1e-8, "{model:?} K={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn strike_monotone_convex_and_above_intrinsic() {
        let c = flat();
        let ks: Vec<f64> = (0..=20).map(|i| 0.85 + 0.005 * i as f64).collect();
        let cs: Vec<f64> = ks.iter().map(|&k| bond_call_price(&call(k), &fast_decay(), &c).unwrap().price).collect();
        for w in cs.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for w in cs.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-10);
        }
        for (k, cv) in ks.iter().zip(&cs) {
            assert!(*cv >= ((-0.1f64).exp() - k * (-0.04f64).exp()).max(0.0) - 1e-12);
        }
    }

    #[test]
    fn deterministic_rate_options() {
        let m = ModelSpec::brownian(PhiFunction::Linear, 0.0).unwrap();
        let c = flat();
        let intrinsic = (-0.1f64).exp() - 0.9 * (-0.04f64).exp();
        assert!((bond_call_price(&call(0.9), &m, &c).unwrap().price - intrinsic).abs() < 1e-15);
        assert_eq!(bond_call_price(&call(0.97), &m, &c).unwrap().price, 0.0);
    }

    #[test]
    fn swaption_boundaries() {
        let c = flat();
        let s = SwaptionSpec::new(1.0, vec![2.0, 3.0, 4.0, 5.0], 0.0).unwrap();
        let v = swaption_price(&s, &fast_decay(), &c).unwrap();
        let exact = (-0.02f64).exp() - (-0.1f64).exp();
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
        assert!((exact - 0.075_361_255).abs() < 1e-8);
        let s = SwaptionSpec::new(1.0, vec![5.0], 10.0).unwrap();
        assert!(swaption_price(&s, &fast_decay(), &c).unwrap().abs() < 1e-9);
    }

    #[test]
    fn time_dependent_rate_matches_constant() {
        let c = flat();
        let phi = PhiFunction::exp_decay(0.05, Sign::Positive).unwrap();
        let td = ModelSpec::new(phi, InformationProcess::BrownianTimeDep { schedule: RateSchedule::constant(0.25).unwrap() })
            .unwrap();
        let a = bond_call_price(&call(0.93), &fast_decay(), &c).unwrap().price;
        let b = bond_call_price(&call(0.93), &td, &c).unwrap().price;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn hybrid_unit_payoff_is_bond() {
        let c = flat();
        let m = fast_decay();
        let state = MarketState::brownian(&m, 1.0, 0.3).unwrap();
        let plan = SimulationPlan { antithetic: true, quad: QuadratureSpec::coarse(), ..SimulationPlan::new(4000, 1.0, 1.0, 5) };
        let e = hybrid_price(|_| Ok(1.0), 4.0, &m, &c, &state, &plan).unwrap();
        let p = ConditionalDensityView::new(&c, &m, state).unwrap().bond_price(4.0).unwrap();
        assert!(e.within(p, 3.0), "{e:?} vs {p}");
        let e3 = hybrid_price(|_| Ok(3.0), 4.0, &m, &c, &state, &plan).unwrap();
        assert!((e3.mean - 3.0 * e.mean).abs() < 1e-12);
    }

    #[test]
    fn hybrid_call_matches_closed_form() {
        let c = flat();
        let m = fast_decay();
        let plan = SimulationPlan { antithetic: true, quad: QuadratureSpec::coarse(), ..SimulationPlan::new(20_000, 1.0, 1.0, 6) };
        let state = MarketState::initial(&m);
        let k = 0.93;
        let e = hybrid_price(|v| Ok((v.bond_price(5.0)? - k).max(0.0)), 2.0, &m, &c, &state, &plan).unwrap();
        let exact = bond_call_price(&call(k), &m, &c).unwrap().price;
        assert!(e.within(exact, 3.0), "{e:?} vs {exact}");
    }

    #[test]
    fn implied_sigma_round_trip() {
        let c = flat();
        let k = 0.93;
        let p = bond_call_price(&call(k), &fast_decay(), &c).unwrap().price;
        let s = implied_sigma(&call(k), p, &fast_decay(), &c).unwrap();
        assert!((s - 0.25).abs() < 1e-8, "{s}");
        let err = implied_sigma(&call(k), (-0.1f64).exp(), &fast_decay(), &c).unwrap_err();
        assert!(matches!(err, Error::PriceRange { .. }));
        let err = implied_sigma(&call(0.9), 0.0, &fast_decay(), &c).unwrap_err();
        assert!(matches!(err, Error::PriceRange { .. }));
    }

    #[test]
    fn gamma_model_rejected() {
        let m = ModelSpec::gamma(PhiFunction::Linear, 0.1).unwrap();
        assert!(matches!(bond_call_price(&call(0.9), &m, &flat()), Err(Error::UnsupportedModel(_))));
    }
}
