use serde::{Deserialize, Serialize};

use super::{advance_observation, block_rng, normal, par_blocks, Estimate, Measure, Moments, SimulationPlan};
use crate::curve::DiscountCurve;
use crate::deriv::BondOptionSpec;
use crate::error::{Error, Result};
use crate::model::{MarketState, ModelSpec};
use crate::pricer::ConditionalDensityView;
use crate::quad::{QuadratureSpec, TailRule};

const RULE_NODES: usize = 32;
const RULE_PIECES: usize = 4;

/// Call on a discount bond by Monte Carlo under the Brownian measure:
/// `E^B[(∫_T^∞ p_t - K ∫_t^∞ p_t)^+]` with the information drawn directly
/// from its Gaussian law at the option maturity.
pub fn price_option_mc(spec: &BondOptionSpec, model: &ModelSpec, curve: &DiscountCurve, plan: &SimulationPlan) -> Result<Estimate> {
    let v = price_strikes_mc(spec.option_maturity, spec.bond_maturity, &[spec.strike], model, curve, plan)?;
    Ok(v[0])
}

/// Several strikes priced off the same draws.
pub fn price_strikes_mc(
    option_maturity: f64,
    bond_maturity: f64,
    strikes: &[f64],
    model: &ModelSpec,
    curve: &DiscountCurve,
    plan: &SimulationPlan,
) -> Result<Vec<Estimate>> {
    BondOptionSpec::new(option_maturity, bond_maturity, 0.0)?;
    if plan.measure != Measure::B {
        return Err(Error::domain("option Monte Carlo runs under the B measure"));
    }
    if plan.n_paths == 0 || strikes.iter().any(|k| !(*k >= 0.0)) {
        return Err(Error::domain("need at least one draw and nonnegative strikes"));
    }
    let tau = model
        .tau_at(option_maturity)
        .ok_or(Error::UnsupportedModel("option Monte Carlo needs a Brownian model"))?;
    if tau == 0.0 {
        let (pt, pmat) = (curve.discount(option_maturity)?, curve.discount(bond_maturity)?);
        return Ok(strikes
            .iter()
            .map(|k| Estimate { mean: (pmat - k * pt).max(0.0), se: 0.0, n: plan.n_paths })
            .collect());
    }
    let rule = TailRule::new(curve, &[option_maturity, bond_maturity], RULE_NODES, RULE_PIECES)?;
    let phis: Vec<f64> = rule.nodes().iter().map(|&x| model.phi.value(x)).collect();
    let sd = tau.sqrt();
    let payoffs = |eta: f64, buf: &mut Vec<f64>, out: &mut [f64]| {
        buf.clear();
        buf.extend(phis.iter().map(|&y| y * eta - 0.5 * y * y * tau));
        let shift = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in buf.iter_mut() {
            *v = (*v - shift).exp();
        }
        let m = rule.integrate_values(buf);
        for (o, k) in out.iter_mut().zip(strikes) {
            let d = m[1] - k * m[0];
            *o = if d > 0.0 { (d.ln() + shift).exp() } else { 0.0 };
        }
    };
    let n = plan.n_paths;
    let blocks = par_blocks(n, |block, count| {
        let mut rng = block_rng(plan.seed, block);
        let mut acc = vec![Moments::default(); strikes.len()];
        let (mut buf, mut a, mut b) = (Vec::new(), vec![0.0; strikes.len()], vec![0.0; strikes.len()]);
        for _ in 0..count {
            let eta = sd * normal(&mut rng);
            payoffs(eta, &mut buf, &mut a);
            if plan.antithetic {
                payoffs(-eta, &mut buf, &mut b);
                for i in 0..strikes.len() {
                    acc[i].push(0.5 * (a[i] + b[i]));
                }
            } else {
                for i in 0..strikes.len() {
                    acc[i].push(a[i]);
                }
            }
        }
        Ok(vec![acc])
    })?;
    let mut total = vec![Moments::default(); strikes.len()];
    for acc in &blocks {
        for (t, m) in total.iter_mut().zip(acc) {
            t.merge(m);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolRegression {
    /// Regression slope of the one-step forward-rate change on `ΔW`.
    pub slope: Estimate,
    /// `sigma f_{tT} (phi(T) - Phi_hat_{tT})` at the branching state.
    pub analytic: f64,
}

/// Forward-rate volatility by regression across one-step continuations of
/// a state. Each continuation moves the information by
/// `sigma Phi_hat_tt dt + ΔW`; antithetic pairs cancel the even-order terms
/// of the Itô expansion so the slope isolates the diffusion coefficient.
#[allow(clippy::too_many_arguments)]
pub fn forward_vol_regression(
    model: &ModelSpec,
    curve: &DiscountCurve,
    state: &MarketState,
    maturity: f64,
    dt: f64,
    n_pairs: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<VolRegression> {
    if !(dt > 0.0) || n_pairs < 2 || !(maturity > state.t + dt) {
        return Err(Error::domain("need dt > 0, two or more pairs and maturity beyond t + dt"));
    }
    let view = ConditionalDensityView::with_quadrature(curve, model, *state, *quad)?;
    let analytic = view.forward_rate_volatility(maturity)?;
    let sigma = model.sigma_at(state.t).ok_or(Error::UnsupportedModel("Brownian model required"))?;
    let drift = sigma * view.phi_hat(state.t)? * dt;
    let forward = |dw: f64| -> Result<f64> {
        let next = advance_observation(model, state, drift + dw, dt)?;
        ConditionalDensityView::with_quadrature(curve, model, next, *quad)?.forward_rate(maturity)
    };
    let pairs = par_blocks(n_pairs, |block, count| {
        let mut rng = block_rng(seed, block);
        (0..count)
            .map(|_| {
                let dw = dt.sqrt() * normal(&mut rng);
                Ok((dw, 0.5 * (forward(dw)? - forward(-dw)?)))
            })
            .collect()
    })?;
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let slope = sxy / sxx;
    let rss: f64 = pairs.iter().map(|p| (p.1 - slope * p.0).powi(2)).sum();
    let se = (rss / (n_pairs - 1) as f64 / sxx).sqrt();
    Ok(VolRegression { slope: Estimate { mean: slope, se, n: n_pairs }, analytic })
}
