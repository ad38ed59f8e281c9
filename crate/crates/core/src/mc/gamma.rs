use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::{block_rng, open_uniform, par_blocks, run_path, Grid, Moments, PathSample, SimulationPlan};
use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use crate::model::{draw_crisis_time, InformationProcess, ModelSpec};

/// Paths of `xi_t = X gamma_t` with bond prices along them. Antithetic
/// pairing has no gamma analogue and is ignored.
pub fn simulate_gamma(plan: &SimulationPlan, model: &ModelSpec, curve: &DiscountCurve) -> Result<Vec<PathSample>> {
    plan.validate()?;
    let m = match model.process {
        InformationProcess::Gamma { m } => m,
        _ => return Err(Error::UnsupportedModel("simulate_gamma needs the gamma model")),
    };
    let grid = Grid { dt: plan.dt, n_steps: plan.n_steps(), record_every: plan.record_every };
    let increment = Gamma::new(m * plan.dt, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    par_blocks(plan.n_paths, |block, count| {
        let mut rng = block_rng(plan.seed, block);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let x = draw_crisis_time(curve, open_uniform(&mut rng))?;
            let gs: Vec<f64> = (0..grid.n_steps).map(|_| increment.sample(&mut rng)).collect();
            let mut it = gs.into_iter();
            out.push(run_path(model, curve, plan, grid, Some(x), || it.next().unwrap())?);
        }
        Ok(out)
    })
}

/// Self-normalised importance-sampling estimate of a gamma-model bond price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightOracle {
    pub price: f64,
    /// Delta-method standard error of the ratio.
    pub se: f64,
    /// Kish effective sample size of the weights on `{X >= t}`.
    pub ess: f64,
    /// Set when `ess < 100`: the estimate rests on a handful of draws.
    pub degenerate: bool,
}

/// `P_{tT} ≈ Σ_{X_i >= T} w_i / Σ_{X_i >= t} w_i` with `X_i` drawn from the
/// curve and `w_i = X_i^{-mt} exp(-xi / X_i)`.
pub fn gamma_weight_oracle(
    curve: &DiscountCurve,
    m: f64,
    t: f64,
    xi: f64,
    maturity: f64,
    n: usize,
    seed: u64,
) -> Result<WeightOracle> {
    if !(m > 0.0 && t >= 0.0 && xi >= 0.0 && maturity >= t) || n < 2 {
        return Err(Error::domain("weight oracle needs m > 0, xi >= 0, maturity >= t >= 0 and n >= 2"));
    }
    let mt = m * t;
    let log_w = |x: f64| {
        let a = if mt == 0.0 { 0.0 } else { -mt * x.ln() };
        let b = if xi == 0.0 { 0.0 } else { -xi / x };
        a + b
    };
    // log-weight maximum over [t, ∞) for rescaling
    let shift = if mt == 0.0 { 0.0 } else { log_w((xi / mt).max(t)) };
    let draws = par_blocks(n, |block, count| {
        let mut rng = block_rng(seed, block);
        (0..count)
            .map(|_| {
                let x = draw_crisis_time(curve, open_uniform(&mut rng))?;
                let w = if x >= t { (log_w(x) - shift).exp() } else { 0.0 };
                Ok((w, if x >= maturity { w } else { 0.0 }))
            })
            .collect()
    })?;
    let (mut sa, mut sb, mut sbb) = (0.0, 0.0, 0.0);
    for &(b, a) in &draws {
        sa += a;
        sb += b;
        sbb += b * b;
    }
    if !(sb > 0.0) {
        return Err(Error::InsufficientPaths { alive: 0, required: 1 });
    }
    let price = sa / sb;
    let mut resid = Moments::default();
    for &(b, a) in &draws {
        resid.push(a - price * b);
    }
    let mean_b = sb / n as f64;
    let ess = sb * sb / sbb;
    Ok(WeightOracle { price, se: resid.estimate().se / mean_b, ess, degenerate: ess < 100.0 })
}
