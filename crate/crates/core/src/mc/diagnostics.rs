//! Statistical checks on simulated Q paths.
//!
//! A path simulated with a fixed crisis time only represents the market
//! measure on the survival set, and the money-market account has to be
//! undone there. For any functional `F` of the information up to `t`,
//!
//! ```text
//! E^Q[1{X >= t} F] = E^B[pi_t F],   dQ/dB|_t = pi_t exp(∫_0^t r ds)
//! ```
//!
//! so expectations under the pricing measure are survival-weighted sample
//! means with weight `1{X >= t} exp(∫_0^t r ds)`.

use serde::{Deserialize, Serialize};

use super::{block_rng, normal, open_uniform, par_blocks, run_path, Estimate, Grid, Measure, PathNode, PathSample, SimulationPlan};
use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use crate::model::{draw_crisis_time, ModelSpec};

const MIN_SURVIVORS: usize = 100;

fn nodes_at(samples: &[PathSample], t: f64) -> Result<Vec<&PathNode>> {
    samples
        .iter()
        .map(|p| p.node_at(t).ok_or_else(|| Error::domain(format!("no recorded node at t={t}"))))
        .collect()
}

fn survivors<'a>(nodes: &[&'a PathNode]) -> Result<Vec<&'a PathNode>> {
    let alive: Vec<&PathNode> = nodes.iter().copied().filter(|n| n.alive).collect();
    if alive.len() < MIN_SURVIVORS {
        return Err(Error::InsufficientPaths { alive: alive.len(), required: MIN_SURVIVORS });
    }
    Ok(alive)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationsReport {
    pub t: f64,
    pub survivors: usize,
    /// Realised quadratic variation over `[0, t]` divided by `t`.
    pub qv_ratio: Estimate,
    /// Pooled increment mean.
    pub increment_mean: Estimate,
    /// Pooled increment variance divided by the step.
    pub increment_var_ratio: Estimate,
    pub lag1_autocorr: Estimate,
}

impl InnovationsReport {
    pub fn passes(&self, qv_tol: f64, n_se: f64) -> bool {
        (self.qv_ratio.mean - 1.0).abs() <= qv_tol
            && self.increment_mean.within(0.0, n_se)
            && self.lag1_autocorr.within(0.0, n_se)
    }
}

/// Checks that the innovations process is a standard Brownian motion on the
/// paths that survive to `t`.
pub fn innovations_diagnostics(samples: &[PathSample], t: f64) -> Result<InnovationsReport> {
    let alive = survivors(&nodes_at(samples, t)?)?;
    let steps: usize = alive.iter().map(|n| n.steps).sum();
    if steps == 0 {
        return Err(Error::domain("no increments before the diagnostic time"));
    }
    let dt = t / alive[0].steps as f64;
    let total = steps as f64;
    let sum_w: f64 = alive.iter().map(|n| n.w).sum();
    let sum_qv: f64 = alive.iter().map(|n| n.qv).sum();
    let sum_cross: f64 = alive.iter().map(|n| n.cross).sum();
    let mean = sum_w / total;
    let var = sum_qv / total - mean * mean;
    Ok(InnovationsReport {
        t,
        survivors: alive.len(),
        qv_ratio: Estimate::from_samples(alive.iter().map(|n| n.qv / t)),
        increment_mean: Estimate { mean, se: (var / total).sqrt(), n: steps },
        increment_var_ratio: Estimate { mean: var / dt, se: (2.0 / total).sqrt() * var / dt, n: steps },
        lag1_autocorr: Estimate { mean: sum_cross / sum_qv, se: 1.0 / total.sqrt(), n: steps },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub t: f64,
    pub survivors: usize,
    /// `P_{0,T*}`, the value the discounted bond must keep in expectation.
    pub target: f64,
    /// Pricing-measure mean of `exp(-∫r) P_{t,T*}`.
    pub discounted_bond: Estimate,
    /// Pricing-measure mean of `M_t`; must be 1.
    pub density: Estimate,
    /// Mean of the survival weight itself; must be 1.
    pub weight: Estimate,
    /// Drift of the discounted bond per unit time.
    pub drift: Estimate,
    /// Cumulative bond-dynamics residual on survivors.
    pub residual: Estimate,
    /// Sample variance of the cumulative residual.
    pub residual_var: f64,
    /// Largest `|ln pi_t + ∫r + ln M_t|` on survivors.
    pub kernel_identity_error: f64,
}

impl MartingaleReport {
    pub fn passes(&self, n_se: f64) -> bool {
        self.discounted_bond.within(self.target, n_se) && self.density.within(1.0, n_se)
    }
}

/// Martingale checks at time `t` for the bond recorded along the paths.
pub fn martingale_diagnostics(samples: &[PathSample], t: f64) -> Result<MartingaleReport> {
    let nodes = nodes_at(samples, t)?;
    let alive = survivors(&nodes)?;
    let target = samples[0].nodes[0].bond;
    if !target.is_finite() {
        return Err(Error::domain("paths carry no reference bond"));
    }
    if !alive[0].bond.is_finite() {
        return Err(Error::domain(format!("reference bond has matured before t={t}")));
    }
    let weighted = |f: &dyn Fn(&PathNode) -> f64| Estimate::from_samples(nodes.iter().map(|n| if n.alive { f(n) } else { 0.0 }));
    let residual = Estimate::from_samples(alive.iter().map(|n| n.residual));
    let residual_var = residual.se * residual.se * residual.n as f64;
    Ok(MartingaleReport {
        t,
        survivors: alive.len(),
        target,
        discounted_bond: weighted(&|n| n.bond),
        density: weighted(&|n| (n.int_r + n.ln_m).exp()),
        weight: weighted(&|n| n.int_r.exp()),
        drift: weighted(&|n| (n.bond - target) / t),
        residual,
        residual_var,
        kernel_identity_error: alive.iter().map(|n| (n.ln_kernel + n.int_r + n.ln_m).abs()).fold(0.0, f64::max),
    })
}

/// `E^B[F]` estimated from Q paths as `E^Q[1{X >= t} exp(∫r) M_t F]`.
pub fn measure_change_expectation(samples: &[PathSample], t: f64, f: impl Fn(&PathNode) -> f64) -> Result<Estimate> {
    let nodes = nodes_at(samples, t)?;
    survivors(&nodes)?;
    Ok(Estimate::from_samples(nodes.iter().map(|n| if n.alive { (n.int_r + n.ln_m).exp() * f(n) } else { 0.0 })))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualConvergence {
    pub t: f64,
    pub survivors: usize,
    pub var_coarse: f64,
    pub var_fine: f64,
    /// `var_coarse / var_fine`; close to 2 for a first-order residual.
    pub ratio: f64,
}

/// Variance of the cumulative bond-dynamics residual at `plan.horizon`, at
/// step `plan.dt` and at half that step, with the coarse noise built by
/// summing pairs of fine increments so both grids see the same Brownian
/// path.
pub fn residual_convergence(plan: &SimulationPlan, model: &ModelSpec, curve: &DiscountCurve) -> Result<ResidualConvergence> {
    plan.validate()?;
    if plan.measure != Measure::Q || !model.is_brownian() {
        return Err(Error::domain("residual convergence needs Q paths of a Brownian model"));
    }
    let t = plan.horizon;
    let n = plan.n_steps();
    let coarse = Grid { dt: plan.dt, n_steps: n, record_every: n };
    let fine = Grid { dt: 0.5 * plan.dt, n_steps: 2 * n, record_every: 2 * n };
    let pairs = par_blocks(plan.n_paths, |block, count| {
        let mut rng = block_rng(plan.seed, block);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let x = draw_crisis_time(curve, open_uniform(&mut rng))?;
            let z: Vec<f64> = (0..2 * n).map(|_| normal(&mut rng)).collect();
            let mut fz = z.iter();
            let f = run_path(model, curve, plan, fine, Some(x), || *fz.next().unwrap())?;
            let mut k = 0;
            let c = run_path(model, curve, plan, coarse, Some(x), || {
                let v = (z[k] + z[k + 1]) * std::f64::consts::FRAC_1_SQRT_2;
                k += 2;
                v
            })?;
            let (cl, fl) = (c.nodes.last().unwrap(), f.nodes.last().unwrap());
            out.push((cl.alive && fl.alive).then_some((cl.residual, fl.residual)));
        }
        Ok(out)
    })?;
    let alive: Vec<(f64, f64)> = pairs.into_iter().flatten().collect();
    if alive.len() < MIN_SURVIVORS {
        return Err(Error::InsufficientPaths { alive: alive.len(), required: MIN_SURVIVORS });
    }
    let var = |e: Estimate| e.se * e.se * e.n as f64;
    let var_coarse = var(Estimate::from_samples(alive.iter().map(|p| p.0)));
    let var_fine = var(Estimate::from_samples(alive.iter().map(|p| p.1)));
    Ok(ResidualConvergence { t, survivors: alive.len(), var_coarse, var_fine, ratio: var_coarse / var_fine })
}
