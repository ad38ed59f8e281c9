//! Path simulation and the statistical oracles built on it.
//!
//! Paths are generated in fixed-size blocks, each with its own ChaCha
//! stream keyed by `(seed, block)`, so results do not depend on how rayon
//! schedules the blocks.

mod diagnostics;
mod gamma;
mod options;

pub use diagnostics::{
    innovations_diagnostics, martingale_diagnostics, measure_change_expectation, residual_convergence,
    InnovationsReport, MartingaleReport, ResidualConvergence,
};
pub use gamma::{gamma_weight_oracle, simulate_gamma, WeightOracle};
pub use options::{forward_vol_regression, price_option_mc, price_strikes_mc, VolRegression};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use crate::model::{draw_crisis_time, evolve_with_drift_scale, InformationProcess, MarketState, ModelSpec, Observation};
use crate::pricer::ConditionalDensityView;
use crate::quad::QuadratureSpec;

/// Paths per RNG stream.
pub(crate) const BLOCK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    /// Crisis time drawn from the curve; information drifts with `phi(X)`.
    Q,
    /// Driftless information process.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub measure: Measure,
    pub antithetic: bool,
    /// Keep every `record_every`-th grid node (node 0 always kept).
    pub record_every: usize,
    /// Maturity of the bond recorded along paths.
    pub reference_maturity: f64,
    pub quad: QuadratureSpec,
    /// Multiplier on the information drift. Anything other than 1 corrupts
    /// the model; used as a negative control for the diagnostics.
    pub drift_scale: f64,
}

impl SimulationPlan {
    pub fn new(n_paths: usize, dt: f64, horizon: f64, seed: u64) -> Self {
        Self {
            n_paths,
            dt,
            horizon,
            seed,
            measure: Measure::Q,
            antithetic: false,
            record_every: 1,
            reference_maturity: horizon,
            quad: QuadratureSpec::coarse(),
            drift_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::domain("simulation needs at least one path"));
        }
        if !(self.dt > 0.0) || !(self.horizon >= self.dt) {
            return Err(Error::domain(format!("need dt > 0 and horizon >= dt, got dt={} horizon={}", self.dt, self.horizon)));
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every must be at least 1"));
        }
        if !(self.reference_maturity >= 0.0) {
            return Err(Error::domain("reference maturity must be >= 0"));
        }
        self.quad.validate()
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

/// Running mean and sum of squared deviations, mergeable across blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.n > 1 { (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt() } else { f64::NAN };
        Estimate { mean: self.mean, se, n: self.n }
    }
}

impl Estimate {
    pub fn from_samples(xs: impl IntoIterator<Item = f64>) -> Self {
        let mut m = Moments::default();
        for x in xs {
            m.push(x);
        }
        m.estimate()
    }

    /// Number of standard errors separating the mean from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.se == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target) / self.se
        }
    }

    pub fn within(&self, target: f64, n_se: f64) -> bool {
        self.z_score(target).abs() <= n_se
    }
}

pub(crate) fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub(crate) fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(Open01)
}

/// Runs `f(block, paths_in_block)` over all blocks in parallel and
/// concatenates the results in block order.
pub(crate) fn par_blocks<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<Vec<T>> + Sync,
{
    let n_blocks = n.div_ceil(BLOCK);
    let blocks: Vec<Vec<T>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| f(b, BLOCK.min(n - b * BLOCK)))
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

/// One recorded grid node. Accumulators run from time 0 and freeze when the
/// path dies; observables are NaN on dead nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathNode {
    pub t: f64,
    pub xi: f64,
    pub alive: bool,
    /// `P_{t,T*}`, NaN past the reference maturity.
    pub bond: f64,
    pub short_rate: f64,
    pub phi_hat: f64,
    /// `ln pi_t` from quadrature.
    pub ln_kernel: f64,
    /// Innovations process `W_t`.
    pub w: f64,
    /// `ln M_t` from left-point Itô sums.
    pub ln_m: f64,
    /// `∫_0^t r_s ds`, left-point.
    pub int_r: f64,
    /// `Σ ΔW²`
    pub qv: f64,
    /// `Σ ΔW_k ΔW_{k-1}`
    pub cross: f64,
    /// Cumulative bond-dynamics residual `Σ (ΔP/P - r Δ - sigma Sigma ΔW)`.
    pub residual: f64,
    /// Grid steps accumulated so far.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    /// Crisis time (Q measure only).
    pub x_draw: Option<f64>,
    pub nodes: Vec<PathNode>,
}

impl PathSample {
    pub fn node_at(&self, t: f64) -> Option<&PathNode> {
        self.nodes.iter().find(|n| (n.t - t).abs() < 1e-9 * t.max(1.0))
    }
}

/// Grid shared by a run: step, step count and recording stride.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Grid {
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
}

/// Simulates one path under the model, drawing information noise from
/// `noise`. `x` is the crisis time under Q and `None` under B.
pub(crate) fn run_path(
    model: &ModelSpec,
    curve: &DiscountCurve,
    plan: &SimulationPlan,
    grid: Grid,
    x: Option<f64>,
    mut noise: impl FnMut() -> f64,
) -> Result<PathSample> {
    let brownian = model.is_brownian();
    let t_ref = plan.reference_maturity;
    let mut state = MarketState::initial(model);
    let mut alive = true;
    let mut node = PathNode {
        t: 0.0,
        xi: 0.0,
        alive: true,
        bond: f64::NAN,
        short_rate: f64::NAN,
        phi_hat: f64::NAN,
        ln_kernel: 0.0,
        w: 0.0,
        ln_m: 0.0,
        int_r: 0.0,
        qv: 0.0,
        cross: 0.0,
        residual: 0.0,
        steps: 0,
    };
    let mut snap = ConditionalDensityView::with_quadrature(curve, model, state, plan.quad)?.snapshot(t_ref)?;
    fill(&mut node, &snap);
    let mut nodes = Vec::with_capacity(grid.n_steps / grid.record_every + 1);
    nodes.push(node);
    let mut prev_dw = 0.0;
    for k in 1..=grid.n_steps {
        let t = state.t;
        let sigma = model.sigma_at(t).unwrap_or(0.0);
        let (x_step, scale) = match x {
            Some(x) => (x, plan.drift_scale),
            None => (0.0, 0.0),
        };
        let live = MarketState { alive: true, ..state };
        let next = evolve_with_drift_scale(model, &live, x_step, grid.dt, noise(), scale)?;
        let dxi = next.xi() - state.xi();
        let still = alive && x.is_none_or(|x| x >= next.t);
        state = MarketState { alive: still, ..next };
        node.t = state.t;
        node.xi = state.xi();
        if alive && still {
            let new = ConditionalDensityView::with_quadrature(curve, model, state, plan.quad)?.snapshot(t_ref)?;
            if brownian {
                let dw = dxi - sigma * snap.phi_hat_t * grid.dt;
                node.w += dw;
                node.qv += dw * dw;
                node.cross += dw * prev_dw;
                prev_dw = dw;
                node.ln_m += -sigma * snap.phi_hat_t * dxi + 0.5 * sigma * sigma * snap.phi_hat_t * snap.phi_hat_t * grid.dt;
                if let (Some((p0, ph0)), Some((p1, _))) = (snap.bond, new.bond) {
                    let vol = ph0 - snap.phi_hat_t;
                    node.residual += (p1 - p0) / p0 - snap.short_rate * grid.dt - sigma * vol * dw;
                }
            }
            node.int_r += snap.short_rate * grid.dt;
            node.steps += 1;
            snap = new;
            fill(&mut node, &snap);
        } else if alive {
            node.alive = false;
            node.bond = f64::NAN;
            node.short_rate = f64::NAN;
            node.phi_hat = f64::NAN;
            node.ln_kernel = f64::NAN;
        }
        alive = still;
        if k % grid.record_every == 0 || k == grid.n_steps {
            nodes.push(node);
        }
    }
    Ok(PathSample { x_draw: x, nodes })
}

fn fill(node: &mut PathNode, snap: &crate::pricer::Snapshot) {
    node.bond = snap.bond.map_or(f64::NAN, |(p, _)| p);
    node.short_rate = snap.short_rate;
    node.phi_hat = snap.phi_hat_t;
    node.ln_kernel = snap.ln_kernel;
}

/// Simulates Brownian-model paths under the plan's measure.
///
/// Under Q each path draws `X` by inverse CDF and the information drifts
/// with `sigma_t phi(X)`. With antithetic sampling consecutive paths share
/// draws with reflected signs (`u -> 1 - u`, `z -> -z`).
pub fn simulate_q(plan: &SimulationPlan, model: &ModelSpec, curve: &DiscountCurve) -> Result<Vec<PathSample>> {
    plan.validate()?;
    model.validate()?;
    if matches!(model.process, InformationProcess::Gamma { .. }) {
        return Err(Error::UnsupportedModel("use simulate_gamma for the gamma model"));
    }
    let grid = Grid { dt: plan.dt, n_steps: plan.n_steps(), record_every: plan.record_every };
    par_blocks(plan.n_paths, |block, count| {
        let mut rng = block_rng(plan.seed, block);
        let mut out = Vec::with_capacity(count);
        let mut i = 0;
        while i < count {
            let u = open_uniform(&mut rng);
            let zs: Vec<f64> = (0..grid.n_steps).map(|_| normal(&mut rng)).collect();
            let pair = if plan.antithetic && i + 1 < count { 2 } else { 1 };
            for a in 0..pair {
                let sgn = if a == 0 { 1.0 } else { -1.0 };
                let x = match plan.measure {
                    Measure::Q => Some(draw_crisis_time(curve, if a == 0 { u } else { 1.0 - u })?),
                    Measure::B => None,
                };
                let mut it = zs.iter();
                out.push(run_path(model, curve, plan, grid, x, || sgn * it.next().unwrap())?);
            }
            i += pair;
        }
        Ok(out)
    })
}

/// Observation after `dt` more time with information increment `dxi`,
/// using the rate at the left end of the step.
pub(crate) fn advance_observation(model: &ModelSpec, state: &MarketState, dxi: f64, dt: f64) -> Result<MarketState> {
    let t = state.t + dt;
    match state.obs {
        Observation::Brownian { xi, eta, tau } => {
            let s = model.sigma_at(state.t).ok_or(Error::UnsupportedModel("Brownian model required"))?;
            MarketState::from_sufficient(t, xi + dxi, eta + s * dxi, tau + s * s * dt)
        }
        Observation::Gamma { xi } => MarketState::gamma(t, xi + dxi),
    }
}
