use std::fmt::Write as _;
use std::path::PathBuf;

use inforate::deriv::{bond_call_price, bond_call_price_gaussian, implied_sigma, swaption_price};
use inforate::mc::{innovations_diagnostics, martingale_diagnostics, price_option_mc, simulate_gamma, simulate_q};
use inforate::{
    BondOptionSpec, ConditionalDensityView, DiscountCurve, Estimate, MarketState, Measure, PathSample,
    QuadratureSpec, SimulationPlan, SwaptionSpec,
};

use crate::format::{sig, Cell, Table};
use crate::scenario::{Instrument, MeasureName, Scenario};
use crate::CliError;

/// Everything a command needs once flags have been merged into the scenario.
pub struct Context {
    pub scenario: Scenario,
    pub curve: DiscountCurve,
    pub out_dir: PathBuf,
    pub precision: usize,
    pub seed: u64,
}

impl Context {
    pub fn new(scenario: Scenario, seed: Option<u64>, out: Option<PathBuf>, precision: Option<usize>) -> Result<Self, CliError> {
        let curve = scenario.build_curve()?;
        let precision = precision.unwrap_or(scenario.output.precision);
        if precision == 0 || precision > 17 {
            return Err(CliError::Scenario("precision must be between 1 and 17".into()));
        }
        let out_dir = out.unwrap_or_else(|| scenario.output.dir.clone());
        std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
        Ok(Self { seed: seed.unwrap_or(scenario.seed), scenario, curve, out_dir, precision })
    }

    fn write(&self, name: &str, table: &Table) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        table.write(&path, self.precision)?;
        Ok(path)
    }
}

/// Library failures during a run are numeric unless they stem from inputs
/// the scenario could have avoided.
fn numeric(e: inforate::Error) -> CliError {
    use inforate::Error as E;
    match e {
        E::Domain(_) | E::InvalidCurve(_) | E::UnsupportedModel(_) => CliError::Scenario(e.to_string()),
        _ => CliError::Numeric(e.to_string()),
    }
}

fn missing(block: &str) -> CliError {
    CliError::Scenario(format!("scenario has no run.{block} block"))
}

/// `(T, P_{0T}, f_{0T}, rho_0(T))` on the run grid.
pub fn curve(ctx: &Context) -> Result<String, CliError> {
    let grid = ctx.scenario.run.curve.as_ref().ok_or_else(|| missing("curve"))?.points()?;
    let mut t = Table::new(&["maturity", "discount", "forward", "density"]);
    for x in grid {
        let c = &ctx.curve;
        t.push(vec![
            x.into(),
            c.discount(x).map_err(numeric)?.into(),
            c.initial_forward_rate(x).map_err(numeric)?.into(),
            c.density(x).map_err(numeric)?.into(),
        ]);
    }
    let path = ctx.write("curve.csv", &t)?;
    Ok(format!("wrote {} rows to {}", t.len(), path.display()))
}

/// One row per recorded node of each path. Bond prices on dead paths are
/// reported as 0 and the short rate is left blank.
pub fn simulate(ctx: &Context) -> Result<String, CliError> {
    let block = ctx.scenario.run.simulate.as_ref().ok_or_else(|| missing("simulate"))?;
    let model = ctx.scenario.build_model()?;
    let plan = SimulationPlan {
        record_every: block.record_every,
        reference_maturity: block.maturity,
        measure: match block.measure {
            MeasureName::Q => Measure::Q,
            MeasureName::B => Measure::B,
        },
        ..SimulationPlan::new(block.paths, block.dt, block.horizon, ctx.seed)
    };
    plan.validate().map_err(numeric)?;
    let paths = if model.is_brownian() {
        simulate_q(&plan, &model, &ctx.curve)
    } else {
        if plan.measure == Measure::B {
            return Err(CliError::Scenario("the gamma model is simulated under Q only".into()));
        }
        simulate_gamma(&plan, &model, &ctx.curve)
    }
    .map_err(numeric)?;
    let table = path_table(&paths);
    let path = ctx.write("simulate.csv", &table)?;
    Ok(format!("wrote {} paths ({} rows) to {}", paths.len(), table.len(), path.display()))
}

fn path_table(paths: &[PathSample]) -> Table {
    let mut t = Table::new(&["path", "t", "xi", "bond", "short_rate", "alive"]);
    for (i, p) in paths.iter().enumerate() {
        for n in &p.nodes {
            let bond = if n.alive { Cell::from(finite(n.bond)) } else { Cell::Num(0.0) };
            let rate = if n.alive { Cell::from(finite(n.short_rate)) } else { Cell::Empty };
            t.push(vec![i.into(), n.t.into(), n.xi.into(), bond, rate, n.alive.into()]);
        }
    }
    t
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Prices with method tags; Monte Carlo rows carry a standard error.
pub fn price(ctx: &Context) -> Result<String, CliError> {
    let block = ctx.scenario.run.price.as_ref().ok_or_else(|| missing("price"))?;
    let model = ctx.scenario.build_model()?;
    let c = &ctx.curve;
    let mut t = Table::new(&["instrument", "t", "maturity", "strike", "method", "value", "se"]);
    let mut report = String::new();
    for inst in &block.instruments {
        match inst {
            Instrument::Bond { t: at, xi, maturity } => {
                let state = if *at == 0.0 {
                    MarketState::initial(&model)
                } else if model.is_brownian() {
                    MarketState::brownian(&model, *at, *xi).map_err(numeric)?
                } else {
                    MarketState::gamma(*at, *xi).map_err(numeric)?
                };
                let v = ConditionalDensityView::new(c, &model, state).map_err(numeric)?;
                let p = v.bond_price(*maturity).map_err(numeric)?;
                t.push(vec!["bond".into(), (*at).into(), (*maturity).into(), Cell::Empty, "quadrature".into(), p.into(), Cell::Empty]);
            }
            Instrument::Call { option_maturity, bond_maturity, strike, mc_paths } => {
                let spec = BondOptionSpec::new(*option_maturity, *bond_maturity, *strike).map_err(numeric)?;
                let q = bond_call_price(&spec, &model, c).map_err(numeric)?;
                let g = bond_call_price_gaussian(&spec, &model, c, &QuadratureSpec::default()).map_err(numeric)?;
                let head = |method: &str, v: f64, se: Option<f64>| -> Vec<Cell> {
                    vec![
                        "call".into(),
                        (*option_maturity).into(),
                        (*bond_maturity).into(),
                        (*strike).into(),
                        method.into(),
                        v.into(),
                        se.into(),
                    ]
                };
                t.push(head("analytic", q.price, None));
                t.push(head("quadrature", g, None));
                if *mc_paths > 0 {
                    let plan = SimulationPlan {
                        measure: Measure::B,
                        antithetic: true,
                        ..SimulationPlan::new(*mc_paths, 1.0, 1.0, ctx.seed)
                    };
                    let e: Estimate = price_option_mc(&spec, &model, c, &plan).map_err(numeric)?;
                    t.push(head("mc", e.mean, Some(e.se)));
                    let _ = writeln!(
                        report,
                        "call K={}: analytic {} mc {} +- {} (z = {})",
                        sig(*strike, ctx.precision),
                        sig(q.price, ctx.precision),
                        sig(e.mean, ctx.precision),
                        sig(e.se, 3),
                        sig(e.z_score(q.price), 3)
                    );
                }
            }
            Instrument::Swaption { option_maturity, payment_dates, strike } => {
                let spec = SwaptionSpec::new(*option_maturity, payment_dates.clone(), *strike).map_err(numeric)?;
                let v = swaption_price(&spec, &model, c).map_err(numeric)?;
                let last = *payment_dates.last().expect("validated non-empty");
                t.push(vec![
                    "swaption".into(),
                    (*option_maturity).into(),
                    last.into(),
                    (*strike).into(),
                    "quadrature".into(),
                    v.into(),
                    Cell::Empty,
                ]);
            }
            Instrument::ImpliedSigma { option_maturity, bond_maturity, strike, price } => {
                let spec = BondOptionSpec::new(*option_maturity, *bond_maturity, *strike).map_err(numeric)?;
                let s = implied_sigma(&spec, *price, &model, c).map_err(numeric)?;
                t.push(vec![
                    "implied_sigma".into(),
                    (*option_maturity).into(),
                    (*bond_maturity).into(),
                    (*strike).into(),
                    "analytic".into(),
                    s.into(),
                    Cell::Empty,
                ]);
            }
        }
    }
    let path = ctx.write("price.csv", &t)?;
    let _ = write!(report, "wrote {} rows to {}", t.len(), path.display());
    Ok(report)
}

struct Check {
    name: &'static str,
    t: f64,
    estimate: Estimate,
    target: f64,
    tolerance: String,
    pass: bool,
}

/// Martingale, measure-change and innovations checks on simulated Q paths.
/// Returns the summary and whether every check passed.
pub fn diagnose(ctx: &Context) -> Result<(String, bool), CliError> {
    let block = ctx.scenario.run.diagnose.as_ref().ok_or_else(|| missing("diagnose"))?;
    let model = ctx.scenario.build_model()?;
    if !model.is_brownian() {
        return Err(CliError::Scenario("diagnostics run on Brownian models".into()));
    }
    let horizon = block.times.iter().copied().fold(f64::NAN, f64::max);
    if block.times.is_empty() || !(horizon > 0.0) || block.times.iter().any(|&t| !(t > 0.0)) {
        return Err(CliError::Scenario("diagnose.times must be positive and non-empty".into()));
    }
    let plan = SimulationPlan {
        record_every: block.record_every,
        reference_maturity: block.maturity,
        drift_scale: block.drift_scale,
        ..SimulationPlan::new(block.paths, block.dt, horizon, ctx.seed)
    };
    plan.validate().map_err(numeric)?;
    let paths = simulate_q(&plan, &model, &ctx.curve).map_err(numeric)?;
    let n_se = block.n_se;
    // the absolute floor keeps exactly-zero standard errors from failing on rounding
    let near = |e: &Estimate, target: f64| (e.mean - target).abs() <= n_se * e.se + 1e-12;
    let mut checks = Vec::new();
    for &t in &block.times {
        let m = martingale_diagnostics(&paths, t).map_err(numeric)?;
        let i = innovations_diagnostics(&paths, t).map_err(numeric)?;
        let se_tol = format!("{n_se} se");
        checks.push(Check {
            name: "discounted_bond",
            t,
            estimate: m.discounted_bond,
            target: m.target,
            tolerance: se_tol.clone(),
            pass: near(&m.discounted_bond, m.target),
        });
        checks.push(Check {
            name: "density_mean",
            t,
            estimate: m.density,
            target: 1.0,
            tolerance: se_tol.clone(),
            pass: near(&m.density, 1.0),
        });
        checks.push(Check {
            name: "qv_ratio",
            t,
            estimate: i.qv_ratio,
            target: 1.0,
            tolerance: format!("{}", block.qv_tol),
            pass: (i.qv_ratio.mean - 1.0).abs() <= block.qv_tol,
        });
        checks.push(Check {
            name: "innovation_mean",
            t,
            estimate: i.increment_mean,
            target: 0.0,
            tolerance: se_tol.clone(),
            pass: near(&i.increment_mean, 0.0),
        });
        checks.push(Check {
            name: "lag1_autocorr",
            t,
            estimate: i.lag1_autocorr,
            target: 0.0,
            tolerance: se_tol,
            pass: near(&i.lag1_autocorr, 0.0),
        });
    }
    let p = ctx.precision;
    let mut table = Table::new(&["check", "t", "estimate", "se", "target", "tolerance", "pass"]);
    let mut text = String::new();
    for c in &checks {
        table.push(vec![
            c.name.into(),
            c.t.into(),
            c.estimate.mean.into(),
            c.estimate.se.into(),
            c.target.into(),
            c.tolerance.clone().into(),
            c.pass.into(),
        ]);
        let _ = writeln!(
            text,
            "[{}] {} t={}: {} (se {}) vs {} within {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            sig(c.t, p),
            sig(c.estimate.mean, p),
            sig(c.estimate.se, 3),
            sig(c.target, p),
            c.tolerance
        );
    }
    let all = checks.iter().all(|c| c.pass);
    let passed = checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(text, "{passed}/{} checks passed", checks.len());
    std::fs::write(ctx.out_dir.join("diagnose.txt"), &text).map_err(|e| CliError::Io(e.to_string()))?;
    ctx.write("diagnose.csv", &table)?;
    Ok((text.trim_end().to_string(), all))
}
