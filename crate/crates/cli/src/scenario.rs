//! Scenario files: one JSON document with `curve`, `model`, `run` and
//! `output` blocks plus a top-level `seed`.

use std::path::{Path, PathBuf};

use inforate::model::Sign;
use inforate::{DiscountCurve, InformationProcess, ModelSpec, PhiFunction, RateSchedule};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub curve: CurveBlock,
    #[serde(default)]
    pub model: Option<ModelBlock>,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveBlock {
    Flat {
        rate: f64,
        #[serde(default)]
        horizon: Option<f64>,
    },
    /// Rows of `[maturity, discount]`.
    Table {
        knots: Vec<(f64, f64)>,
        #[serde(default)]
        horizon: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub phi: PhiBlock,
    pub process: ProcessBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiBlock {
    Linear,
    ExpDecay {
        kappa: f64,
        #[serde(default = "positive")]
        sign: f64,
    },
    Reciprocal {
        x0: f64,
        #[serde(default = "positive")]
        sign: f64,
    },
}

fn positive() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessBlock {
    Brownian { sigma: f64 },
    /// Piecewise-constant rate: `[until, sigma]` rows, the last extending
    /// to infinity.
    BrownianPiecewise { pieces: Vec<(f64, f64)> },
    Gamma { m: f64 },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default)]
    pub curve: Option<GridBlock>,
    #[serde(default)]
    pub simulate: Option<SimulateBlock>,
    #[serde(default)]
    pub price: Option<PriceBlock>,
    #[serde(default)]
    pub diagnose: Option<DiagnoseBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridBlock {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step > 0.0 && self.stop >= self.start && self.start >= 0.0) {
            return Err(CliError::Scenario("grid needs 0 <= start <= stop and step > 0".into()));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
pub enum MeasureName {
    #[default]
    Q,
    B,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub paths: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Maturity `T*` of the bond recorded along each path.
    pub maturity: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub measure: MeasureName,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceBlock {
    pub instruments: Vec<Instrument>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Instrument {
    /// Discount bond at an observed state `(t, xi)`.
    Bond {
        #[serde(default)]
        t: f64,
        #[serde(default)]
        xi: f64,
        maturity: f64,
    },
    Call {
        option_maturity: f64,
        bond_maturity: f64,
        strike: f64,
        /// Monte Carlo draws for the cross-check; 0 skips it.
        #[serde(default)]
        mc_paths: usize,
    },
    Swaption {
        option_maturity: f64,
        payment_dates: Vec<f64>,
        strike: f64,
    },
    ImpliedSigma {
        option_maturity: f64,
        bond_maturity: f64,
        strike: f64,
        price: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseBlock {
    pub paths: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub maturity: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default = "default_qv_tol")]
    pub qv_tol: f64,
    #[serde(default = "default_n_se")]
    pub n_se: f64,
    /// Multiplier on the information drift; anything but 1 corrupts the
    /// model and should make the martingale checks fail.
    #[serde(default = "unit")]
    pub drift_scale: f64,
}

fn default_qv_tol() -> f64 {
    0.01
}

fn default_n_se() -> f64 {
    3.0
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: default_dir(), precision: default_precision() }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_precision() -> usize {
    12
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Self = serde_json::from_str(text).map_err(|e| CliError::Scenario(format!("invalid scenario: {e}")))?;
        if s.output.precision == 0 || s.output.precision > 17 {
            return Err(CliError::Scenario("precision must be between 1 and 17".into()));
        }
        Ok(s)
    }

    pub fn build_curve(&self) -> Result<DiscountCurve, CliError> {
        let (curve, horizon) = match &self.curve {
            CurveBlock::Flat { rate, horizon } => (DiscountCurve::flat(*rate), *horizon),
            CurveBlock::Table { knots, horizon } => (DiscountCurve::table(knots), *horizon),
        };
        let curve = curve.map_err(scenario)?;
        match horizon {
            Some(h) => curve.with_horizon(h).map_err(scenario),
            None => Ok(curve),
        }
    }

    pub fn build_model(&self) -> Result<ModelSpec, CliError> {
        let block = self.model.as_ref().ok_or_else(|| CliError::Scenario("scenario has no model block".into()))?;
        let sign = |v: f64| Sign::from_value(v).map_err(scenario);
        let phi = match block.phi {
            PhiBlock::Linear => PhiFunction::Linear,
            PhiBlock::ExpDecay { kappa, sign: s } => PhiFunction::exp_decay(kappa, sign(s)?).map_err(scenario)?,
            PhiBlock::Reciprocal { x0, sign: s } => PhiFunction::reciprocal(x0, sign(s)?).map_err(scenario)?,
        };
        let process = match &block.process {
            ProcessBlock::Brownian { sigma } => InformationProcess::BrownianConst { sigma: *sigma },
            ProcessBlock::BrownianPiecewise { pieces } => InformationProcess::BrownianTimeDep {
                schedule: RateSchedule::new(pieces.clone()).map_err(scenario)?,
            },
            ProcessBlock::Gamma { m } => InformationProcess::Gamma { m: *m },
        };
        ModelSpec::new(phi, process).map_err(scenario)
    }
}

fn scenario(e: inforate::Error) -> CliError {
    CliError::Scenario(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SLOW_DECAY: &str = r#"{
        "seed": 7,
        "curve": {"kind": "flat", "rate": 0.02},
        "model": {"phi": {"kind": "exp_decay", "kappa": 0.025}, "process": {"kind": "brownian", "sigma": 0.3}},
        "run": {"simulate": {"paths": 4, "dt": 0.01, "horizon": 5, "maturity": 5}},
        "output": {"dir": "out", "precision": 10}
    }"#;

    #[test]
    fn parses_information_path_scenario() {
        let s = Scenario::parse(SLOW_DECAY).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.output.precision, 10);
        let m = s.build_model().unwrap();
        assert_eq!(m.sigma_at(1.0), Some(0.3));
        assert!((s.build_curve().unwrap().discount(5.0).unwrap() - (-0.1f64).exp()).abs() < 1e-15);
        assert_eq!(s.run.simulate.unwrap().record_every, 1);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(Scenario::parse(r#"{"curve": {"kind": "flat", "rate": 0.02}, "colour": 1}"#).is_err());
        assert!(Scenario::parse(r#"{"curve": {"kind": "spline"}}"#).is_err());
        let s = Scenario::parse(r#"{"curve": {"kind": "table", "knots": [[1, 0.99], [2, 0.995]]}}"#).unwrap();
        assert!(matches!(s.build_curve(), Err(CliError::Scenario(_))));
        let s = Scenario::parse(
            r#"{"curve": {"kind": "flat", "rate": 0.02},
                "model": {"phi": {"kind": "exp_decay", "kappa": -1}, "process": {"kind": "brownian", "sigma": 0.3}}}"#,
        )
        .unwrap();
        assert!(s.build_model().is_err());
        assert!(Scenario::parse(r#"{"curve": {"kind": "flat", "rate": 0.02}, "output": {"precision": 0}}"#).is_err());
    }

    #[test]
    fn grid_points_include_endpoint() {
        let g = GridBlock { start: 0.0, stop: 10.0, step: 1.0 };
        let p = g.points().unwrap();
        assert_eq!(p.len(), 11);
        assert_eq!(p[10], 10.0);
        assert!(GridBlock { start: 0.0, stop: 1.0, step: 0.0 }.points().is_err());
    }
}
