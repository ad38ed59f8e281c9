//! Initial discount function `P_{0T}`.
//!
//! The curve doubles as the survival function of the crisis time,
//! `P_{0T} = Q(X >= T)`, so it must start at one, decrease strictly and
//! vanish at infinity. Its density `rho_0 = -dP/dT` is the a priori law of
//! `X` and its inverse is the quantile function used for inverse-CDF
//! sampling and for the change of variable in [`crate::quad`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{find_root_monotone, RootSpec};

pub const DEFAULT_HORIZON: f64 = 200.0;
/// Discount factors below this are treated as numerically zero when a
/// forward rate is requested.
pub const DEFAULT_EPSILON: f64 = 1e-200;

type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Log-linear interpolation in discount factors: piecewise-constant
/// forward rates, extrapolated past the last knot at the last rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCurve {
    maturities: Vec<f64>,
    log_discounts: Vec<f64>,
    forwards: Vec<f64>,
}

impl TableCurve {
    fn new(knots: &[(f64, f64)]) -> Result<Self> {
        let mut maturities = vec![0.0];
        let mut log_discounts = vec![0.0];
        for &(t, p) in knots {
            if !(t.is_finite() && p.is_finite()) {
                return Err(Error::InvalidCurve(format!("non-finite knot ({t}, {p})")));
            }
            if t == 0.0 {
                if p != 1.0 {
                    return Err(Error::InvalidCurve(format!("discount at maturity 0 must be 1, got {p}")));
                }
                continue;
            }
            let prev_t = *maturities.last().unwrap();
            if t <= prev_t {
                return Err(Error::InvalidCurve(format!("maturities must be strictly increasing: {t} after {prev_t}")));
            }
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidCurve(format!("discount factor {p} at {t} outside (0, 1)")));
            }
            let lp = p.ln();
            if lp >= *log_discounts.last().unwrap() {
                return Err(Error::InvalidCurve(format!("discount factors must strictly decrease; {p} at {t}")));
            }
            maturities.push(t);
            log_discounts.push(lp);
        }
        if maturities.len() < 2 {
            return Err(Error::InvalidCurve("table curve needs at least one positive maturity".into()));
        }
        let forwards = maturities
            .windows(2)
            .zip(log_discounts.windows(2))
            .map(|(t, l)| (l[0] - l[1]) / (t[1] - t[0]))
            .collect();
        Ok(Self {
            maturities,
            log_discounts,
            forwards,
        })
    }

    /// Segment index `j` with `maturities[j] <= t`, capped at the last
    /// segment for extrapolation.
    fn segment(&self, t: f64) -> usize {
        let idx = self.maturities.partition_point(|&m| m <= t);
        idx.saturating_sub(1).min(self.forwards.len() - 1)
    }

    fn log_discount(&self, t: f64) -> f64 {
        let j = self.segment(t);
        self.log_discounts[j] - self.forwards[j] * (t - self.maturities[j])
    }

    fn density(&self, t: f64) -> f64 {
        self.forwards[self.segment(t)] * self.log_discount(t).exp()
    }

    fn quantile(&self, p: f64) -> f64 {
        let lp = p.ln();
        // first knot whose log-discount is below lp
        let idx = self.log_discounts.partition_point(|&l| l >= lp);
        let j = idx.saturating_sub(1).min(self.forwards.len() - 1);
        self.maturities[j] + (self.log_discounts[j] - lp) / self.forwards[j]
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.maturities
            .iter()
            .zip(&self.log_discounts)
            .skip(1)
            .map(|(&t, &l)| (t, l.exp()))
    }
}

/// User-supplied smooth discount function with an optional analytic density.
#[derive(Clone)]
pub struct ParametricCurve {
    discount: CurveFn,
    density: Option<CurveFn>,
}

impl fmt::Debug for ParametricCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricCurve")
            .field("analytic_density", &self.density.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum CurveKind {
    Flat { rate: f64 },
    Table(TableCurve),
    Parametric(ParametricCurve),
}

#[derive(Debug, Clone)]
pub struct DiscountCurve {
    kind: CurveKind,
    horizon: f64,
    epsilon: f64,
}

fn fd_step(x: f64) -> f64 {
    1e-5_f64.max(1e-5 * x)
}

impl DiscountCurve {
    pub fn flat(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidCurve(format!("flat rate must be positive, got {rate}")));
        }
        Ok(Self::from_kind(CurveKind::Flat { rate }))
    }

    /// Table of `(maturity, discount factor)` knots. The point `(0, 1)` is
    /// implied; non-monotone input is rejected rather than repaired.
    pub fn table(knots: &[(f64, f64)]) -> Result<Self> {
        Ok(Self::from_kind(CurveKind::Table(TableCurve::new(knots)?)))
    }

    /// Smooth curve from closures. Without `density` the density is a
    /// centred finite difference with step `max(1e-5, 1e-5 x)`.
    pub fn parametric<P>(discount: P, density: Option<CurveFn>) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let discount: CurveFn = Arc::new(discount);
        let p0 = discount(0.0);
        if (p0 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCurve(format!("parametric curve has P(0) = {p0}, expected 1")));
        }
        let curve = Self::from_kind(CurveKind::Parametric(ParametricCurve { discount, density }));
        let mut prev = 1.0;
        for i in 1..=400 {
            let t = curve.horizon * i as f64 / 400.0;
            let p = curve.discount_unchecked(t);
            let underflowed = p == 0.0 && prev == 0.0;
            if !(p >= 0.0) || (p >= prev && !underflowed) {
                return Err(Error::InvalidCurve(format!("parametric curve not strictly decreasing near T={t}")));
            }
            prev = p;
        }
        Ok(curve)
    }

    fn from_kind(kind: CurveKind) -> Self {
        Self {
            kind,
            horizon: DEFAULT_HORIZON,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidCurve(format!("horizon must be positive, got {horizon}")));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidCurve(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Flat rate, when the curve is flat.
    pub fn flat_rate(&self) -> Option<f64> {
        match self.kind {
            CurveKind::Flat { rate } => Some(rate),
            _ => None,
        }
    }

    pub fn discount(&self, t: f64) -> Result<f64> {
        check_maturity(t)?;
        Ok(self.discount_unchecked(t))
    }

    pub(crate) fn discount_unchecked(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        match &self.kind {
            CurveKind::Flat { rate } => (-rate * t).exp(),
            CurveKind::Table(tab) => tab.log_discount(t).exp(),
            CurveKind::Parametric(par) => {
                if t.is_infinite() {
                    0.0
                } else {
                    (par.discount)(t)
                }
            }
        }
    }

    pub fn discount_at_horizon(&self) -> f64 {
        self.discount_unchecked(self.horizon)
    }

    /// `rho_0(x) = -dP_{0x}/dx`.
    pub fn density(&self, x: f64) -> Result<f64> {
        check_maturity(x)?;
        Ok(self.density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            CurveKind::Flat { rate } => rate * (-rate * x).exp(),
            CurveKind::Table(tab) => tab.density(x),
            CurveKind::Parametric(par) => match &par.density {
                Some(d) => d(x).max(0.0),
                None => {
                    let h = fd_step(x);
                    let p = &par.discount;
                    let d = if x >= h {
                        (p(x - h) - p(x + h)) / (2.0 * h)
                    } else {
                        (3.0 * p(x) - 4.0 * p(x + h) + p(x + 2.0 * h)) / (2.0 * h)
                    };
                    d.max(0.0)
                }
            },
        }
    }

    /// Maturity at which the curve equals `p`, restricted to the curve's
    /// horizon.
    pub fn inverse_discount(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::domain(format!("discount factor {p} outside (0, 1]")));
        }
        let floor = self.discount_at_horizon();
        if p < floor {
            return Err(Error::Horizon(format!(
                "discount factor {p:e} below the value {floor:e} at horizon {}",
                self.horizon
            )));
        }
        self.quantile(p)
    }

    /// Inverse on all of (0, 1], using the curve's tail beyond the horizon.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::domain(format!("probability {p} outside (0, 1]")));
        }
        let x = self.quantile_unchecked(p);
        if x.is_nan() {
            return Err(Error::Horizon(format!("curve inverse failed at p={p:e}")));
        }
        Ok(x)
    }

    /// NaN signals a failed inversion.
    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return 0.0;
        }
        match &self.kind {
            CurveKind::Flat { rate } => -p.ln() / rate,
            CurveKind::Table(tab) => tab.quantile(p),
            CurveKind::Parametric(par) => {
                let lp = p.ln();
                let f = |x: f64| {
                    let v = (par.discount)(x.max(0.0));
                    if v > 0.0 {
                        v.ln() - lp
                    } else {
                        f64::NEG_INFINITY
                    }
                };
                let spec = RootSpec {
                    abs_tol: 1e-15,
                    ..RootSpec::default()
                };
                find_root_monotone(f, (0.0, self.horizon), &spec).unwrap_or(f64::NAN).max(0.0)
            }
        }
    }

    /// `f_{0T} = rho_0(T) / P_{0T}`, the a priori hazard rate of the crisis.
    pub fn initial_forward_rate(&self, t: f64) -> Result<f64> {
        let p = self.discount(t)?;
        if p < self.epsilon {
            return Err(Error::Horizon(format!("P(0,{t}) = {p:e} below epsilon {:e}", self.epsilon)));
        }
        Ok(self.density_unchecked(t) / p)
    }

    /// Interpolation knots strictly inside `(a, b)`, where the density may jump.
    pub(crate) fn knots_between(&self, a: f64, b: f64) -> Vec<f64> {
        match &self.kind {
            CurveKind::Table(tab) => tab.maturities.iter().copied().filter(|&m| m > a && m < b).collect(),
            _ => Vec::new(),
        }
    }
}

fn check_maturity(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("maturity must be >= 0, got {t}")))
    }
}
