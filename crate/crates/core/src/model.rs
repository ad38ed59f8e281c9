//! Information-adjusting functions, information processes and the
//! observation state they generate.

use serde::{Deserialize, Serialize};

use crate::curve::DiscountCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Sign::Positive)
        } else if v == -1.0 {
            Ok(Sign::Negative)
        } else {
            Err(Error::domain(format!("sign must be +1 or -1, got {v}")))
        }
    }
}

/// The map `phi` through which the crisis time enters the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhiFunction {
    /// `phi(x) = x`
    Linear,
    /// `phi(x) = sign * exp(-kappa x)`
    ExpDecay { kappa: f64, sign: Sign },
    /// `phi(x) = sign / (x - x0)`, with the pole `x0 < 0` kept off the domain.
    Reciprocal { x0: f64, sign: Sign },
}

impl PhiFunction {
    pub fn exp_decay(kappa: f64, sign: Sign) -> Result<Self> {
        let phi = PhiFunction::ExpDecay { kappa, sign };
        phi.validate()?;
        Ok(phi)
    }

    pub fn reciprocal(x0: f64, sign: Sign) -> Result<Self> {
        let phi = PhiFunction::Reciprocal { x0, sign };
        phi.validate()?;
        Ok(phi)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PhiFunction::Linear => Ok(()),
            PhiFunction::ExpDecay { kappa, .. } => {
                if kappa > 0.0 && kappa.is_finite() {
                    Ok(())
                } else {
                    Err(Error::domain(format!("exp-decay kappa must be positive, got {kappa}")))
                }
            }
            PhiFunction::Reciprocal { x0, .. } => {
                if x0 < 0.0 && x0.is_finite() {
                    Ok(())
                } else {
                    Err(Error::domain(format!("reciprocal pole x0 must be negative, got {x0}")))
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("phi evaluated at negative time {x}")));
        }
        if let PhiFunction::Reciprocal { x0, .. } = *self {
            if x == x0 {
                return Err(Error::domain("phi evaluated at its pole"));
            }
        }
        Ok(self.value(x))
    }

    #[inline]
    pub(crate) fn value(&self, x: f64) -> f64 {
        match *self {
            PhiFunction::Linear => x,
            PhiFunction::ExpDecay { kappa, sign } => sign.value() * (-kappa * x).exp(),
            PhiFunction::Reciprocal { x0, sign } => sign.value() / (x - x0),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            PhiFunction::Linear => 1.0,
            PhiFunction::ExpDecay { kappa, sign } => -kappa * sign.value() * (-kappa * x).exp(),
            PhiFunction::Reciprocal { x0, sign } => -sign.value() / ((x - x0) * (x - x0)),
        }
    }

    /// Direction of `phi` itself. Bond prices increase with the information
    /// level exactly when this is true.
    pub fn is_increasing(&self) -> bool {
        match *self {
            PhiFunction::Linear => true,
            PhiFunction::ExpDecay { sign, .. } | PhiFunction::Reciprocal { sign, .. } => sign == Sign::Negative,
        }
    }

    /// Direction of `|phi|` on `x >= 0`.
    pub fn magnitude_increasing(&self) -> bool {
        matches!(self, PhiFunction::Linear)
    }

    /// Closure of the range of `phi` on `[lower, ∞)`, as `(inf, sup)`.
    pub fn bounds_on(&self, lower: f64) -> (f64, f64) {
        match *self {
            PhiFunction::Linear => (lower, f64::INFINITY),
            PhiFunction::ExpDecay { .. } | PhiFunction::Reciprocal { .. } => {
                let edge = self.value(lower);
                if edge >= 0.0 {
                    (0.0, edge)
                } else {
                    (edge, 0.0)
                }
            }
        }
    }
}

/// Piecewise-constant information flow rate `sigma_s`. Piece `i` applies on
/// `[until_{i-1}, until_i)`; the last rate continues past its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSchedule {
    pieces: Vec<(f64, f64)>,
}

impl RateSchedule {
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::domain("rate schedule needs at least one piece"));
        }
        let mut prev = 0.0;
        for &(until, sigma) in &pieces {
            if !(until > prev) {
                return Err(Error::domain(format!("schedule breakpoints must increase from 0; got {until}")));
            }
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::domain(format!("schedule rates must be positive, got {sigma}")));
            }
            prev = until;
        }
        Ok(Self { pieces })
    }

    pub fn constant(sigma: f64) -> Result<Self> {
        Self::new(vec![(f64::INFINITY, sigma)])
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .find(|&&(until, _)| t < until)
            .unwrap_or_else(|| self.pieces.last().unwrap())
            .1
    }

    fn integrate_power(&self, t: f64, power: i32) -> f64 {
        let mut acc = 0.0;
        let mut start = 0.0;
        for (i, &(until, sigma)) in self.pieces.iter().enumerate() {
            let end = if i + 1 == self.pieces.len() { t } else { until.min(t) };
            if end > start {
                acc += sigma.powi(power) * (end - start);
            }
            if until >= t {
                break;
            }
            start = until;
        }
        acc
    }

    /// `∫_0^t sigma_s ds`
    pub fn integrated_rate(&self, t: f64) -> f64 {
        self.integrate_power(t, 1)
    }

    /// `∫_0^t sigma_s^2 ds`
    pub fn integrated_variance(&self, t: f64) -> f64 {
        self.integrate_power(t, 2)
    }

    /// Constant-rate segments `(start, end, sigma)` covering `[from, to]`.
    pub fn segments(&self, from: f64, to: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let mut start = 0.0_f64;
        for (i, &(until, sigma)) in self.pieces.iter().enumerate() {
            let end = if i + 1 == self.pieces.len() { f64::INFINITY } else { until };
            let a = start.max(from);
            let b = end.min(to);
            if b > a {
                out.push((a, b, sigma));
            }
            start = until;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InformationProcess {
    /// `xi_t = sigma t phi(X) + B_t`; `sigma = 0` is the deterministic limit.
    BrownianConst { sigma: f64 },
    /// `xi_t = phi(X) ∫_0^t sigma_s ds + B_t`
    BrownianTimeDep { schedule: RateSchedule },
    /// `xi_t = X gamma_t`, `gamma` a standard gamma process with rate `m`.
    Gamma { m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub phi: PhiFunction,
    pub process: InformationProcess,
}

impl ModelSpec {
    pub fn new(phi: PhiFunction, process: InformationProcess) -> Result<Self> {
        let spec = Self { phi, process };
        spec.validate()?;
        Ok(spec)
    }

    pub fn brownian(phi: PhiFunction, sigma: f64) -> Result<Self> {
        Self::new(phi, InformationProcess::BrownianConst { sigma })
    }

    pub fn gamma(phi: PhiFunction, m: f64) -> Result<Self> {
        Self::new(phi, InformationProcess::Gamma { m })
    }

    pub fn validate(&self) -> Result<()> {
        self.phi.validate()?;
        match &self.process {
            InformationProcess::BrownianConst { sigma } => {
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::domain(format!("sigma must be >= 0, got {sigma}")));
                }
            }
            InformationProcess::BrownianTimeDep { .. } => {}
            InformationProcess::Gamma { m } => {
                if !(*m > 0.0 && m.is_finite()) {
                    return Err(Error::domain(format!("gamma rate m must be positive, got {m}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_brownian(&self) -> bool {
        !matches!(self.process, InformationProcess::Gamma { .. })
    }

    /// Instantaneous information flow rate at `t` (Brownian models).
    pub fn sigma_at(&self, t: f64) -> Option<f64> {
        match &self.process {
            InformationProcess::BrownianConst { sigma } => Some(*sigma),
            InformationProcess::BrownianTimeDep { schedule } => Some(schedule.rate_at(t)),
            InformationProcess::Gamma { .. } => None,
        }
    }

    /// `tau_t = ∫_0^t sigma_s^2 ds` (Brownian models).
    pub fn tau_at(&self, t: f64) -> Option<f64> {
        match &self.process {
            InformationProcess::BrownianConst { sigma } => Some(sigma * sigma * t),
            InformationProcess::BrownianTimeDep { schedule } => Some(schedule.integrated_variance(t)),
            InformationProcess::Gamma { .. } => None,
        }
    }

    /// Constant-rate segments covering `[from, to]` (Brownian models).
    pub(crate) fn sigma_segments(&self, from: f64, to: f64) -> Option<Vec<(f64, f64, f64)>> {
        match &self.process {
            InformationProcess::BrownianConst { sigma } => Some(vec![(from, to, *sigma)]),
            InformationProcess::BrownianTimeDep { schedule } => Some(schedule.segments(from, to)),
            InformationProcess::Gamma { .. } => None,
        }
    }
}

/// What the market has seen by time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    /// Raw information `xi_t` plus the sufficient pair
    /// `eta_t = ∫ sigma_s d xi_s` and `tau_t = ∫ sigma_s^2 ds`.
    Brownian { xi: f64, eta: f64, tau: f64 },
    Gamma { xi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub t: f64,
    pub obs: Observation,
    /// Whether the crisis time is still in the future (`X >= t`).
    pub alive: bool,
}

impl MarketState {
    pub fn initial(spec: &ModelSpec) -> Self {
        let obs = if spec.is_brownian() {
            Observation::Brownian { xi: 0.0, eta: 0.0, tau: 0.0 }
        } else {
            Observation::Gamma { xi: 0.0 }
        };
        Self { t: 0.0, obs, alive: true }
    }

    /// State of a constant-rate Brownian model from `(t, xi_t)`; the path
    /// enters only through `xi_t`.
    pub fn brownian(spec: &ModelSpec, t: f64, xi: f64) -> Result<Self> {
        check_time(t)?;
        match spec.process {
            InformationProcess::BrownianConst { sigma } => Ok(Self {
                t,
                obs: Observation::Brownian { xi, eta: sigma * xi, tau: sigma * sigma * t },
                alive: true,
            }),
            InformationProcess::BrownianTimeDep { .. } => Err(Error::UnsupportedModel(
                "time-dependent rate states are path dependent; use MarketState::from_sufficient",
            )),
            InformationProcess::Gamma { .. } => Err(Error::UnsupportedModel("gamma model has no Brownian state")),
        }
    }

    /// Brownian state from its sufficient statistics.
    pub fn from_sufficient(t: f64, xi: f64, eta: f64, tau: f64) -> Result<Self> {
        check_time(t)?;
        if !(tau >= 0.0) {
            return Err(Error::domain(format!("tau must be >= 0, got {tau}")));
        }
        Ok(Self { t, obs: Observation::Brownian { xi, eta, tau }, alive: true })
    }

    pub fn gamma(t: f64, xi: f64) -> Result<Self> {
        check_time(t)?;
        if !(xi >= 0.0) {
            return Err(Error::domain(format!("gamma information must be >= 0, got {xi}")));
        }
        Ok(Self { t, obs: Observation::Gamma { xi }, alive: true })
    }

    pub fn xi(&self) -> f64 {
        match self.obs {
            Observation::Brownian { xi, .. } | Observation::Gamma { xi } => xi,
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("state time must be >= 0, got {t}")))
    }
}

/// Advances the information state by `dt` given the crisis time `x_draw`.
///
/// `noise` is a standard normal draw for Brownian models and a
/// `Gamma(m dt, 1)` increment for the gamma model. Time-dependent rates use
/// the rate at the left end of the step.
pub fn evolve_information(
    spec: &ModelSpec,
    state: &MarketState,
    x_draw: f64,
    dt: f64,
    noise: f64,
) -> Result<MarketState> {
    evolve_with_drift_scale(spec, state, x_draw, dt, noise, 1.0)
}

pub(crate) fn evolve_with_drift_scale(
    spec: &ModelSpec,
    state: &MarketState,
    x_draw: f64,
    dt: f64,
    noise: f64,
    drift_scale: f64,
) -> Result<MarketState> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    if !state.alive {
        return Err(Error::NotAlive { t: state.t });
    }
    let phi = spec.phi.eval(x_draw)?;
    let t_next = state.t + dt;
    let obs = match (&spec.process, state.obs) {
        (InformationProcess::BrownianConst { sigma }, Observation::Brownian { xi, .. }) => {
            let xi = xi + drift_scale * sigma * phi * dt + dt.sqrt() * noise;
            Observation::Brownian { xi, eta: sigma * xi, tau: sigma * sigma * t_next }
        }
        (InformationProcess::BrownianTimeDep { schedule }, Observation::Brownian { xi, eta, tau }) => {
            let s = schedule.rate_at(state.t);
            let dxi = drift_scale * s * phi * dt + dt.sqrt() * noise;
            Observation::Brownian { xi: xi + dxi, eta: eta + s * dxi, tau: tau + s * s * dt }
        }
        (InformationProcess::Gamma { .. }, Observation::Gamma { xi }) => {
            if !(noise >= 0.0) {
                return Err(Error::domain("gamma increment must be nonnegative"));
            }
            Observation::Gamma { xi: xi + x_draw * noise }
        }
        _ => return Err(Error::domain("state observation does not match the model")),
    };
    Ok(MarketState { t: t_next, obs, alive: x_draw >= t_next })
}

/// Inverse-CDF draw of the crisis time: `X = P_0^{-1}(u)`.
pub fn draw_crisis_time(curve: &DiscountCurve, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("uniform draw {u} outside (0, 1)")));
    }
    curve.quantile(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma};

    #[test]
    fn phi_values() {
        assert_eq!(PhiFunction::Linear.eval(3.0).unwrap(), 3.0);
        let e = PhiFunction::exp_decay(0.025, Sign::Positive).unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 1.0);
        let e = PhiFunction::exp_decay(0.05, Sign::Positive).unwrap();
        assert!((e.eval(5.0).unwrap() - 0.778_801).abs() < 1e-6);
        assert!(PhiFunction::reciprocal(0.5, Sign::Positive).is_err());
        assert!(PhiFunction::exp_decay(0.0, Sign::Positive).is_err());
        assert!(PhiFunction::Linear.eval(-1.0).is_err());
    }

    #[test]
    fn phi_monotone_on_samples() {
        let phis = [
            PhiFunction::Linear,
            PhiFunction::exp_decay(0.05, Sign::Positive).unwrap(),
            PhiFunction::exp_decay(0.05, Sign::Negative).unwrap(),
            PhiFunction::reciprocal(-2.0, Sign::Positive).unwrap(),
            PhiFunction::reciprocal(-2.0, Sign::Negative).unwrap(),
        ];
        for phi in phis {
            let vals: Vec<f64> = (0..500).map(|i| phi.value(i as f64 * 0.37)).collect();
            for w in vals.windows(2) {
                if phi.is_increasing() {
                    assert!(w[1] > w[0]);
                } else {
                    assert!(w[1] < w[0]);
                }
                if phi.magnitude_increasing() {
                    assert!(w[1].abs() > w[0].abs());
                } else {
                    assert!(w[1].abs() < w[0].abs());
                }
            }
            let (lo, hi) = phi.bounds_on(1.0);
            assert!(vals[3..].iter().all(|v| *v >= lo && *v <= hi));
        }
    }

    #[test]
    fn schedule_integrals() {
        let s = RateSchedule::new(vec![(1.0, 0.2), (3.0, 0.4)]).unwrap();
        assert_eq!(s.rate_at(0.5), 0.2);
        assert_eq!(s.rate_at(1.0), 0.4);
        assert_eq!(s.rate_at(10.0), 0.4);
        assert!((s.integrated_rate(2.0) - (0.2 + 0.4)).abs() < 1e-15);
        assert!((s.integrated_variance(5.0) - (0.04 + 4.0 * 0.16)).abs() < 1e-15);
        assert_eq!(s.segments(0.5, 4.0), vec![(0.5, 1.0, 0.2), (1.0, 4.0, 0.4)]);
        assert!(RateSchedule::new(vec![(1.0, 0.2), (0.5, 0.1)]).is_err());
        assert!(RateSchedule::new(vec![(1.0, 0.0)]).is_err());
    }

    #[test]
    fn drift_only_step() {
        let spec = ModelSpec::brownian(PhiFunction::Linear, 0.3).unwrap();
        let s0 = MarketState::initial(&spec);
        let s1 = evolve_information(&spec, &s0, 10.0, 1.0, 0.0).unwrap();
        assert!((s1.xi() - 3.0).abs() < 1e-15);
        assert!(s1.alive);
        assert!(evolve_information(&spec, &s0, 10.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn survival_flag_drops() {
        let spec = ModelSpec::brownian(PhiFunction::Linear, 0.3).unwrap();
        let s = MarketState::brownian(&spec, 1.5, 0.0).unwrap();
        let next = evolve_information(&spec, &s, 2.0, 1.0, 0.0).unwrap();
        assert!(!next.alive);
        assert!(matches!(evolve_information(&spec, &next, 2.0, 1.0, 0.0), Err(Error::NotAlive { .. })));
    }

    #[test]
    fn time_dependent_with_constant_rate_matches_constant_model() {
        let phi = PhiFunction::exp_decay(0.05, Sign::Positive).unwrap();
        let c = ModelSpec::brownian(phi, 0.3).unwrap();
        let td = ModelSpec::new(phi, InformationProcess::BrownianTimeDep { schedule: RateSchedule::constant(0.3).unwrap() }).unwrap();
        let (mut a, mut b) = (MarketState::initial(&c), MarketState::initial(&td));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            a = evolve_information(&c, &a, 30.0, 0.01, z).unwrap();
            b = evolve_information(&td, &b, 30.0, 0.01, z).unwrap();
        }
        match (a.obs, b.obs) {
            (Observation::Brownian { eta: e1, tau: t1, .. }, Observation::Brownian { eta: e2, tau: t2, .. }) => {
                assert!((e1 - e2).abs() < 1e-12 && (t1 - t2).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn gamma_increment_mean() {
        // E[xi_{t+dt} - xi_t | X = x] = x m dt
        let spec = ModelSpec::gamma(PhiFunction::Linear, 0.1).unwrap();
        let (x, dt, n) = (7.0, 0.25, 1_000_000);
        let gamma = Gamma::new(0.1 * dt, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s0 = MarketState::initial(&spec);
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..n {
            let d = evolve_information(&spec, &s0, x, dt, gamma.sample(&mut rng)).unwrap().xi();
            sum += d;
            sumsq += d * d;
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - x * 0.1 * dt).abs() < 3.0 * se, "mean={mean} se={se}");
    }

    #[test]
    fn crisis_time_draws() {
        let c = DiscountCurve::flat(0.02).unwrap();
        assert!((draw_crisis_time(&c, (-0.1f64).exp()).unwrap() - 5.0).abs() < 1e-12);
        assert!(draw_crisis_time(&c, 1.0 - 1e-15).unwrap() < 1e-12);
        assert!(draw_crisis_time(&c, 0.0).is_err());
        assert!(draw_crisis_time(&c, 1.0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let survived = (0..n)
            .filter(|_| draw_crisis_time(&c, rng.random_range(f64::EPSILON..1.0)).unwrap() >= 5.0)
            .count();
        let p = (-0.1f64).exp();
        let freq = survived as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * se);
    }
}
