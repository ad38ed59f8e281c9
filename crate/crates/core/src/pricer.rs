//! Observables of the model as ratios of tail integrals against the
//! unnormalised conditional density `p_t(x)`.

use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use crate::model::{InformationProcess, MarketState, ModelSpec, Observation};
use crate::quad::{log_normal_cdf, tail_integrals, QuadratureSpec};

/// The conditional density of the crisis time given the state's information.
///
/// Weights are stored relative to `exp(shift)`, the supremum of the
/// log-weight over `[t, ∞)`, so that no integrand exceeds one.
#[derive(Debug, Clone)]
pub struct ConditionalDensityView<'a> {
    curve: &'a DiscountCurve,
    spec: &'a ModelSpec,
    state: MarketState,
    quad: QuadratureSpec,
    shift: f64,
}

/// Everything path simulation needs from one state, from a single pass of
/// tail integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    /// `ln pi_t`
    pub ln_kernel: f64,
    pub short_rate: f64,
    pub phi_hat_t: f64,
    /// `(P_{tT}, Phi_hat_{tT})` for the reference maturity, if not yet past.
    pub bond: Option<(f64, f64)>,
}

impl<'a> ConditionalDensityView<'a> {
    pub fn new(curve: &'a DiscountCurve, spec: &'a ModelSpec, state: MarketState) -> Result<Self> {
        Self::with_quadrature(curve, spec, state, QuadratureSpec::default())
    }

    pub fn with_quadrature(
        curve: &'a DiscountCurve,
        spec: &'a ModelSpec,
        state: MarketState,
        quad: QuadratureSpec,
    ) -> Result<Self> {
        quad.validate()?;
        if !state.alive {
            return Err(Error::NotAlive { t: state.t });
        }
        let shift = match (&spec.process, state.obs) {
            (InformationProcess::Gamma { m }, Observation::Gamma { xi }) => {
                let mt = m * state.t;
                if mt == 0.0 {
                    0.0
                } else {
                    let x = (xi / mt).max(state.t);
                    -mt * x.ln() - xi / x
                }
            }
            (InformationProcess::Gamma { .. }, _) | (_, Observation::Gamma { .. }) => {
                return Err(Error::domain("state observation does not match the model"))
            }
            (_, Observation::Brownian { eta, tau, .. }) => {
                let (lo, hi) = spec.phi.bounds_on(state.t);
                if tau > 0.0 {
                    let y = (eta / tau).clamp(lo, hi);
                    y * eta - 0.5 * y * y * tau
                } else if eta == 0.0 {
                    0.0
                } else {
                    let y = if eta > 0.0 { hi } else { lo };
                    if !y.is_finite() {
                        return Err(Error::domain("information without variance gives a divergent density"));
                    }
                    y * eta
                }
            }
        };
        Ok(Self { curve, spec, state, quad, shift })
    }

    pub fn curve(&self) -> &DiscountCurve {
        self.curve
    }

    pub fn spec(&self) -> &ModelSpec {
        self.spec
    }

    pub fn state(&self) -> &MarketState {
        &self.state
    }

    /// `ln p_t(x) - ln rho_0(x)`
    #[inline]
    fn log_weight(&self, x: f64) -> f64 {
        match self.state.obs {
            Observation::Brownian { eta, tau, .. } => {
                let y = self.spec.phi.value(x);
                y * eta - 0.5 * y * y * tau
            }
            Observation::Gamma { xi } => {
                let mt = match self.spec.process {
                    InformationProcess::Gamma { m } => m * self.state.t,
                    _ => unreachable!("checked at construction"),
                };
                let a = if mt == 0.0 { 0.0 } else { -mt * x.ln() };
                let b = if xi == 0.0 { 0.0 } else { -xi / x };
                a + b
            }
        }
    }

    #[inline]
    fn weight(&self, x: f64) -> f64 {
        (self.log_weight(x) - self.shift).exp()
    }

    /// Shifted tail integrals of `rho_0 w [1, phi]` from each lower limit.
    fn moments(&self, lowers: &[f64]) -> Result<Vec<[f64; 2]>> {
        let phi = self.spec.phi;
        tail_integrals(
            |x| {
                let w = self.weight(x);
                [w, phi.value(x) * w]
            },
            self.curve,
            lowers,
            &self.quad,
        )
    }

    fn mass(&self, lowers: &[f64]) -> Result<Vec<f64>> {
        let v = tail_integrals(|x| [self.weight(x)], self.curve, lowers, &self.quad)?;
        let out: Vec<f64> = v.into_iter().map(|[m]| m).collect();
        if !(out[0] > 0.0) {
            return Err(Error::Quadrature { previous: out[0], last: out[0] });
        }
        Ok(out)
    }

    fn check_maturity(&self, t_mat: f64) -> Result<()> {
        if t_mat >= self.state.t {
            Ok(())
        } else {
            Err(Error::domain(format!("maturity {t_mat} precedes state time {}", self.state.t)))
        }
    }

    fn sigma(&self) -> Result<f64> {
        self.spec
            .sigma_at(self.state.t)
            .ok_or(Error::UnsupportedModel("risk premium and volatilities need a Brownian model"))
    }

    /// Tail masses `∫_l^∞ p_t` for each lower limit `l`, returned as
    /// `(scaled, ln_scale)` with true value `scaled * exp(ln_scale)`.
    pub(crate) fn scaled_masses(&self, lowers: &[f64]) -> Result<(Vec<f64>, f64)> {
        Ok((self.mass(lowers)?, self.shift))
    }

    /// `P_{tT}`
    pub fn bond_price(&self, maturity: f64) -> Result<f64> {
        self.check_maturity(maturity)?;
        if maturity == self.state.t {
            return Ok(1.0);
        }
        let m = self.mass(&[self.state.t, maturity])?;
        Ok(m[1] / m[0])
    }

    /// Bond prices for several maturities from one set of panels.
    pub fn bond_prices(&self, maturities: &[f64]) -> Result<Vec<f64>> {
        let mut order: Vec<usize> = (0..maturities.len()).collect();
        order.sort_by(|&a, &b| maturities[a].total_cmp(&maturities[b]));
        let mut lowers = vec![self.state.t];
        for &i in &order {
            self.check_maturity(maturities[i])?;
            lowers.push(maturities[i]);
        }
        let m = self.mass(&lowers)?;
        let mut out = vec![0.0; maturities.len()];
        for (k, &i) in order.iter().enumerate() {
            out[i] = m[k + 1] / m[0];
        }
        Ok(out)
    }

    /// `r_t = p_t(t) / ∫_t^∞ p_t`
    pub fn short_rate(&self) -> Result<f64> {
        self.forward_rate(self.state.t)
    }

    /// `f_{tT} = p_t(T) / ∫_T^∞ p_t`
    pub fn forward_rate(&self, maturity: f64) -> Result<f64> {
        self.check_maturity(maturity)?;
        let m = self.mass(&[maturity])?;
        Ok(self.curve.density(maturity)? * self.weight(maturity) / m[0])
    }

    /// `Phi_hat_{tu}`, the conditional mean of `phi(X)` given `X >= u`.
    pub fn phi_hat(&self, u: f64) -> Result<f64> {
        self.check_maturity(u)?;
        let m = self.moments(&[u])?;
        Ok(m[0][1] / m[0][0])
    }

    /// `Sigma_{tT} = Phi_hat_{tT} - Phi_hat_{tt}`.
    ///
    /// Evaluated as
    /// `(M_{[t,T)} E[phi - phi(T); X >= T] / M_T + ∫_t^T (phi(T) - phi) p) / M_t`
    /// whose terms share a sign for monotone `phi`, so a concentrated
    /// conditional law does not lose the result to cancellation.
    pub fn bond_volatility(&self, maturity: f64) -> Result<f64> {
        self.check_maturity(maturity)?;
        if maturity == self.state.t {
            return Ok(0.0);
        }
        let phi = self.spec.phi;
        let phi_mat = phi.value(maturity);
        let v = tail_integrals(
            |x| {
                let w = self.weight(x);
                let d = (phi.value(x) - phi_mat) * w;
                if x < maturity {
                    [w, -d, 0.0, 0.0]
                } else {
                    [0.0, 0.0, w, d]
                }
            },
            self.curve,
            &[self.state.t, maturity],
            &self.quad,
        )?;
        let [near, near_gap, far, far_gap] = v[0];
        if !(far > 0.0) {
            return Err(Error::Quadrature { previous: far, last: far });
        }
        Ok((near * far_gap / far + near_gap) / (near + far))
    }

    /// `∫_from^∞ P_{tx} dx`. Swapping the order of integration gives
    /// `pi_t^{-1} ∫_from^∞ (y - from) p_t(y) dy`.
    pub fn annuity_price(&self, from: f64) -> Result<f64> {
        self.check_maturity(from)?;
        let v = tail_integrals(
            |x| {
                let w = self.weight(x);
                [w, (x - from) * w]
            },
            self.curve,
            &[self.state.t, from],
            &self.quad,
        )?;
        Ok(v[1][1] / v[0][0])
    }

    /// `pi_t = ∫_t^∞ p_t(x) dx`
    pub fn pricing_kernel(&self) -> Result<f64> {
        Ok(self.ln_pricing_kernel()?.exp())
    }

    pub fn ln_pricing_kernel(&self) -> Result<f64> {
        let m = self.mass(&[self.state.t])?;
        Ok(m[0].ln() + self.shift)
    }

    /// `lambda_t = -sigma_t Phi_hat_{tt}`
    pub fn risk_premium(&self) -> Result<f64> {
        let sigma = self.sigma()?;
        Ok(-sigma * self.phi_hat(self.state.t)?)
    }

    /// Absolute volatility of the instantaneous forward rate,
    /// `sigma f_{tT} (phi(T) - Phi_hat_{tT})`.
    pub fn forward_rate_volatility(&self, maturity: f64) -> Result<f64> {
        let sigma = self.sigma()?;
        self.check_maturity(maturity)?;
        let m = self.moments(&[maturity])?;
        let f = self.curve.density(maturity)? * self.weight(maturity) / m[0][0];
        Ok(sigma * f * (self.spec.phi.value(maturity) - m[0][1] / m[0][0]))
    }

    /// `∫_0^∞ p_t(x) dx`, the normaliser of the conditional law of `X`
    /// without the survival restriction.
    ///
    /// For the gamma model with `xi_t = 0` the factor `x^{-mt}` is integrable
    /// at the origin only when `mt < 1` or the density vanishes there.
    pub fn total_mass(&self) -> Result<f64> {
        if let (InformationProcess::Gamma { m }, Observation::Gamma { xi }) = (&self.spec.process, self.state.obs) {
            let mt = m * self.state.t;
            if xi == 0.0 && mt >= 1.0 && self.curve.density(0.0)? > 0.0 {
                return Err(Error::Integrability(format!(
                    "x^(-{mt}) is not integrable at 0 against a density with rho_0(0) > 0"
                )));
            }
        }
        // the shift must bound the weight on all of [0, ∞)
        let shift = match self.state.obs {
            Observation::Gamma { .. } => self.shift.max(gamma_sup_from_zero(self.spec, &self.state)),
            Observation::Brownian { eta, tau, .. } => {
                let (lo, hi) = self.spec.phi.bounds_on(0.0);
                let y = if tau > 0.0 { (eta / tau).clamp(lo, hi) } else { 0.0 };
                y * eta - 0.5 * y * y * tau
            }
        };
        let v = tail_integrals(
            |x| [if x > 0.0 { (self.log_weight(x) - shift).exp() } else { 0.0 }],
            self.curve,
            &[0.0],
            &self.quad,
        )?;
        Ok(v[0][0] * shift.exp())
    }

    /// One pass of tail integrals for the quantities path simulation records.
    pub fn snapshot(&self, reference: f64) -> Result<Snapshot> {
        let t = self.state.t;
        let lowers: &[f64] = if reference > t { &[t, reference] } else { &[t] };
        let m = self.moments(lowers)?;
        if !(m[0][0] > 0.0) {
            return Err(Error::Quadrature { previous: m[0][0], last: m[0][0] });
        }
        let bond = if reference > t {
            Some((m[1][0] / m[0][0], m[1][1] / m[1][0]))
        } else if reference == t {
            Some((1.0, m[0][1] / m[0][0]))
        } else {
            None
        };
        Ok(Snapshot {
            ln_kernel: m[0][0].ln() + self.shift,
            short_rate: self.curve.density(t)? * self.weight(t) / m[0][0],
            phi_hat_t: m[0][1] / m[0][0],
            bond,
        })
    }
}

fn gamma_sup_from_zero(spec: &ModelSpec, state: &MarketState) -> f64 {
    match (&spec.process, state.obs) {
        (InformationProcess::Gamma { m }, Observation::Gamma { xi }) => {
            let mt = m * state.t;
            if mt == 0.0 || xi == 0.0 {
                0.0
            } else {
                let x = xi / mt;
                -mt * x.ln() - xi / x
            }
        }
        _ => 0.0,
    }
}

/// Bond price for a flat curve `e^{-rT}` and `phi(x) = x`:
///
/// ```text
/// P_{tT} = N((xi - r/sigma)/√t - sigma T √t) / N((xi - r/sigma)/√t - sigma t √t)
/// ```
///
/// evaluated as a difference of log-CDFs so deep lower tails stay finite.
pub fn closed_form_bond_flat_linear(r: f64, sigma: f64, t: f64, xi: f64, maturity: f64) -> Result<f64> {
    if !(r > 0.0 && sigma > 0.0 && t > 0.0) {
        return Err(Error::domain("closed form needs r > 0, sigma > 0, t > 0"));
    }
    if !(maturity >= t) {
        return Err(Error::domain(format!("maturity {maturity} precedes t={t}")));
    }
    if maturity == t {
        return Ok(1.0);
    }
    let st = t.sqrt();
    let a = (xi - r / sigma) / st;
    let num = log_normal_cdf(a - sigma * maturity * st);
    let den = log_normal_cdf(a - sigma * t * st);
    if !den.is_finite() {
        return Err(Error::Quadrature { previous: num, last: den });
    }
    Ok((num - den).exp())
}
