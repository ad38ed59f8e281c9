use inforate::deriv::{bond_call_price, hybrid_price, swaption_price};
use inforate::model::Sign;
use inforate::quad::integrate;
use inforate::{
    BondOptionSpec, ConditionalDensityView, DiscountCurve, InformationProcess, MarketState, ModelSpec, PhiFunction,
    QuadratureSpec, RateSchedule, SimulationPlan, SwaptionSpec,
};
use proptest::prelude::*;

fn flat() -> DiscountCurve {
    DiscountCurve::flat(0.02).unwrap()
}

fn fast_decay() -> ModelSpec {
    ModelSpec::brownian(PhiFunction::exp_decay(0.05, Sign::Positive).unwrap(), 0.25).unwrap()
}

#[test]
fn bond_is_exponential_of_integrated_forward() {
    let c = DiscountCurve::table(&[(1.0, 0.985), (4.0, 0.93), (10.0, 0.8), (30.0, 0.5)]).unwrap();
    let m = ModelSpec::brownian(PhiFunction::exp_decay(0.03, Sign::Positive).unwrap(), 0.2).unwrap();
    let v = ConditionalDensityView::new(&c, &m, MarketState::brownian(&m, 1.5, 0.1).unwrap()).unwrap();
    let spec = QuadratureSpec { nodes: 16, max_levels: 12, rel_tol: 1e-11, abs_tol: 1e-13 };
    // table knots are kinks of the forward curve, so integrate piecewise
    let cuts = [1.5, 4.0, 8.0];
    let int_f: f64 = cuts.windows(2).map(|w| integrate(|x| v.forward_rate(x).unwrap(), w[0], w[1], &spec).unwrap()).sum();
    assert!((v.bond_price(8.0).unwrap() - (-int_f).exp()).abs() < 1e-9);
    assert!((v.short_rate().unwrap() - v.forward_rate(1.5).unwrap()).abs() < 1e-14);
}

#[test]
fn single_payment_swaption_is_a_scaled_bond_put() {
    // (1 - (1 + K) P_{tT})^+ = (1 + K) (K' - P_{tT})^+ with K' = 1 / (1 + K)
    let (c, m) = (flat(), fast_decay());
    for k in [0.005, 0.01, 0.03] {
        let sw = swaption_price(&SwaptionSpec::new(1.0, vec![2.0], k).unwrap(), &m, &c).unwrap();
        let kp = 1.0 / (1.0 + k);
        let call = bond_call_price(&BondOptionSpec::new(1.0, 2.0, kp).unwrap(), &m, &c).unwrap().price;
        let put = call - c.discount(2.0).unwrap() + kp * c.discount(1.0).unwrap();
        assert!((sw - (1.0 + k) * put).abs() < 1e-9, "K={k}: {sw} vs {}", (1.0 + k) * put);
    }
}

#[test]
fn swaption_decreases_in_strike() {
    let (c, m) = (flat(), fast_decay());
    let dates = vec![2.0, 3.0, 4.0, 5.0];
    let prices: Vec<f64> = [0.0, 0.01, 0.02, 0.03]
        .iter()
        .map(|&k| swaption_price(&SwaptionSpec::new(1.0, dates.clone(), k).unwrap(), &m, &c).unwrap())
        .collect();
    assert!(prices.windows(2).all(|w| w[1] < w[0]), "{prices:?}");
}

#[test]
fn piecewise_rate_call_matches_hybrid_monte_carlo() {
    let c = flat();
    let schedule = RateSchedule::new(vec![(1.0, 0.15), (f64::INFINITY, 0.35)]).unwrap();
    let m = ModelSpec::new(
        PhiFunction::exp_decay(0.05, Sign::Positive).unwrap(),
        InformationProcess::BrownianTimeDep { schedule },
    )
    .unwrap();
    let k = 0.93;
    let exact = bond_call_price(&BondOptionSpec::new(2.0, 5.0, k).unwrap(), &m, &c).unwrap().price;
    let plan = SimulationPlan { antithetic: true, quad: QuadratureSpec::coarse(), ..SimulationPlan::new(20_000, 1.0, 1.0, 11) };
    let e = hybrid_price(|v| Ok((v.bond_price(5.0)? - k).max(0.0)), 2.0, &m, &c, &MarketState::initial(&m), &plan).unwrap();
    assert!(e.within(exact, 3.0), "{e:?} vs {exact}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bond_prices_are_discount_factors(
        t in 0.1f64..8.0,
        z in -3.0f64..3.0,
        x in 1.0f64..150.0,
        which in 0usize..4,
    ) {
        let c = flat();
        let phi = [
            PhiFunction::Linear,
            PhiFunction::exp_decay(0.025, Sign::Positive).unwrap(),
            PhiFunction::exp_decay(0.05, Sign::Negative).unwrap(),
            PhiFunction::reciprocal(-2.0, Sign::Positive).unwrap(),
        ][which];
        let sigma = if which == 0 { 0.05 } else { 0.3 };
        let m = ModelSpec::brownian(phi, sigma).unwrap();
        let xi = sigma * t * phi.eval(x).unwrap() + t.sqrt() * z;
        let v = ConditionalDensityView::new(&c, &m, MarketState::brownian(&m, t, xi).unwrap()).unwrap();
        let ps = v.bond_prices(&[t, t + 0.5, t + 2.0, t + 10.0, t + 40.0]).unwrap();
        prop_assert!((ps[0] - 1.0).abs() < 1e-12);
        for w in ps.windows(2) {
            prop_assert!(w[1] <= w[0] && w[1] > 0.0);
        }
        prop_assert!(v.short_rate().unwrap() >= 0.0);
    }
}
