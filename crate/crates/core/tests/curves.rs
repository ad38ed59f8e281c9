use inforate::model::{draw_crisis_time, Sign};
use inforate::{ConditionalDensityView, DiscountCurve, MarketState, ModelSpec, PhiFunction};

#[test]
fn every_curve_kind_calibrates_at_time_zero() {
    let curves = [
        DiscountCurve::flat(0.03).unwrap(),
        DiscountCurve::table(&[(0.5, 0.99), (2.0, 0.955), (5.0, 0.88), (20.0, 0.55)]).unwrap(),
        DiscountCurve::parametric(|t| (-(0.015 * t + 0.0004 * t * t)).exp(), None).unwrap(),
    ];
    let m = ModelSpec::brownian(PhiFunction::exp_decay(0.04, Sign::Positive).unwrap(), 0.4).unwrap();
    for c in &curves {
        let v = ConditionalDensityView::new(c, &m, MarketState::initial(&m)).unwrap();
        for t in [0.25, 1.0, 3.3, 12.0, 45.0] {
            let p = v.bond_price(t).unwrap();
            assert!((p / c.discount(t).unwrap() - 1.0).abs() < 1e-9, "{:?} T={t}", c.kind());
        }
    }
}

#[test]
fn crisis_times_follow_the_curve() {
    let c = DiscountCurve::table(&[(1.0, 0.97), (5.0, 0.85), (10.0, 0.7)]).unwrap();
    let n = 20_000;
    let below_five = (0..n)
        .map(|i| draw_crisis_time(&c, (i as f64 + 0.5) / n as f64).unwrap())
        .filter(|&x| x < 5.0)
        .count();
    // stratified uniforms: the fraction below 5 is 1 - P(5) to within 1/n
    assert!((below_five as f64 / n as f64 - 0.15).abs() <= 1.0 / n as f64);
}

#[test]
fn rejects_invalid_curves() {
    assert!(DiscountCurve::flat(-0.01).is_err());
    assert!(DiscountCurve::table(&[(1.0, 0.99), (2.0, 1.01)]).is_err());
    assert!(DiscountCurve::parametric(|t| 1.0 + 0.0 * t, None).is_err());
}
