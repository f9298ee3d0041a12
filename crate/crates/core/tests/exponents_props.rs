mod common;

use common::{non_uniform, prob, spectrum};
use locc_exponents::exponents::{
    chernoff_rate, critical_rates, dual_divergence_minus_entropy, min_divergence_minus_entropy, two_way_sup,
    ClassTag, ExponentCurve, RateConstraint,
};
use locc_exponents::spectrum::renyi;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn primal_equals_dual(p in prob(2..=5), r in 0.001f64..2.0) {
        prop_assume!(non_uniform(&p));
        let primal = min_divergence_minus_entropy(&p, RateConstraint::AtMost(r)).unwrap();
        let dual = dual_divergence_minus_entropy(&p, r).unwrap();
        prop_assert!((primal - dual).abs() <= 1e-7, "primal {primal} dual {dual}");
    }

    #[test]
    fn two_way_dominates_one_way(p in prob(2..=5), r in 0.0f64..3.0) {
        let s = spectrum(&p);
        let one = ExponentCurve::new(&s, ClassTag::OneWay).evaluate(r);
        let two = ExponentCurve::new(&s, ClassTag::TwoWay).evaluate(r);
        let global = ExponentCurve::new(&s, ClassTag::Global).evaluate(r);
        prop_assert!(two >= one - 1e-9);
        prop_assert!(global >= two - 1e-9);
    }

    #[test]
    fn curves_are_non_increasing(p in prob(2..=5), r in 0.0f64..2.0, dr in 0.001f64..0.5) {
        let s = spectrum(&p);
        for tag in [ClassTag::OneWay, ClassTag::TwoWay] {
            let c = ExponentCurve::new(&s, tag);
            prop_assert!(c.evaluate(r + dr) <= c.evaluate(r) + 1e-9);
        }
    }

    #[test]
    fn plateau_is_reached_continuously(p in prob(2..=5)) {
        prop_assume!(non_uniform(&p));
        let s = spectrum(&p);
        let l = s.log_dims();
        let (r1, r2) = critical_rates(&s);
        let one = ExponentCurve::new(&s, ClassTag::OneWay);
        let two = ExponentCurve::new(&s, ClassTag::TwoWay);
        prop_assert!((one.evaluate(r1) - (l - renyi(&p, 0.0))).abs() <= 1e-12);
        prop_assert!((two.evaluate(r2) - (l - renyi(&p, 0.5))).abs() <= 1e-12);
        prop_assert!((one.evaluate(r1 * (1.0 - 1e-6)) - one.plateau_value).abs() <= 1e-4);
        prop_assert!((two.evaluate(r2 * (1.0 - 1e-6)) - two.plateau_value).abs() <= 1e-4);
    }

    #[test]
    fn zero_rate_limit_is_relative_entropy(p in prob(2..=5)) {
        prop_assume!(non_uniform(&p));
        let s = spectrum(&p);
        let target = s.log_dims() - renyi(&p, 1.0);
        for tag in [ClassTag::OneWay, ClassTag::TwoWay] {
            let e = ExponentCurve::new(&s, tag).evaluate(1e-9);
            prop_assert!((e - target).abs() <= 1e-4, "{tag}: {e} vs {target}");
        }
    }

    #[test]
    fn chernoff_rate_is_a_fixed_point(p in prob(2..=4)) {
        let s = spectrum(&p);
        for tag in [ClassTag::OneWay, ClassTag::TwoWay] {
            let c = ExponentCurve::new(&s, tag);
            let r = chernoff_rate(&c).unwrap();
            prop_assert!((c.evaluate(r) - r).abs() <= 1e-9);
        }
    }
}

#[test]
fn optimizer_matches_dense_grid() {
    let cases: [(&[f64], f64); 4] = [(&[0.1, 0.9], 0.2), (&[0.2, 0.3, 0.5], 0.05), (&[0.05, 0.15, 0.8], 0.4), (&[0.4, 0.6], 0.01)];
    for (p, r) in cases {
        let grid = (0..100_000)
            .map(|i| {
                let s = i as f64 / 100_000.0;
                -2.0 * s * r / (1.0 - s) - renyi(p, (1.0 + s) / 2.0)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let opt = two_way_sup(p, r);
        assert!(opt >= grid - 1e-10, "{p:?} r={r}: {opt} < grid {grid}");
        assert!(opt - grid <= 1e-6, "{p:?} r={r}: {opt} vs grid {grid}");
    }
}

#[test]
fn uniform_spectrum_curves_coincide() {
    for d in 2..=5 {
        let s = locc_exponents::SchmidtSpectrum::maximally_entangled(d).unwrap();
        let one = ExponentCurve::new(&s, ClassTag::OneWay);
        let two = ExponentCurve::new(&s, ClassTag::TwoWay);
        for i in 0..50 {
            let r = i as f64 * 0.05;
            assert!((one.evaluate(r) - two.evaluate(r)).abs() <= 1e-12);
        }
    }
}
