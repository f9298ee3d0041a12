mod common;

use common::prob;
use locc_exponents::typelattice::{enumerate_types, exact_tail, log_total_mass, neyman_pearson_log_beta, type_count, Side};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn total_mass_is_one(p in prob(2..=4), n in 1usize..25) {
        let t = enumerate_types(p.len(), n).unwrap();
        prop_assert_eq!(t.len() as u128, type_count(p.len(), n).unwrap());
        prop_assert!(log_total_mass(&t, &p).abs() <= 1e-12);
    }

    #[test]
    fn tail_and_strict_complement_sum_to_one(p in prob(2..=4), n in 1usize..20, r in -3.0f64..0.0) {
        let x: Vec<f64> = p.iter().map(|v| v.ln()).collect();
        // shift off any lattice point so the two sides do not overlap
        let t = enumerate_types(p.len(), n).unwrap();
        let hit = (0..t.len()).any(|i| {
            let s: f64 = t.counts(i).iter().zip(&x).map(|(&k, v)| k as f64 * v).sum();
            (s - n as f64 * r).abs() < 1e-8
        });
        prop_assume!(!hit);
        let ge = exact_tail(&p, &x, n, r, Side::Ge).unwrap().exp();
        let le = exact_tail(&p, &x, n, r, Side::Le).unwrap().exp();
        prop_assert!((ge + le - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn neyman_pearson_curve_is_convex_and_non_increasing(p in prob(2..=3), q in prob(2..=3), n in 1usize..10) {
        prop_assume!(p.len() == q.len());
        let f = |a: f64| neyman_pearson_log_beta(&p, &q, n, a).unwrap().exp();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let v: Vec<f64> = grid.iter().map(|&a| f(a)).collect();
        for w in v.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for w in v.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
        }
    }
}
