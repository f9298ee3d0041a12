#![allow(dead_code)]

use locc_exponents::SchmidtSpectrum;
use proptest::prelude::*;
use rand::Rng;

/// Normalized probability vector with entries bounded away from zero.
pub fn prob(d: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    d.prop_flat_map(|d| prop::collection::vec(0.02f64..1.0, d)).prop_map(normalize)
}

pub fn normalize(raw: Vec<f64>) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn random_prob<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    normalize((0..d).map(|_| rng.gen_range(0.02..1.0)).collect())
}

pub fn spectrum(p: &[f64]) -> SchmidtSpectrum {
    SchmidtSpectrum::new(p.to_vec(), p.len(), p.len()).unwrap()
}

pub fn non_uniform(p: &[f64]) -> bool {
    let (lo, hi) = p.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo > 1e-3
}

use locc_exponents::protocol::{Measure, MeasureBlock, MeasureCollection, Weight};
use locc_exponents::typelattice::enumerate_types;

/// Tiny random instance the dense oracle can build: `(d_A d_B)^n <= 81`.
pub fn random_tiny_instance<R: Rng>(rng: &mut R) -> (SchmidtSpectrum, MeasureCollection) {
    let (da, db, n) = [(2, 2, 1), (2, 2, 2), (3, 3, 1), (3, 3, 2), (2, 3, 1), (2, 4, 2), (3, 2, 1)][rng.gen_range(0..7)];
    let d = da.min(db);
    let p = random_prob(rng, d);
    let spec = SchmidtSpectrum::new(p, da, db).unwrap();
    let table = enumerate_types(d, n).unwrap();
    let k = rng.gen_range(1..=3u128);
    let mut measures = vec![];
    let mut left = k;
    while left > 0 {
        let mult = rng.gen_range(1..=left);
        left -= mult;
        let mut blocks = vec![];
        for i in 0..table.len() {
            let card = table.cardinality(i).unwrap();
            let cap = card / mult;
            if cap == 0 || rng.gen_bool(0.3) {
                continue;
            }
            blocks.push(MeasureBlock {
                type_counts: table.counts(i).to_vec(),
                size: rng.gen_range(1..=cap),
                weight: Weight::recip(k),
            });
        }
        if blocks.is_empty() {
            blocks.push(MeasureBlock { type_counts: table.counts(0).to_vec(), size: 1, weight: Weight::recip(k) });
        }
        measures.push(Measure { multiplicity: mult, blocks });
    }
    (spec, MeasureCollection::new(n, d, measures))
}
