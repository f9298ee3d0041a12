//! Two-round LOCC protocols built from block-uniform measure collections on
//! Schmidt-index sequences, with exact error probabilities.
//!
//! A collection `{m_ω}` defines the test: Alice measures `M_ω = Σ m_ω(x)|x⟩⟨x|`
//! (or the complement), Bob measures in a basis unbiased to the support of
//! `m_ω`, and Alice finishes with a rank-one check. Only `m_ω` matters for
//! the error probabilities:
//! `β = Σ_ω |m_ω| Σ λ m_ω² / ((d_A d_B)^n Σ λ m_ω)` and
//! `α = 1 - Σ_ω Σ λ m_ω`.

mod dense;
mod hoeffding;
mod stein;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::LogSum;
use crate::spectrum::SchmidtSpectrum;
use crate::typelattice::{enumerate_types, multinomial};

pub use dense::{dense_oracle_evaluate, DENSE_DIM_LIMIT};
pub use hoeffding::{
    build_hoeffding_collection, build_zero_error_collection, hoeffding_bounds, partition_types,
    zero_error_log_beta_bound, HoeffdingBounds, TypePartition,
};
pub use stein::{build_stein_collection, shell_t0, stein_target_log_beta, ShellParams, MEASURE_BUDGET};

pub const COLLECTION_VERSION: &str = "v1";

/// Rational weight in `(0, 1]`, serialized as `"num/den"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(Ratio<u128>);

impl Weight {
    pub fn new(num: u128, den: u128) -> Result<Self> {
        if den == 0 || num == 0 || num > den {
            return Err(Error::arg(format!("weight {num}/{den} not in (0, 1]")));
        }
        Ok(Weight(Ratio::new(num, den)))
    }

    pub fn one() -> Self {
        Weight(Ratio::from_integer(1))
    }

    /// `1/k` for `k >= 1`.
    pub fn recip(k: u128) -> Self {
        assert!(k >= 1);
        Weight(Ratio::new_raw(1, k))
    }

    pub fn numer(&self) -> u128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u128 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::arg(format!("cannot parse weight `{s}`"));
        match s.split_once('/') {
            Some((a, b)) => Weight::new(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ),
            None => Weight::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod u128_str {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn one() -> u128 {
    1
}

/// `size` sequences of type `type_counts`, all weighted `weight`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasureBlock {
    pub type_counts: Vec<u32>,
    #[serde(with = "u128_str")]
    pub size: u128,
    pub weight: Weight,
}

/// One measure `m_ω`, repeated `multiplicity` times with the same per-type
/// profile. Repeats sit on different sequences of the named types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measure {
    #[serde(with = "u128_str", default = "one")]
    pub multiplicity: u128,
    pub blocks: Vec<MeasureBlock>,
}

impl Measure {
    pub fn single(blocks: Vec<MeasureBlock>) -> Self {
        Measure { multiplicity: 1, blocks }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureCollection {
    pub version: String,
    pub n: usize,
    pub d: usize,
    pub measures: Vec<Measure>,
}

impl MeasureCollection {
    pub fn new(n: usize, d: usize, measures: Vec<Measure>) -> Self {
        MeasureCollection {
            version: COLLECTION_VERSION.into(),
            n,
            d,
            measures,
        }
    }

    /// Total number of measures counting multiplicities.
    pub fn measure_count(&self) -> u128 {
        self.measures.iter().map(|m| m.multiplicity).sum()
    }

    /// Checks the structural invariants and returns the exact covered
    /// amount `Σ size·weight` per type.
    pub fn coverage(&self) -> Result<BTreeMap<Vec<u32>, BigRational>> {
        if self.version != COLLECTION_VERSION {
            return Err(Error::arg(format!("unsupported collection version `{}`", self.version)));
        }
        let mut cov: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        let mut card: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
        for (i, m) in self.measures.iter().enumerate() {
            if m.multiplicity == 0 {
                return Err(Error::Infeasible(format!("measure {i} has multiplicity 0")));
            }
            let mut used: BTreeMap<&[u32], u128> = BTreeMap::new();
            for b in &m.blocks {
                if b.type_counts.len() != self.d
                    || b.type_counts.iter().map(|&c| c as usize).sum::<usize>() != self.n
                {
                    return Err(Error::Infeasible(format!(
                        "measure {i}: {:?} is not a type of length {} over {} symbols",
                        b.type_counts, self.n, self.d
                    )));
                }
                if b.size == 0 {
                    return Err(Error::Infeasible(format!("measure {i}: empty block")));
                }
                let t = card.entry(b.type_counts.clone()).or_insert_with(|| multinomial(&b.type_counts));
                let u = used.entry(&b.type_counts).or_insert(0);
                *u = u.saturating_add(b.size);
                if BigUint::from(*u) > *t {
                    return Err(Error::Infeasible(format!(
                        "measure {i} uses {u} sequences of type {:?}, class has {t}",
                        b.type_counts
                    )));
                }
                let add = b.weight.to_big() * BigRational::from_integer(BigInt::from(b.size))
                    * BigRational::from_integer(BigInt::from(m.multiplicity));
                *cov.entry(b.type_counts.clone()).or_insert_with(BigRational::zero) += add;
            }
        }
        for (q, c) in &cov {
            let t = BigRational::from_integer(BigInt::from(card[q].clone()));
            if *c > t {
                return Err(Error::Infeasible(format!(
                    "type {q:?} covered {:.6} times its class size",
                    (c / t).to_f64().unwrap_or(f64::INFINITY)
                )));
            }
        }
        Ok(cov)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    UpperBound,
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub alpha: f64,
    pub beta: f64,
    pub log_beta: f64,
    pub provenance: Provenance,
}

fn check_dims(spec: &SchmidtSpectrum, coll: &MeasureCollection) -> Result<()> {
    if coll.d != spec.dim_min() {
        return Err(Error::arg(format!(
            "collection is over {} symbols, spectrum has {}",
            coll.d,
            spec.dim_min()
        )));
    }
    if coll.n == 0 {
        return Err(Error::arg("collection needs n >= 1"));
    }
    Ok(())
}

fn seq_log_mass(counts: &[u32], lambdas: &[f64]) -> f64 {
    counts.iter().zip(lambdas).map(|(&c, &l)| c as f64 * l.ln()).sum()
}

/// Exact error probabilities of the test defined by `coll`.
pub fn evaluate_test(spec: &SchmidtSpectrum, coll: &MeasureCollection) -> Result<TestOutcome> {
    check_dims(spec, coll)?;
    let cov = coll.coverage()?;
    let lam = spec.lambdas();
    let n = coll.n;

    let table = enumerate_types(coll.d, n)?;
    let mut alpha = LogSum::new();
    for i in 0..table.len() {
        let q = table.counts(i);
        let frac = match cov.get(q) {
            None => 1.0,
            Some(c) => {
                let t = BigRational::from_integer(BigInt::from(table.cardinality_big(i)));
                ((&t - c) / t).to_f64().unwrap_or(0.0)
            }
        };
        if frac > 0.0 {
            alpha.add(table.log_class_mass(i, lam) + frac.ln());
        }
    }

    let mut beta = LogSum::new();
    for (i, m) in coll.measures.iter().enumerate() {
        let mut card = 0f64;
        let (mut s1, mut s2) = (LogSum::new(), LogSum::new());
        for b in &m.blocks {
            let base = (b.size as f64).ln() + seq_log_mass(&b.type_counts, lam);
            let lw = b.weight.to_f64().ln();
            card += b.size as f64;
            s1.add(base + lw);
            s2.add(base + 2.0 * lw);
        }
        if m.blocks.is_empty() {
            return Err(Error::Infeasible(format!("measure {i} has zero mass")));
        }
        beta.add((m.multiplicity as f64).ln() + card.ln() + s2.value() - s1.value());
    }
    let log_beta = beta.value() - n as f64 * spec.log_dims();
    Ok(TestOutcome {
        alpha: alpha.value().exp().clamp(0.0, 1.0),
        beta: log_beta.exp().min(1.0),
        log_beta,
        provenance: Provenance::Exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SchmidtSpectrum {
        SchmidtSpectrum::new(vec![0.1, 0.9], 2, 2).unwrap()
    }

    fn block(c: &[u32], size: u128, w: Weight) -> MeasureBlock {
        MeasureBlock {
            type_counts: c.to_vec(),
            size,
            weight: w,
        }
    }

    #[test]
    fn single_full_measure() {
        let coll = MeasureCollection::new(
            1,
            2,
            vec![Measure::single(vec![block(&[1, 0], 1, Weight::one()), block(&[0, 1], 1, Weight::one())])],
        );
        let out = evaluate_test(&spec(), &coll).unwrap();
        assert_eq!(out.alpha, 0.0);
        assert!((out.beta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn indicator_of_one_symbol() {
        // after sorting, index 1 carries λ = 0.1
        let coll = MeasureCollection::new(1, 2, vec![Measure::single(vec![block(&[0, 1], 1, Weight::one())])]);
        let out = evaluate_test(&spec(), &coll).unwrap();
        assert!((out.alpha - 0.9).abs() < 1e-15);
        assert!((out.beta - 0.25).abs() < 1e-15);
    }

    #[test]
    fn overcoverage_rejected() {
        let m = Measure {
            multiplicity: 3,
            blocks: vec![block(&[1, 1], 1, Weight::new(1, 2).unwrap())],
        };
        let coll = MeasureCollection::new(2, 2, vec![m]);
        assert!(coll.coverage().is_ok());
        let mut bad = coll.clone();
        bad.measures[0].multiplicity = 5;
        assert!(matches!(bad.coverage(), Err(Error::Infeasible(_))));
        let mut bad = coll.clone();
        bad.measures[0].blocks[0].size = 3;
        assert!(matches!(bad.coverage(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn weight_round_trip() {
        let w = Weight::new(2, 6).unwrap();
        assert_eq!(w.to_string(), "1/3");
        let js = serde_json::to_string(&w).unwrap();
        assert_eq!(js, "\"1/3\"");
        assert_eq!(serde_json::from_str::<Weight>(&js).unwrap(), w);
        assert!(Weight::new(3, 2).is_err());
        assert!("0/1".parse::<Weight>().is_err());
    }

    #[test]
    fn collection_json_round_trip() {
        let coll = MeasureCollection::new(
            2,
            2,
            vec![Measure {
                multiplicity: 2,
                blocks: vec![block(&[1, 1], 1, Weight::new(1, 2).unwrap())],
            }],
        );
        let js = serde_json::to_value(&coll).unwrap();
        assert_eq!(js["version"], "v1");
        assert_eq!(js["measures"][0]["multiplicity"], "2");
        let back: MeasureCollection = serde_json::from_value(js).unwrap();
        assert_eq!(back, coll);
    }
}
