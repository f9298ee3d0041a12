//! Type-method collections: the Hoeffding-achieving family and the
//! zero-error family.

use num_traits::ToPrimitive;

use super::{Measure, MeasureBlock, MeasureCollection, Weight};
use crate::error::{Error, Result};
use crate::exponents::two_way_sup;
use crate::numeric::{kl, shannon};
use crate::spectrum::{renyi, SchmidtSpectrum};
use crate::typelattice::{enumerate_types, type_count, TypeTable};

const CLASS_TOL: f64 = 1e-12;

/// Split of the types of length `n` used by the constructions. Indices refer
/// to the lexicographic [`TypeTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct TypePartition {
    /// `D(Q‖P) - H(Q) < -H(P)` and `D(Q‖P) <= r`
    pub rate_set: Vec<usize>,
    /// `D(Q‖P) - H(Q) >= -H(P)`
    pub prime: Vec<usize>,
    /// `D(Q‖P) - H(Q) < -H(P)` and `D(Q‖P) > r`; never covered
    pub complement: Vec<usize>,
    /// element of `prime` closest to `P` in relative entropy
    pub p_n: usize,
}

/// Partitions the types. `rate = None` puts every type below the entropy
/// line into `rate_set`.
pub fn partition_types(table: &TypeTable, p: &[f64], rate: Option<f64>) -> Result<TypePartition> {
    let h = shannon(p);
    let mut part = TypePartition {
        rate_set: vec![],
        prime: vec![],
        complement: vec![],
        p_n: usize::MAX,
    };
    let mut best = f64::INFINITY;
    for i in 0..table.len() {
        let q = table.distribution(i);
        let d = kl(&q, p);
        let gap = d - shannon(&q) + h;
        if gap >= -CLASS_TOL {
            part.prime.push(i);
            if d < best - CLASS_TOL {
                best = d;
                part.p_n = i;
            }
        } else if rate.map_or(true, |r| d <= r + CLASS_TOL) {
            part.rate_set.push(i);
        } else {
            part.complement.push(i);
        }
    }
    if part.prime.is_empty() {
        return Err(Error::EmptySet("no type on or above the entropy line".into()));
    }
    Ok(part)
}

fn block(table: &TypeTable, i: usize, size: u128, weight: Weight) -> MeasureBlock {
    MeasureBlock {
        type_counts: table.counts(i).to_vec(),
        size,
        weight,
    }
}

fn indicator(table: &TypeTable, i: usize) -> Result<Measure> {
    Ok(Measure::single(vec![block(table, i, table.cardinality(i)?, Weight::one())]))
}

/// Splits `total` into `parts` sizes differing by at most one, larger first.
fn split_sizes(total: u128, parts: u128) -> (u128, u128, u128) {
    (total / parts, total % parts, parts - total % parts)
}

fn build(spec: &SchmidtSpectrum, n: usize, rate: Option<f64>) -> Result<MeasureCollection> {
    if spec.is_uniform() {
        return Err(Error::Uniform);
    }
    let p = spec.lambdas();
    let table = enumerate_types(p.len(), n)?;
    let part = partition_types(&table, p, rate)?;
    if rate.is_some() && part.rate_set.is_empty() {
        return Err(Error::EmptySet(format!(
            "no type with D(Q||P) <= {} below the entropy line at n = {n}",
            rate.unwrap_or_default()
        )));
    }
    let mut measures = Vec::new();
    let pn_card = table.cardinality(part.p_n)?;
    let pieces = part.rate_set.len() as u128;
    if pieces == 0 {
        measures.push(indicator(&table, part.p_n)?);
    } else {
        let (base, big, _) = split_sizes(pn_card, pieces);
        for (pos, &q) in part.rate_set.iter().enumerate() {
            let piece = base + u128::from((pos as u128) < big);
            let card = table.cardinality(q)?;
            if piece == 0 {
                // T(P_n) has fewer sequences than there are types to pair with
                measures.push(indicator(&table, q)?);
                continue;
            }
            let k = card.div_ceil(piece);
            let (size, n_big, n_small) = split_sizes(card, k);
            let tail = block(&table, part.p_n, piece, Weight::recip(k));
            for (mult, s) in [(n_big, size + 1), (n_small, size)] {
                if mult > 0 {
                    measures.push(Measure {
                        multiplicity: mult,
                        blocks: vec![block(&table, q, s, Weight::one()), tail.clone()],
                    });
                }
            }
        }
    }
    for &q in &part.prime {
        if q != part.p_n {
            measures.push(indicator(&table, q)?);
        }
    }
    Ok(MeasureCollection::new(n, p.len(), measures))
}

/// Collection achieving the two-way Hoeffding exponent at rate `r`.
/// Types far from `P` on the low-entropy side stay uncovered.
pub fn build_hoeffding_collection(spec: &SchmidtSpectrum, n: usize, r: f64) -> Result<MeasureCollection> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::arg(format!("rate {r} must be finite and non-negative")));
    }
    build(spec, n, Some(r))
}

/// Collection covering every sequence, so `α = 0`.
pub fn build_zero_error_collection(spec: &SchmidtSpectrum, n: usize) -> Result<MeasureCollection> {
    build(spec, n, None)
}

/// Explicit finite-n guarantees of the Hoeffding collection, as logarithms.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HoeffdingBounds {
    pub log_alpha: f64,
    pub log_beta: f64,
}

fn log_type_count(d: usize, n: usize) -> Result<f64> {
    type_count(d, n)
        .and_then(|c| c.to_f64())
        .map(f64::ln)
        .ok_or_else(|| Error::arg("type count overflow"))
}

/// `α <= |T_n| e^{-nr}` and
/// `β <= 8d |T_n|³ e^{-n sup_s(-2sr/(1-s) - H_{(1+s)/2})} / (d_A d_B)^n`.
pub fn hoeffding_bounds(spec: &SchmidtSpectrum, n: usize, r: f64) -> Result<HoeffdingBounds> {
    let p = spec.lambdas();
    let d = p.len();
    let lt = log_type_count(d, n)?;
    let nf = n as f64;
    Ok(HoeffdingBounds {
        log_alpha: lt - nf * r,
        log_beta: (8.0 * d as f64).ln() + 3.0 * lt - nf * two_way_sup(p, r) - nf * spec.log_dims(),
    })
}

/// `log(4 |T_n|³ (d_A d_B)^{-n} e^{n H_{1/2}})`.
pub fn zero_error_log_beta_bound(spec: &SchmidtSpectrum, n: usize) -> Result<f64> {
    let p = spec.lambdas();
    let nf = n as f64;
    Ok(4f64.ln() + 3.0 * log_type_count(p.len(), n)? - nf * spec.log_dims() + nf * renyi(p, 0.5))
}
