//! Method of types over a finite alphabet: enumeration of compositions,
//! exact tails of i.i.d. sums, exact Neyman-Pearson trade-offs and the exact
//! one-way LOCC type-2 error.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::numeric::{check_probability, log_sum_exp, LogSum};
use crate::spectrum::SchmidtSpectrum;

/// Maximum number of types a table may hold.
pub const TYPE_BUDGET: u128 = 10_000_000;
const PROB_TOL: f64 = 1e-12;

/// Which side of the threshold a tail collects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    /// `Σ X_i >= nR` (inclusive)
    Ge,
    /// `Σ X_i <= nR` (inclusive)
    Le,
}

/// `C(n+d-1, d-1)`, or `None` on overflow.
pub fn type_count(d: usize, n: usize) -> Option<u128> {
    if d == 0 {
        return Some(0);
    }
    let k = (d - 1) as u128;
    let m = (n + d - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul(m - i)? / (i + 1);
    }
    Some(c)
}

/// All types of length `n` over `d` symbols, in lexicographic order of their
/// count vectors, with `log |T_n(Q)|`.
#[derive(Debug, Clone)]
pub struct TypeTable {
    d: usize,
    n: usize,
    counts: Vec<u32>,
    log_card: Vec<f64>,
    log_fact: Vec<f64>,
}

impl TypeTable {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.log_card.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_card.is_empty()
    }

    pub fn counts(&self, i: usize) -> &[u32] {
        &self.counts[i * self.d..(i + 1) * self.d]
    }

    pub fn log_cardinality(&self, i: usize) -> f64 {
        self.log_card[i]
    }

    /// `log p^n(x)` for any sequence `x` of type `i`.
    pub fn per_sequence_log_mass(&self, i: usize, p: &[f64]) -> f64 {
        seq_log_mass(self.counts(i), p)
    }

    /// `log p^n(T_n(Q_i))`.
    pub fn log_class_mass(&self, i: usize, p: &[f64]) -> f64 {
        self.log_card[i] + self.per_sequence_log_mass(i, p)
    }

    /// Exact `|T_n(Q_i)|`.
    pub fn cardinality_big(&self, i: usize) -> BigUint {
        multinomial(self.counts(i))
    }

    /// Exact `|T_n(Q_i)|` when it fits in `u128`.
    pub fn cardinality(&self, i: usize) -> Result<u128> {
        self.cardinality_big(i).to_u128().ok_or_else(|| Error::Budget {
            what: "type class cardinality",
            needed: format!("exp({:.1})", self.log_card[i]),
            limit: "2^128".into(),
        })
    }

    /// Empirical distribution of type `i`.
    pub fn distribution(&self, i: usize) -> Vec<f64> {
        self.counts(i).iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// Index of a count vector, by binary search over the lexicographic order.
    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        if counts.len() != self.d {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.counts(mid).cmp(counts) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// `log k!` for `k <= n`.
    pub fn log_factorial(&self, k: usize) -> f64 {
        self.log_fact[k]
    }
}

fn seq_log_mass(counts: &[u32], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&c, &pi) in counts.iter().zip(p) {
        if c > 0 {
            if pi <= 0.0 {
                return f64::NEG_INFINITY;
            }
            s += c as f64 * pi.ln();
        }
    }
    s
}

pub(crate) fn multinomial(counts: &[u32]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total: u64 = 0;
    for &c in counts {
        for j in 1..=c as u64 {
            total += 1;
            acc *= total;
            acc /= j;
        }
    }
    acc
}

pub fn enumerate_types(d: usize, n: usize) -> Result<TypeTable> {
    if d == 0 || n == 0 {
        return Err(Error::arg("types need d >= 1 and n >= 1"));
    }
    let count = type_count(d, n).filter(|&c| c <= TYPE_BUDGET).ok_or_else(|| Error::Budget {
        what: "type enumeration",
        needed: type_count(d, n).map_or("overflow".into(), |c| c.to_string()),
        limit: TYPE_BUDGET.to_string(),
    })? as usize;
    let mut log_fact = vec![0.0; n + 1];
    for k in 1..=n {
        log_fact[k] = log_fact[k - 1] + (k as f64).ln();
    }
    let mut counts = Vec::with_capacity(count * d);
    let mut log_card = Vec::with_capacity(count);
    let mut cur = vec![0u32; d];
    fill(&mut cur, 0, n as u32, &mut counts);
    for chunk in counts.chunks(d) {
        let lc = log_fact[n] - chunk.iter().map(|&c| log_fact[c as usize]).sum::<f64>();
        log_card.push(lc);
    }
    debug_assert_eq!(log_card.len(), count);
    Ok(TypeTable {
        d,
        n,
        counts,
        log_card,
        log_fact,
    })
}

fn fill(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<u32>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.extend_from_slice(cur);
        return;
    }
    for c in 0..=left {
        cur[pos] = c;
        fill(cur, pos + 1, left - c, out);
    }
}

fn clears(sum: f64, target: f64, side: Side) -> bool {
    let tol = 1e-10 * target.abs().max(sum.abs()).max(1.0);
    match side {
        Side::Ge => sum >= target - tol,
        Side::Le => sum <= target + tol,
    }
}

/// `log w^n{Σ X_i >= nR}` (or `<=`) for a non-negative weight vector `w`.
pub fn exact_tail_weighted(w: &[f64], x: &[f64], n: usize, r: f64, side: Side) -> Result<f64> {
    if w.len() != x.len() {
        return Err(Error::arg("weights and values differ in length"));
    }
    if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::arg("weights must be finite and non-negative"));
    }
    let table = enumerate_types(w.len(), n)?;
    let target = n as f64 * r;
    let mut acc = LogSum::new();
    for i in 0..table.len() {
        let c = table.counts(i);
        let s: f64 = c.iter().zip(x).map(|(&k, &v)| k as f64 * v).sum();
        if clears(s, target, side) {
            acc.add(table.log_class_mass(i, w));
        }
    }
    Ok(acc.value())
}

/// Exact `log P(Σ X_i >= nR)` (or `<=`) for i.i.d. `X` with law `p`.
pub fn exact_tail(p: &[f64], x: &[f64], n: usize, r: f64, side: Side) -> Result<f64> {
    check_probability(p, PROB_TOL, true).map_err(Error::InvalidDistribution)?;
    exact_tail_weighted(p, x, n, r, side)
}

/// Exact optimal `log β` of the randomized Neyman-Pearson test of `p^n`
/// against `q^n` at type-1 level `alpha`.
pub fn neyman_pearson_log_beta(p: &[f64], q: &[f64], n: usize, alpha: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::arg("null and alternative differ in length"));
    }
    check_probability(p, PROB_TOL, true).map_err(Error::InvalidDistribution)?;
    check_probability(q, PROB_TOL, true).map_err(Error::InvalidDistribution)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::arg(format!("alpha = {alpha} outside [0,1]")));
    }
    if alpha == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let table = enumerate_types(p.len(), n)?;
    // (log-likelihood ratio, log P-mass, log Q-mass)
    let mut classes: Vec<(f64, f64, f64, usize)> = (0..table.len())
        .filter_map(|i| {
            let lq = table.per_sequence_log_mass(i, q);
            if lq == f64::NEG_INFINITY {
                return None;
            }
            let lp = table.per_sequence_log_mass(i, p);
            let lc = table.log_cardinality(i);
            Some((lq - lp, lc + lp, lc + lq, i))
        })
        .collect();
    // descending ratio; null-free classes (ratio +inf) first; ties by counts
    classes.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.3.cmp(&b.3)));
    let mut budget = alpha;
    let mut accepted = LogSum::new();
    let mut k = 0;
    while k < classes.len() {
        let (_, lp, lq, _) = classes[k];
        k += 1;
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let mass = lp.exp();
        if mass <= budget * (1.0 + 1e-12) {
            budget -= mass;
            continue;
        }
        let frac = (budget / mass).clamp(0.0, 1.0);
        accepted.add(lq + (1.0 - frac).ln());
        break;
    }
    for c in &classes[k..] {
        accepted.add(c.2);
    }
    Ok(accepted.value())
}

/// Exact optimal `β` of the randomized Neyman-Pearson test.
pub fn neyman_pearson_exact(p: &[f64], q: &[f64], n: usize, alpha: f64) -> Result<f64> {
    neyman_pearson_log_beta(p, q, n, alpha).map(f64::exp)
}

/// Exact `log β_{n,→}(alpha | Ψ || ρ_mix)`. The dephased state puts the
/// Schmidt masses on `d` diagonal outcomes; off-diagonal outcomes carry no
/// null mass and are rejected for free, so only the `d^n` diagonal sequences
/// contribute, each with alternative mass `(d_A d_B)^{-n}`.
pub fn one_way_log_beta_exact(spec: &SchmidtSpectrum, n: usize, alpha: f64) -> Result<f64> {
    let d = spec.dim_min();
    let uniform = vec![1.0 / d as f64; d];
    let inner = neyman_pearson_log_beta(spec.lambdas(), &uniform, n, alpha)?;
    Ok(inner + n as f64 * ((d as f64).ln() - spec.log_dims()))
}

pub fn one_way_beta_exact(spec: &SchmidtSpectrum, n: usize, alpha: f64) -> Result<f64> {
    one_way_log_beta_exact(spec, n, alpha).map(f64::exp)
}

/// `log Σ exp` over a table column, used by callers that need total masses.
pub fn log_total_mass(table: &TypeTable, p: &[f64]) -> f64 {
    let v: Vec<f64> = (0..table.len()).map(|i| table.log_class_mass(i, p)).collect();
    log_sum_exp(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_of_small_tables() {
        assert_eq!(enumerate_types(2, 10).unwrap().len(), 11);
        assert_eq!(enumerate_types(3, 4).unwrap().len(), 15);
        assert_eq!(type_count(3, 4), Some(15));
        let t = enumerate_types(2, 10).unwrap();
        assert!(t.len() as f64 <= 11f64.powi(1));
        assert_eq!(t.counts(0), &[0, 10]);
        assert_eq!(t.counts(10), &[10, 0]);
        assert_eq!(t.index_of(&[3, 7]), Some(3));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(enumerate_types(10, 200), Err(Error::Budget { .. })));
    }

    #[test]
    fn log_cardinality_matches_exact() {
        let t = enumerate_types(3, 30).unwrap();
        for i in (0..t.len()).step_by(17) {
            let exact = t.cardinality(i).unwrap() as f64;
            assert!((t.log_cardinality(i) - exact.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn tail_examples() {
        let p = [0.5, 0.5];
        let x = [0.0, 1.0];
        assert!(exact_tail(&p, &x, 20, -1.0, Side::Ge).unwrap().abs() < 1e-12);
        let v = exact_tail(&p, &x, 20, 0.75, Side::Ge).unwrap();
        assert!((v - (21700.0f64 / 1048576.0).ln()).abs() < 1e-12);
        let q = [0.1, 0.9];
        let xq = [-(0.1f64.ln()), -(0.9f64.ln())];
        let h = crate::numeric::shannon(&q);
        let v = exact_tail(&q, &xq, 1, h, Side::Ge).unwrap();
        assert!((v - 0.1f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn np_examples() {
        let p = [0.5, 0.0, 0.0, 0.5];
        let q = [0.25; 4];
        assert!((neyman_pearson_exact(&p, &q, 1, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((neyman_pearson_exact(&p, &q, 1, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(neyman_pearson_exact(&p, &q, 1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn one_way_examples() {
        let s = SchmidtSpectrum::new(vec![0.5, 0.5], 2, 2).unwrap();
        assert!((one_way_beta_exact(&s, 1, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((one_way_beta_exact(&s, 1, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(one_way_beta_exact(&s, 1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn one_way_matches_full_dephased_test() {
        let s = SchmidtSpectrum::new(vec![0.2, 0.5, 0.3], 3, 4).unwrap();
        let (p, q) = crate::spectrum::sigma_psi(&s);
        for &a in &[0.0, 0.05, 0.3, 0.77] {
            let full = neyman_pearson_log_beta(&p, &q, 2, a).unwrap();
            let fast = one_way_log_beta_exact(&s, 2, a).unwrap();
            assert!((full - fast).abs() < 1e-12, "{a}: {full} vs {fast}");
        }
    }
}
