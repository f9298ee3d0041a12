//! Shell construction reaching the second-order Stein-Strassen term.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Measure, MeasureBlock, MeasureCollection, Weight};
use crate::error::{Error, Result};
use crate::numeric::{bisect, log_sum_exp};
use crate::sld::lattice_span;
use crate::spectrum::{gaussian_quantile, renyi, varentropy_of, SchmidtSpectrum};
use crate::typelattice::enumerate_types;

/// Upper limit on the number of measures `M = floor(e^{nb})`.
pub const MEASURE_BUDGET: u128 = 10_000_000;

/// Shell parameters: width `c`, decay `a < c`, measure count exponent `b`
/// and depth `t`, with shells `k = 0..=floor(tn)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub t: f64,
}

impl ShellParams {
    /// `c` is the lattice span of `-log λ` (1 if non-lattice), `a = c/2`,
    /// `b = 0.2` and `t = 0.9 t_0`.
    pub fn defaults(spec: &SchmidtSpectrum) -> Result<Self> {
        let p = spec.lambdas();
        let x: Vec<f64> = p.iter().map(|v| -v.ln()).collect();
        let span = lattice_span(p, &x)?;
        let c = if span > 0.0 { span } else { 1.0 };
        let (a, b) = (0.5 * c, 0.2);
        let t = 0.9 * shell_t0(p, a, b, c)?;
        Ok(ShellParams { a, b, c, t })
    }

    fn check(&self) -> Result<()> {
        let ok = self.a > 0.0 && self.c > self.a && self.b > 0.0 && self.t > 0.0;
        if !ok || ![self.a, self.b, self.c, self.t].iter().all(|v| v.is_finite()) {
            return Err(Error::arg(format!("shell parameters {self:?} need c > a > 0, b > 0, t > 0")));
        }
        Ok(())
    }
}

/// `min_{s>=0} s(H_1 - H_{1+s}) - s c t`, which is `-∞` once
/// `ct > H_1 - H_∞`.
fn inner_min(p: &[f64], h1: f64, hinf: f64, ct: f64) -> f64 {
    if ct >= h1 - hinf {
        return f64::NEG_INFINITY;
    }
    let lp: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    // s H_{1+s} = -log Σ p^{1+s}; the objective is convex in s
    let g = |s: f64| s * (h1 - ct) + log_sum_exp(&lp.iter().map(|l| (1.0 + s) * l).collect::<Vec<_>>());
    let dg = |s: f64| {
        let w: Vec<f64> = lp.iter().map(|l| (1.0 + s) * l).collect();
        let z = log_sum_exp(&w);
        h1 - ct + w.iter().zip(&lp).map(|(wi, l)| (wi - z).exp() * l).sum::<f64>()
    };
    let mut hi = 1.0;
    while dg(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return g(hi);
        }
    }
    g(bisect(dg, 0.0, hi, 1e-13, true))
}

/// Root of the strictly decreasing
/// `f(t) = b + min_{s>=0} [s(H_1 - H_{1+s}) - (sc + c - a)t]`.
pub fn shell_t0(p: &[f64], a: f64, b: f64, c: f64) -> Result<f64> {
    ShellParams { a, b, c, t: 1.0 }.check()?;
    let h1 = renyi(p, 1.0);
    let hinf = -p.iter().cloned().fold(0.0, f64::max).ln();
    let f = |t: f64| b - (c - a) * t + inner_min(p, h1, hinf, c * t);
    let hi = (h1 - hinf) / c;
    if f(hi * (1.0 - 1e-12)) > 0.0 {
        // f drops to -∞ past the cusp
        return Ok(hi);
    }
    Ok(bisect(f, 0.0, hi, 1e-13, false))
}

/// Target of the construction:
/// `-n(log d_A d_B - H_1) - √(nV) Φ^{-1}(1 - ε) - log n`, without the O(1).
pub fn stein_target_log_beta(spec: &SchmidtSpectrum, n: usize, eps: f64) -> Result<f64> {
    let p = spec.lambdas();
    let nf = n as f64;
    Ok(-nf * (spec.log_dims() - renyi(p, 1.0)) - (nf * varentropy_of(p)).sqrt() * gaussian_quantile(1.0 - eps)? - nf.ln())
}

/// Contiguous runs of one shell, in type order: `(type index, count)`.
struct Shell {
    runs: Vec<(usize, u128)>,
    size: u128,
}

/// Collection with `α ≈ eps`. Sequences with
/// `-log λ^n` in `(thr - c(k+1), thr - ck]`, `thr = nH + √(nV) Φ^{-1}(1-eps)`,
/// form shell `k`; each of the `M` measures takes a cyclic window of `N_k`
/// sequences from every shell, weighted so the measures sum to one there.
pub fn build_stein_collection(
    spec: &SchmidtSpectrum,
    n: usize,
    eps: f64,
    params: ShellParams,
) -> Result<MeasureCollection> {
    params.check()?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg(format!("eps = {eps} must lie in (0, 1)")));
    }
    if spec.is_uniform() {
        return Err(Error::Uniform);
    }
    let p = spec.lambdas();
    let nf = n as f64;
    let thr = nf * renyi(p, 1.0) + (nf * varentropy_of(p)).sqrt() * gaussian_quantile(1.0 - eps)?;
    let depth = (params.t * nf).floor() as usize;

    let table = enumerate_types(p.len(), n)?;
    let mut shells: Vec<Shell> = (0..=depth).map(|_| Shell { runs: vec![], size: 0 }).collect();
    for i in 0..table.len() {
        let x = -table.per_sequence_log_mass(i, p);
        if x > thr {
            continue;
        }
        let k = ((thr - x) / params.c + 1e-12).floor() as usize;
        if k <= depth {
            let card = table.cardinality(i)?;
            shells[k].runs.push((i, card));
            shells[k].size += card;
        }
    }
    if shells[0].size == 0 {
        return Err(Error::EmptySet(format!("no sequence in the top shell at n = {n}")));
    }

    let m_real = (nf * params.b).exp();
    if m_real >= MEASURE_BUDGET as f64 {
        return Err(Error::Budget {
            what: "measure count",
            needed: format!("{m_real:.3e}"),
            limit: MEASURE_BUDGET.to_string(),
        });
    }
    let m = (m_real.floor() as u128).max(1);
    let n_top = shells[0].size as f64 / m as f64;

    let mut per_measure: Vec<Vec<MeasureBlock>> = vec![Vec::new(); m as usize];
    for (k, shell) in shells.iter().enumerate() {
        if shell.size == 0 {
            continue;
        }
        let target = (n_top * (-(k as f64) * params.a).exp()).round().max(1.0) as u128;
        let nk = target.max(shell.size.div_ceil(m));
        if nk > shell.size {
            return Err(Error::ShellTooSmall {
                k,
                needed: nk,
                available: shell.size,
            });
        }
        let total = m * nk;
        let (q, rem) = (total / shell.size, total % shell.size);
        for (j, blocks) in per_measure.iter_mut().enumerate() {
            let start = (j as u128 * nk) % shell.size;
            let end = start + nk;
            let mut ranges = vec![(start, end.min(shell.size))];
            if end > shell.size {
                ranges.push((0, end - shell.size));
            }
            for (lo, hi) in ranges {
                // coverage is q + 1 on [0, rem) and q elsewhere
                for (clo, chi, cover) in [(0, rem, q + 1), (rem, shell.size, q)] {
                    let (a, b) = (lo.max(clo), hi.min(chi));
                    if a < b {
                        push_runs(&table, shell, a, b, Weight::recip(cover), blocks);
                    }
                }
            }
        }
    }
    // windows with equal profiles evaluate identically; keep one of each
    let mut measures: Vec<Measure> = Vec::new();
    let mut seen: HashMap<Vec<MeasureBlock>, usize> = HashMap::new();
    for blocks in per_measure {
        match seen.get(&blocks) {
            Some(&i) => measures[i].multiplicity += 1,
            None => {
                seen.insert(blocks.clone(), measures.len());
                measures.push(Measure::single(blocks));
            }
        }
    }
    Ok(MeasureCollection::new(n, p.len(), measures))
}

/// Appends the positions `[lo, hi)` of `shell` as blocks, merging with an
/// existing block of the same type and weight.
fn push_runs(
    table: &crate::typelattice::TypeTable,
    shell: &Shell,
    lo: u128,
    hi: u128,
    w: Weight,
    out: &mut Vec<MeasureBlock>,
) {
    let mut off = 0u128;
    for &(i, len) in &shell.runs {
        let (a, b) = (lo.max(off), hi.min(off + len));
        off += len;
        if a >= b {
            continue;
        }
        let counts = table.counts(i);
        match out.iter_mut().find(|blk| blk.type_counts == counts && blk.weight == w) {
            Some(blk) => blk.size += b - a,
            None => out.push(MeasureBlock {
                type_counts: counts.to_vec(),
                size: b - a,
                weight: w,
            }),
        }
    }
}
