//! Finite-n separable testing of `|φ⟩^{⊗n}` against the sign-flipped
//! uniform family: threshold sets `S_n(R) = {J : log p^n_J >= nR}`, their
//! power sums, the overlap `a_n(R, R')`, the threshold search and the
//! resulting sandwich on the optimal type-1 error.
//!
//! Thresholds live on the finite grid of achievable per-copy log-masses;
//! between grid points `S_n(R)` does not change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::LogSum;
use crate::spectrum::{is_uniform, SchmidtSpectrum};
use crate::typelattice::enumerate_types;

const LEVEL_TOL: f64 = 1e-12;
/// Relative slack for the inclusive side of the threshold condition.
const CONDITION_TOL: f64 = 1e-12;

/// `(|S_n(R)|, Σ_S √p^n_J, Σ_S p^n_J)` stored as logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSums {
    /// Threshold after snapping to the lowest achievable level in `S_n(R)`;
    /// the requested value when the set is empty.
    pub r: f64,
    pub log_p0: f64,
    pub log_p_half: f64,
    pub log_p1: f64,
}

impl PowerSums {
    pub fn p0(&self) -> f64 {
        self.log_p0.exp()
    }

    pub fn p_half(&self) -> f64 {
        self.log_p_half.exp()
    }

    pub fn p1(&self) -> f64 {
        self.log_p1.exp()
    }

    pub fn is_empty(&self) -> bool {
        self.log_p0 == f64::NEG_INFINITY
    }
}

/// Cumulative power sums over the distinct per-copy levels of `p^n`,
/// highest level first.
#[derive(Debug, Clone)]
pub struct SeparableTable {
    n: usize,
    d: usize,
    levels: Vec<f64>,
    cum: Vec<PowerSums>,
}

fn check_p(p: &[f64]) -> Result<()> {
    if p.len() < 2 || p.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidDistribution("need at least two positive entries".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
    }
    if is_uniform(p) {
        return Err(Error::Uniform);
    }
    Ok(())
}

impl SeparableTable {
    pub fn new(p: &[f64], n: usize) -> Result<Self> {
        check_p(p)?;
        let table = enumerate_types(p.len(), n)?;
        let nf = n as f64;
        let mut rows: Vec<(f64, f64)> = (0..table.len())
            .map(|i| (table.per_sequence_log_mass(i, p) / nf, table.log_cardinality(i)))
            .collect();
        rows.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut levels = Vec::new();
        let mut cum = Vec::new();
        let (mut s0, mut sh, mut s1) = (LogSum::new(), LogSum::new(), LogSum::new());
        let mut i = 0;
        while i < rows.len() {
            let head = rows[i].0;
            let mut low = head;
            while i < rows.len() && (rows[i].0 - head).abs() <= LEVEL_TOL * head.abs().max(1.0) {
                let (lv, lc) = rows[i];
                s0.add(lc);
                sh.add(lc + 0.5 * nf * lv);
                s1.add(lc + nf * lv);
                low = low.min(lv);
                i += 1;
            }
            levels.push(low);
            cum.push(PowerSums {
                r: low,
                log_p0: s0.value(),
                log_p_half: sh.value(),
                log_p1: s1.value(),
            });
        }
        Ok(SeparableTable {
            n,
            d: p.len(),
            levels,
            cum,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Distinct achievable per-copy levels, descending.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Index of the largest set `S_n(R)`, i.e. the last level `>= R`.
    pub fn index_of(&self, r: f64) -> Option<usize> {
        let tol = LEVEL_TOL * r.abs().max(1.0);
        let k = self.levels.partition_point(|&l| l >= r - tol);
        k.checked_sub(1)
    }

    pub fn sums_at(&self, k: usize) -> PowerSums {
        self.cum[k]
    }

    pub fn power_sums(&self, r: f64) -> PowerSums {
        match self.index_of(r) {
            Some(k) => self.cum[k],
            None => PowerSums {
                r,
                log_p0: f64::NEG_INFINITY,
                log_p_half: f64::NEG_INFINITY,
                log_p1: f64::NEG_INFINITY,
            },
        }
    }

    /// `a_n(R, R')` for grid indices `k >= k'` (so `S_n(R) ⊇ S_n(R')`).
    pub fn a_at(&self, k: usize, kp: usize) -> f64 {
        let s = self.cum[k];
        let t = self.cum[kp];
        let cross = (s.log_p_half + t.log_p_half - s.log_p0).exp();
        let u_t = t.log_p1.exp() * (-(2.0 * t.log_p_half - s.log_p0 - t.log_p1).exp_m1()).max(0.0);
        let u_s = s.log_p1.exp() * (-(2.0 * s.log_p_half - s.log_p0 - s.log_p1).exp_m1()).max(0.0);
        let num = cross + (u_t * u_s).sqrt();
        (1.0 - num * num / t.log_p1.exp()).clamp(0.0, 1.0)
    }

    /// Whether the threshold condition holds at level index `k` for target
    /// index `kp`: the smallest amplitude `e^{nR/2}` of `S_n(R)` dominates
    /// `(P_½/P_0)(1 - sqrt((a-1)/(b-1)))` with `a = P_1 P_0 / P_½²` and
    /// `b = P_1(R') P_0(R) / P_½(R')²`.
    pub fn condition_holds(&self, k: usize, kp: usize) -> bool {
        let s = self.cum[k];
        let t = self.cum[kp];
        let am1 = (s.log_p1 + s.log_p0 - 2.0 * s.log_p_half).exp_m1().max(0.0);
        let bm1 = (t.log_p1 + s.log_p0 - 2.0 * t.log_p_half).exp_m1().max(0.0);
        let ratio = if k == kp {
            1.0
        } else if bm1 <= 1e-300 {
            if am1 <= 1e-300 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            am1 / bm1
        };
        let factor = 1.0 - ratio.sqrt();
        if factor <= 0.0 {
            return true;
        }
        let lhs = 0.5 * self.n as f64 * self.levels[k];
        let rhs = s.log_p_half - s.log_p0 + factor.ln();
        lhs >= rhs - CONDITION_TOL * rhs.abs().max(1.0)
    }

    /// Threshold search on the grid below `R'` (index `kp`).
    pub fn search_at(&self, kp: usize) -> ThresholdSearch {
        let mut r_min = kp;
        let mut first_fail = None;
        let mut violations = Vec::new();
        for k in kp..self.levels.len() {
            if self.condition_holds(k, kp) {
                r_min = k;
                if first_fail.is_some() {
                    violations.push(self.levels[k]);
                }
            } else if first_fail.is_none() {
                first_fail = Some(k);
            }
        }
        let r_tilde = first_fail;
        ThresholdSearch {
            r_min: self.levels[r_min],
            r_tilde: r_tilde.map(|k| self.levels[k]),
            r_min_index: r_min,
            r_tilde_index: r_tilde,
            monotonicity_violations: violations,
        }
    }

    /// Sandwich for the grid index `kp` of `R'`.
    pub fn sandwich_at(&self, kp: usize) -> SandwichResult {
        let search = self.search_at(kp);
        let t = self.cum[kp];
        let log_beta_value = 2.0 * t.log_p_half - t.log_p1 - self.n as f64 * (self.d as f64).ln();
        let alpha_upper = self.a_at(search.r_min_index, kp);
        let alpha_lower = match search.r_tilde_index {
            Some(k) => self.a_at(k, kp),
            None => alpha_upper,
        };
        SandwichResult {
            r_prime: self.levels[kp],
            beta_value: log_beta_value.exp(),
            log_beta_value,
            alpha_lower,
            alpha_upper,
            r_min: search.r_min,
            r_tilde: search.r_tilde,
            exact: search.r_tilde_index.is_none(),
            monotonicity_violations: search.monotonicity_violations,
        }
    }
}

/// Result of scanning the threshold grid below `R'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    /// smallest level where the condition holds
    pub r_min: f64,
    /// largest level where it fails; absent when it never fails
    pub r_tilde: Option<f64>,
    #[serde(skip)]
    r_min_index: usize,
    #[serde(skip)]
    r_tilde_index: Option<usize>,
    /// levels that satisfy the condition below a level that fails it
    pub monotonicity_violations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    /// `R'` snapped to the grid
    pub r_prime: f64,
    /// `P_½(R')² / (d^n P_1(R'))`
    pub beta_value: f64,
    pub log_beta_value: f64,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    pub r_min: f64,
    pub r_tilde: Option<f64>,
    /// no level fails the condition, so the upper bound is attained
    pub exact: bool,
    pub monotonicity_violations: Vec<f64>,
}

impl SandwichResult {
    /// Bipartite separable type-2 error `d_max^{-n} β`, as a logarithm.
    pub fn log_beta_bipartite(&self, spec: &SchmidtSpectrum, n: usize) -> f64 {
        self.log_beta_value - n as f64 * (spec.dim_max() as f64).ln()
    }
}

fn nonempty_index(t: &SeparableTable, r: f64, what: &str) -> Result<usize> {
    t.index_of(r)
        .ok_or_else(|| Error::EmptySet(format!("S_n({what}) is empty for {what} = {r}")))
}

pub fn power_sums(p: &[f64], n: usize, r: f64) -> Result<PowerSums> {
    Ok(SeparableTable::new(p, n)?.power_sums(r))
}

pub fn a_overlap(p: &[f64], n: usize, r: f64, r_prime: f64) -> Result<f64> {
    let t = SeparableTable::new(p, n)?;
    let kp = nonempty_index(&t, r_prime, "R'")?;
    let k = nonempty_index(&t, r, "R")?;
    if k < kp {
        return Err(Error::arg(format!("R = {r} must not exceed R' = {r_prime}")));
    }
    Ok(t.a_at(k, kp))
}

pub fn threshold_search(p: &[f64], n: usize, r_prime: f64) -> Result<ThresholdSearch> {
    let t = SeparableTable::new(p, n)?;
    let kp = nonempty_index(&t, r_prime, "R'")?;
    Ok(t.search_at(kp))
}

/// Sandwich for the Schmidt coefficients of `spec`. The bipartite
/// separable type-2 error is `d_max^{-n}` times `beta_value`.
pub fn sep_sandwich(spec: &SchmidtSpectrum, n: usize, r_prime: f64) -> Result<SandwichResult> {
    let t = SeparableTable::new(spec.lambdas(), n)?;
    let kp = nonempty_index(&t, r_prime, "R'")?;
    Ok(t.sandwich_at(kp))
}

/// `(a_n(R), b_n(R)) = (1 - P_1, P_½² / (d^n P_1))`.
pub fn phi_vector_overlaps(p: &[f64], n: usize, r: f64) -> Result<(f64, f64)> {
    let t = SeparableTable::new(p, n)?;
    let k = nonempty_index(&t, r, "R")?;
    let s = t.sums_at(k);
    let a = -s.log_p1.exp_m1();
    let b = (2.0 * s.log_p_half - s.log_p1 - n as f64 * (p.len() as f64).ln()).exp();
    Ok((a, b))
}
