//! Strong large deviations (Bahadur-Rao) for i.i.d. sums under a
//! non-negative, not necessarily normalised, weight vector.
//!
//! For `R` above the weighted mean,
//! `log w^n{Σ X_i >= nR} ≈ χ0(R) n - ½ log n + χ1(R)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, log_sum_exp};
use crate::spectrum::is_uniform;
use crate::typelattice::Side;

/// Largest denominator accepted when testing ratios for rationality.
pub const LATTICE_MAX_DENOMINATOR: i64 = 10_000;
/// Tolerance on `|ratio - p/q|`, relative to `max(1, |ratio|)`.
pub const LATTICE_TOL: f64 = 1e-9;

/// Cumulant generating function `τ(s) = log Σ w e^{sX}` restricted to the
/// support of `w`.
#[derive(Debug, Clone)]
pub struct Cgf {
    logw: Vec<f64>,
    x: Vec<f64>,
}

impl Cgf {
    pub fn new(weights: &[f64], x: &[f64]) -> Result<Self> {
        if weights.len() != x.len() {
            return Err(Error::arg("weights and values differ in length"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("weights must be finite and non-negative, values finite"));
        }
        let (logw, x): (Vec<f64>, Vec<f64>) = weights
            .iter()
            .zip(x)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &v)| (w.ln(), v))
            .unzip();
        if logw.is_empty() {
            return Err(Error::arg("weights vanish everywhere"));
        }
        Ok(Cgf { logw, x })
    }

    pub fn tau(&self, s: f64) -> f64 {
        let t: Vec<f64> = self.logw.iter().zip(&self.x).map(|(l, x)| l + s * x).collect();
        log_sum_exp(&t)
    }

    fn tilted(&self, s: f64) -> Vec<f64> {
        let t: Vec<f64> = self.logw.iter().zip(&self.x).map(|(l, x)| l + s * x).collect();
        let z = log_sum_exp(&t);
        t.iter().map(|v| (v - z).exp()).collect()
    }

    /// `τ'(s)`: mean of `X` under the tilted law.
    pub fn tau_prime(&self, s: f64) -> f64 {
        self.tilted(s).iter().zip(&self.x).map(|(q, x)| q * x).sum()
    }

    /// `τ''(s)`: variance of `X` under the tilted law.
    pub fn tau_second(&self, s: f64) -> f64 {
        let q = self.tilted(s);
        let m: f64 = q.iter().zip(&self.x).map(|(q, x)| q * x).sum();
        q.iter().zip(&self.x).map(|(q, x)| q * (x - m) * (x - m)).sum()
    }

    /// `E_w[X] / E_w[1]`.
    pub fn mean(&self) -> f64 {
        self.tau_prime(0.0)
    }

    pub fn support_range(&self) -> (f64, f64) {
        let lo = self.x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// `η(R) = (τ')^{-1}(R)` for `R` strictly inside the support range.
    pub fn eta(&self, r: f64) -> Result<f64> {
        let (lo, hi) = self.support_range();
        if !(r > lo && r < hi) {
            return Err(Error::arg(format!("R = {r} outside the open range ({lo}, {hi}) of tau'")));
        }
        let f = |s: f64| self.tau_prime(s) - r;
        let (mut a, mut b) = (-1.0, 1.0);
        while f(a) > 0.0 {
            a *= 2.0;
            if a < -1e12 {
                return Err(Error::arg("eta bracket diverged"));
            }
        }
        while f(b) < 0.0 {
            b *= 2.0;
            if b > 1e12 {
                return Err(Error::arg("eta bracket diverged"));
            }
        }
        Ok(bisect(f, a, b, 1e-15 * b.abs().max(1.0), true))
    }

    /// `η'(R) = 1/τ''(η(R))`.
    pub fn eta_prime(&self, r: f64) -> Result<f64> {
        Ok(1.0 / self.tau_second(self.eta(r)?))
    }
}

fn rational_approx(x: f64, max_den: i64) -> Option<(i64, i64)> {
    // continued-fraction convergents of x >= 0
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= LATTICE_TOL * x.abs().max(1.0) {
            return Some((h1, k1));
        }
        let frac = v - a as f64;
        if frac <= 0.0 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 > 0 && (x - h1 as f64 / k1 as f64).abs() <= LATTICE_TOL * x.abs().max(1.0) {
        Some((h1, k1))
    } else {
        None
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Lattice span of `X` under `weights`; `0` for a non-lattice variable.
/// Rationality of difference ratios is decided by continued fractions with
/// denominators up to [`LATTICE_MAX_DENOMINATOR`].
pub fn lattice_span(weights: &[f64], x: &[f64]) -> Result<f64> {
    if weights.len() != x.len() {
        return Err(Error::arg("weights and values differ in length"));
    }
    let mut pts: Vec<f64> = weights
        .iter()
        .zip(x)
        .filter(|(&w, _)| w > 0.0)
        .map(|(_, &v)| v)
        .collect();
    pts.sort_by(f64::total_cmp);
    let scale = pts.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
    if pts.len() < 2 {
        return Err(Error::arg("lattice span needs at least two support points"));
    }
    let base = pts[1] - pts[0];
    let mut fracs = Vec::with_capacity(pts.len() - 1);
    for v in &pts[1..] {
        match rational_approx((v - pts[0]) / base, LATTICE_MAX_DENOMINATOR) {
            Some(f) => fracs.push(f),
            None => return Ok(0.0),
        }
    }
    let mut l: i64 = 1;
    for &(_, q) in &fracs {
        l = match (l / gcd(l, q)).checked_mul(q) {
            Some(v) if v <= LATTICE_MAX_DENOMINATOR * LATTICE_MAX_DENOMINATOR => v,
            _ => return Ok(0.0),
        };
    }
    let g = fracs.iter().fold(0i64, |g, &(p, q)| gcd(g, p * (l / q)));
    Ok(base * g as f64 / l as f64)
}

/// Which asymptotic form a tail estimate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBranch {
    /// large deviation: `χ0 n - ½ log n + χ1`
    Saddle,
    /// threshold on the bulk side of the mean: `n τ(0)`
    Bulk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailApprox {
    pub lattice_span: f64,
    pub chi0: f64,
    pub chi1: f64,
    pub n: usize,
    pub approx_log_tail: f64,
    pub branch: TailBranch,
}

fn chi_pair(cgf: &Cgf, span: f64, r: f64) -> Result<(f64, f64)> {
    let mean = cgf.mean();
    let tol = 1e-12 * mean.abs().max(1.0);
    if r < mean - tol {
        return Err(Error::arg(format!("R = {r} below the weighted mean {mean}")));
    }
    if (r - mean).abs() <= tol {
        return Ok((cgf.tau(0.0), f64::INFINITY));
    }
    let eta = cgf.eta(r)?;
    let eta_p = 1.0 / cgf.tau_second(eta);
    let chi0 = -r * eta + cgf.tau(eta);
    let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let chi1 = if span == 0.0 {
        -half_log_2pi - eta.ln() + 0.5 * eta_p.ln()
    } else {
        -half_log_2pi + 0.5 * eta_p.ln() + (span / (-(-span * eta).exp_m1())).ln()
    };
    Ok((chi0, chi1))
}

/// `(χ0(R), χ1(R))` for `R` at or above the weighted mean.
pub fn br_chi(weights: &[f64], x: &[f64], r: f64) -> Result<(f64, f64)> {
    let cgf = Cgf::new(weights, x)?;
    let span = lattice_span(weights, x)?;
    chi_pair(&cgf, span, r)
}

/// Approximate `log w^n{Σ X_i >= nR}`.
pub fn br_tail_estimate(weights: &[f64], x: &[f64], n: usize, r: f64) -> Result<TailApprox> {
    if n == 0 {
        return Err(Error::arg("n must be positive"));
    }
    let cgf = Cgf::new(weights, x)?;
    let span = lattice_span(weights, x)?;
    let mean = cgf.mean();
    if r <= mean + 1e-12 * mean.abs().max(1.0) {
        let t0 = cgf.tau(0.0);
        return Ok(TailApprox {
            lattice_span: span,
            chi0: t0,
            chi1: 0.0,
            n,
            approx_log_tail: n as f64 * t0,
            branch: TailBranch::Bulk,
        });
    }
    let (chi0, chi1) = chi_pair(&cgf, span, r)?;
    Ok(TailApprox {
        lattice_span: span,
        chi0,
        chi1,
        n,
        approx_log_tail: chi0 * n as f64 - 0.5 * (n as f64).ln() + chi1,
        branch: TailBranch::Saddle,
    })
}

/// Either tail; the `<=` tail is the `>=` tail of `-X` at `-R`.
pub fn br_tail_estimate_side(weights: &[f64], x: &[f64], n: usize, r: f64, side: Side) -> Result<TailApprox> {
    match side {
        Side::Ge => br_tail_estimate(weights, x, n, r),
        Side::Le => {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            br_tail_estimate(weights, &neg, n, -r)
        }
    }
}

/// `g(d)` for lattice span `d` (`d = 0`: non-lattice).
pub fn g_of_span(span: f64) -> f64 {
    if span == 0.0 {
        -std::f64::consts::LN_2
    } else {
        ((-(-0.5 * span).exp_m1()) / (-(-span).exp_m1())).ln()
    }
}

/// `(g(d), h_1(R))` where `d` is the lattice span of `-log p_i` and
/// `h_1` uses `t = ψ_p'^{-1}(R)` with `ψ_p(s) = log Σ p^{1+s}`.
pub fn g_and_h(p: &[f64], r: f64) -> Result<(f64, f64)> {
    if p.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidDistribution("entries must be positive".into()));
    }
    if is_uniform(p) {
        return Err(Error::Uniform);
    }
    let neg_log: Vec<f64> = p.iter().map(|v| -v.ln()).collect();
    let span = lattice_span(p, &neg_log)?;
    let log_p: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let t = Cgf::new(p, &log_p)?.eta(r)?;
    let h1 = if span == 0.0 {
        ((t + 0.5) / (t + 1.0)).ln()
    } else {
        ((-(-(t + 0.5) * span).exp_m1()) / (-(-(t + 1.0) * span).exp_m1())).ln()
    };
    Ok((g_of_span(span), h1))
}
