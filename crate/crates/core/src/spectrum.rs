//! Schmidt spectra, Rényi entropies, varentropy, classical divergence
//! statistics and the standard normal CDF/quantile.
//!
//! Logarithms are natural throughout.

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{check_probability, kl, log_sum_exp, shannon};

/// Entries below this are treated as zero Schmidt coefficients and rejected.
pub const MIN_COEFFICIENT: f64 = 1e-15;
const SUM_TOL: f64 = 1e-12;
/// Half-width of the window around `alpha = 1` where the cumulant series is used.
const SERIES_WINDOW: f64 = 1e-4;
/// Default finite-difference step for Rényi derivatives.
pub const DERIVATIVE_STEP: f64 = 1e-5;

/// Squared Schmidt coefficients of a bipartite pure state together with the
/// local dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum", into = "RawSpectrum")]
pub struct SchmidtSpectrum {
    lambdas: Vec<f64>,
    dim_a: usize,
    dim_b: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpectrum {
    lambdas: Vec<f64>,
    dim_a: usize,
    dim_b: usize,
}

impl TryFrom<RawSpectrum> for SchmidtSpectrum {
    type Error = Error;
    fn try_from(r: RawSpectrum) -> Result<Self> {
        SchmidtSpectrum::new(r.lambdas, r.dim_a, r.dim_b)
    }
}

impl From<SchmidtSpectrum> for RawSpectrum {
    fn from(s: SchmidtSpectrum) -> Self {
        RawSpectrum {
            lambdas: s.lambdas,
            dim_a: s.dim_a,
            dim_b: s.dim_b,
        }
    }
}

impl SchmidtSpectrum {
    /// Sorts the coefficients non-increasingly and validates them. The number
    /// of coefficients must equal `min(dim_a, dim_b)`.
    pub fn new(mut lambdas: Vec<f64>, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidSpectrum("local dimensions must be positive".into()));
        }
        let d = dim_a.min(dim_b);
        if lambdas.len() != d {
            return Err(Error::InvalidSpectrum(format!(
                "{} coefficients given but min(d_A, d_B) = {d}",
                lambdas.len()
            )));
        }
        if let Some(x) = lambdas.iter().find(|x| !x.is_finite() || **x < MIN_COEFFICIENT) {
            return Err(Error::InvalidSpectrum(format!(
                "coefficient {x} is not a positive number above {MIN_COEFFICIENT}"
            )));
        }
        let s: f64 = lambdas.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidSpectrum(format!("coefficients sum to {s}")));
        }
        lambdas.iter_mut().for_each(|x| *x /= s);
        lambdas.sort_by(|a, b| b.total_cmp(a));
        Ok(SchmidtSpectrum { lambdas, dim_a, dim_b })
    }

    /// Square spectrum on `d x d` with all coefficients equal.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        Self::new(vec![1.0 / d as f64; d], d, d)
    }

    /// The one-parameter family `(lambda, ..., lambda, 1 - (d-1) lambda)` on `d x d`.
    pub fn psi_lambda(d: usize, lambda: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidSpectrum("the family needs d >= 2".into()));
        }
        let top = 1.0 - (d as f64 - 1.0) * lambda;
        let mut v = vec![lambda; d - 1];
        v.push(top);
        Self::new(v, d, d)
    }

    /// True when `lambda` lies outside `[0, 1/d]`, where the family stops
    /// being ordered the way the figures assume.
    pub fn psi_lambda_range_flag(d: usize, lambda: f64) -> bool {
        !(0.0..=1.0 / d as f64 + 1e-15).contains(&lambda)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// `d = min(d_A, d_B)`.
    pub fn dim_min(&self) -> usize {
        self.lambdas.len()
    }

    /// `d_max = max(d_A, d_B)`.
    pub fn dim_max(&self) -> usize {
        self.dim_a.max(self.dim_b)
    }

    /// `log d_A d_B`.
    pub fn log_dims(&self) -> f64 {
        ((self.dim_a * self.dim_b) as f64).ln()
    }

    pub fn is_uniform(&self) -> bool {
        is_uniform(&self.lambdas)
    }
}

/// True when all entries agree to within `1e-12` relative.
pub fn is_uniform(p: &[f64]) -> bool {
    let first = p[0];
    p.iter().all(|&x| (x - first).abs() <= 1e-12 * first.abs().max(1e-300))
}

/// Rényi entropy `H_alpha` of an arbitrary probability vector. Zero entries
/// are ignored.
pub fn renyi(p: &[f64], alpha: f64) -> f64 {
    let support: Vec<f64> = p.iter().copied().filter(|&x| x > 0.0).collect();
    if alpha == 0.0 {
        return (support.len() as f64).ln();
    }
    if alpha == 1.0 {
        return shannon(&support);
    }
    let t = alpha - 1.0;
    if t.abs() < SERIES_WINDOW {
        // cumulants of log p under p
        let h1 = shannon(&support);
        let (mut k2, mut k3) = (0.0, 0.0);
        for &x in &support {
            let c = x.ln() + h1;
            k2 += x * c * c;
            k3 += x * c * c * c;
        }
        return h1 - 0.5 * k2 * t - k3 * t * t / 6.0;
    }
    if alpha.is_infinite() {
        return -support.iter().copied().fold(0.0, f64::max).ln();
    }
    let logs: Vec<f64> = support.iter().map(|x| alpha * x.ln()).collect();
    log_sum_exp(&logs) / (1.0 - alpha)
}

/// `dH_alpha/dalpha` by finite differences with step `h`. Near zero a
/// one-sided second-order stencil is used.
pub fn renyi_prime_with_step(p: &[f64], alpha: f64, h: f64) -> f64 {
    if alpha < h {
        let a = alpha;
        (-3.0 * renyi(p, a) + 4.0 * renyi(p, a + h) - renyi(p, a + 2.0 * h)) / (2.0 * h)
    } else {
        (renyi(p, alpha + h) - renyi(p, alpha - h)) / (2.0 * h)
    }
}

pub fn renyi_prime(p: &[f64], alpha: f64) -> f64 {
    renyi_prime_with_step(p, alpha, DERIVATIVE_STEP)
}

/// `V = Σ p (log p + H_1)^2`.
pub fn varentropy_of(p: &[f64]) -> f64 {
    let h1 = shannon(p);
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let c = x.ln() + h1;
            x * c * c
        })
        .sum()
}

pub fn renyi_entropy(spec: &SchmidtSpectrum, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::arg(format!("alpha = {alpha} must be non-negative")));
    }
    Ok(renyi(spec.lambdas(), alpha))
}

/// Derivative of the Rényi entropy in its order. At `alpha = 0` this is the
/// right derivative.
pub fn renyi_derivative(spec: &SchmidtSpectrum, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::arg(format!("alpha = {alpha} must be non-negative")));
    }
    Ok(renyi_prime(spec.lambdas(), alpha))
}

pub fn varentropy(spec: &SchmidtSpectrum) -> f64 {
    varentropy_of(spec.lambdas())
}

/// Relative entropy, relative varentropy and the `psi` curve of two
/// commuting states given by their eigenvalue vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceStats {
    pub rel_entropy: f64,
    pub rel_varentropy: f64,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl DivergenceStats {
    /// `psi(s) = -log Σ p^{1-s} q^s`.
    pub fn psi(&self, s: f64) -> f64 {
        let terms: Vec<f64> = self
            .p
            .iter()
            .zip(&self.q)
            .filter(|(&a, _)| a > 0.0)
            .map(|(&a, &b)| (1.0 - s) * a.ln() + s * b.ln())
            .collect();
        -log_sum_exp(&terms)
    }
}

/// `p` may have zeros; `q` must be positive wherever `p` is.
pub fn divergence_stats(p: &[f64], q: &[f64]) -> Result<DivergenceStats> {
    if p.len() != q.len() {
        return Err(Error::InvalidDistribution(format!(
            "lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    check_probability(p, SUM_TOL, true).map_err(Error::InvalidDistribution)?;
    check_probability(q, SUM_TOL, true).map_err(Error::InvalidDistribution)?;
    if p.iter().zip(q).any(|(&a, &b)| a > 0.0 && b <= 0.0) {
        return Err(Error::InvalidDistribution("p is not absolutely continuous w.r.t. q".into()));
    }
    let d = kl(p, q);
    let v = p
        .iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| {
            let c = (a / b).ln() - d;
            a * c * c
        })
        .sum();
    Ok(DivergenceStats {
        rel_entropy: d,
        rel_varentropy: v,
        p: p.to_vec(),
        q: q.to_vec(),
    })
}

/// Diagonal of the dephased state `σ_Ψ` on `d_A d_B` outcomes and the
/// uniform distribution of the completely mixed state.
pub fn sigma_psi(spec: &SchmidtSpectrum) -> (Vec<f64>, Vec<f64>) {
    let (da, db) = (spec.dim_a(), spec.dim_b());
    let mut p = vec![0.0; da * db];
    for (i, &l) in spec.lambdas().iter().enumerate() {
        p[i * db + i] = l;
    }
    let q = vec![1.0 / (da * db) as f64; da * db];
    (p, q)
}

/// Standard normal CDF.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `Φ^{-1}(eps)`. Rational initial guess refined by Halley steps on the
/// erfc-based CDF.
pub fn gaussian_quantile(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg(format!("quantile level {eps} outside (0,1)")));
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    // antisymmetry keeps the refinement on the lower tail where erfc is exact
    if eps > 0.5 {
        return Ok(-lower_quantile(1.0 - eps));
    }
    Ok(lower_quantile(eps))
}

fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let mut x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    for _ in 0..3 {
        let e = gaussian_cdf(x) - p;
        let u = e * norm * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}
