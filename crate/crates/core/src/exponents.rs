//! Hoeffding exponent curves, critical rates, Chernoff fixed points, the
//! Stein-Strassen expansion coefficients and the exponential family
//! `P_θ ∝ P^{1-θ}` with its divergence-minus-entropy identities.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, kl, scan_then_golden, shannon};
use crate::spectrum::{gaussian_quantile, is_uniform, renyi, renyi_prime, varentropy_of, SchmidtSpectrum};

/// Upper end of the `s` interval searched for the Hoeffding supremum.
pub const S_MAX: f64 = 1.0 - 1e-8;
const SCAN_POINTS: usize = 256;
const GOLDEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    OneWay,
    TwoWay,
    Separable,
    Global,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassTag::OneWay => "one_way",
            ClassTag::TwoWay => "two_way",
            ClassTag::Separable => "separable",
            ClassTag::Global => "global",
        })
    }
}

impl std::str::FromStr for ClassTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_way" | "one-way" => Ok(ClassTag::OneWay),
            "two_way" | "two-way" => Ok(ClassTag::TwoWay),
            "separable" | "sep" => Ok(ClassTag::Separable),
            "global" => Ok(ClassTag::Global),
            _ => Err(Error::arg(format!("unknown measurement class `{s}`"))),
        }
    }
}

/// `sup_{0<=s<1} -s r/(1-s) - H_s(p)`.
pub fn one_way_sup(p: &[f64], r: f64) -> f64 {
    if r == 0.0 {
        return -shannon(p);
    }
    if r >= -renyi_prime(p, 0.0) {
        return -renyi(p, 0.0);
    }
    let obj = |s: f64| -s * r / (1.0 - s) - renyi(p, s);
    scan_then_golden(obj, 0.0, S_MAX, SCAN_POINTS, GOLDEN_TOL).1
}

/// `sup_{0<=s<1} -2s r/(1-s) - H_{(1+s)/2}(p)`. By duality this
/// equals `min_{D(Q||P) <= r} D(Q||P) - H(Q)`.
pub fn two_way_sup(p: &[f64], r: f64) -> f64 {
    if r == 0.0 {
        return -shannon(p);
    }
    if r >= -0.25 * renyi_prime(p, 0.5) {
        return -renyi(p, 0.5);
    }
    let obj = |s: f64| -2.0 * s * r / (1.0 - s) - renyi(p, 0.5 * (1.0 + s));
    scan_then_golden(obj, 0.0, S_MAX, SCAN_POINTS, GOLDEN_TOL).1
}

fn check_rate(r: f64) -> Result<()> {
    if !(r >= 0.0) {
        return Err(Error::arg(format!("rate r = {r} must be non-negative")));
    }
    Ok(())
}

/// One-way LOCC Hoeffding exponent.
pub fn hoeffding_one_way(spec: &SchmidtSpectrum, r: f64) -> Result<f64> {
    check_rate(r)?;
    Ok(spec.log_dims() + one_way_sup(spec.lambdas(), r))
}

/// Two-way LOCC (equivalently separable) Hoeffding exponent.
pub fn hoeffding_two_way(spec: &SchmidtSpectrum, r: f64) -> Result<f64> {
    check_rate(r)?;
    Ok(spec.log_dims() + two_way_sup(spec.lambdas(), r))
}

/// `(r_→, r_↔) = (-H_0'(Ψ), -¼ H_{1/2}'(Ψ))`.
pub fn critical_rates(spec: &SchmidtSpectrum) -> (f64, f64) {
    let p = spec.lambdas();
    if spec.is_uniform() {
        return (0.0, 0.0);
    }
    (-renyi_prime(p, 0.0), -0.25 * renyi_prime(p, 0.5))
}

/// A Hoeffding exponent curve `r ↦ E(r)` for one measurement class.
/// The curve is non-increasing in `r` and constant from `plateau_rate` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentCurve {
    pub class_tag: ClassTag,
    pub spec: SchmidtSpectrum,
    pub plateau_rate: f64,
    pub plateau_value: f64,
}

impl ExponentCurve {
    pub fn new(spec: &SchmidtSpectrum, class_tag: ClassTag) -> Self {
        let (r1, r2) = critical_rates(spec);
        let p = spec.lambdas();
        let l = spec.log_dims();
        let (plateau_rate, plateau_value) = match class_tag {
            ClassTag::OneWay => (r1, l - renyi(p, 0.0)),
            ClassTag::TwoWay | ClassTag::Separable => (r2, l - renyi(p, 0.5)),
            ClassTag::Global => (0.0, l),
        };
        ExponentCurve {
            class_tag,
            spec: spec.clone(),
            plateau_rate,
            plateau_value,
        }
    }

    /// `E(r)` for `r >= 0`.
    pub fn evaluate(&self, r: f64) -> f64 {
        if r >= self.plateau_rate {
            return self.plateau_value;
        }
        let p = self.spec.lambdas();
        let l = self.spec.log_dims();
        match self.class_tag {
            ClassTag::OneWay => l + one_way_sup(p, r),
            ClassTag::TwoWay | ClassTag::Separable => l + two_way_sup(p, r),
            ClassTag::Global => self.plateau_value,
        }
    }
}

/// Fixed point `E(r*) = r*` of a curve, by bisection on `[0, E(0)]`.
pub fn chernoff_rate(curve: &ExponentCurve) -> Result<f64> {
    let e0 = curve.evaluate(0.0);
    if !(e0 > 0.0) {
        return Err(Error::NoCrossing(format!("E(0) = {e0} is not positive")));
    }
    Ok(bisect(|r| curve.evaluate(r) - r, 0.0, e0, 1e-12, false))
}

/// Coefficients of `log β ≈ first·n + second·√n + third·log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinExpansion {
    pub first_order: f64,
    pub second_order: f64,
    pub third_order: f64,
}

impl SteinExpansion {
    pub fn evaluate(&self, n: usize) -> f64 {
        let n = n as f64;
        self.first_order * n + self.second_order * n.sqrt() + self.third_order * n.ln()
    }
}

pub fn stein_strassen_terms(spec: &SchmidtSpectrum, eps: f64, class_tag: ClassTag) -> Result<SteinExpansion> {
    let third_order = match class_tag {
        ClassTag::OneWay => -0.5,
        ClassTag::TwoWay | ClassTag::Separable => -1.0,
        ClassTag::Global => {
            return Err(Error::arg(
                "global measurements have a different closed form; use the global report",
            ))
        }
    };
    let q = gaussian_quantile(eps)?;
    let p = spec.lambdas();
    Ok(SteinExpansion {
        first_order: -(spec.log_dims() - shannon(p)),
        second_order: -varentropy_of(p).sqrt() * q,
        third_order,
    })
}

fn check_positive_probability(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidDistribution("entries must be positive".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
    }
    Ok(())
}

/// `P_θ(x) ∝ P(x)^{1-θ}` for `θ ∈ [0,1]`.
pub fn exp_family(p: &[f64], theta: f64) -> Result<Vec<f64>> {
    check_positive_probability(p)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::arg(format!("theta = {theta} outside [0,1]")));
    }
    Ok(tilt(p, theta))
}

fn tilt(p: &[f64], theta: f64) -> Vec<f64> {
    let logs: Vec<f64> = p.iter().map(|v| (1.0 - theta) * v.ln()).collect();
    let z = crate::numeric::log_sum_exp(&logs);
    logs.iter().map(|l| (l - z).exp()).collect()
}

fn tilt_divergence(p: &[f64], theta: f64) -> f64 {
    kl(&tilt(p, theta), p)
}

/// `θ(r)` with `D(P_θ || P) = r`, for `r ∈ [0, D(uniform || P)]`.
pub fn theta_of_rate(p: &[f64], r: f64) -> Result<f64> {
    check_positive_probability(p)?;
    let max = tilt_divergence(p, 1.0);
    if !(r >= 0.0) || r > max + 1e-12 {
        return Err(Error::RateOutOfRange { r, max });
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    if r >= max {
        return Ok(1.0);
    }
    Ok(bisect(|t| tilt_divergence(p, t) - r, 0.0, 1.0, 1e-15, true))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateConstraint {
    /// minimise over `D(Q||P) <= r`
    AtMost(f64),
    Unconstrained,
}

/// `min D(Q||P) - H(Q)`, optionally under `D(Q||P) <= r`. The constrained
/// optimum sits on the exponential family at `θ(min(r, D(P_{1/2}||P)))`.
pub fn min_divergence_minus_entropy(p: &[f64], c: RateConstraint) -> Result<f64> {
    check_positive_probability(p)?;
    match c {
        RateConstraint::Unconstrained => Ok(-renyi(p, 0.5)),
        RateConstraint::AtMost(r) => {
            if is_uniform(p) {
                return Err(Error::Uniform);
            }
            let sat = tilt_divergence(p, 0.5);
            let theta = if r >= sat { 0.5 } else { theta_of_rate(p, r)? };
            let q = tilt(p, theta);
            Ok(kl(&q, p) - shannon(&q))
        }
    }
}

/// Dual form `sup_{0<=s<1} -2s r/(1-s) - H_{(1+s)/2}(p)`.
pub fn dual_divergence_minus_entropy(p: &[f64], r: f64) -> Result<f64> {
    check_positive_probability(p)?;
    check_rate(r)?;
    Ok(two_way_sup(p, r))
}

/// The two rate thresholds that appear for the two-way construction:
/// `-¼ H'_{1/2}` and `log d - ¼ H'_{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateRegime {
    /// `r < -¼ H'_{1/2}`
    Standard,
    /// `-¼ H'_{1/2} <= r < log d - ¼ H'_{1/2}`: the two thresholds quoted for
    /// this construction disagree here
    PaperInconsistent,
    /// `r >= log d - ¼ H'_{1/2}`
    Beyond,
}

pub fn regime_thresholds(p: &[f64]) -> RegimeThresholds {
    let lower = -0.25 * renyi_prime(p, 0.5);
    RegimeThresholds {
        lower,
        upper: (p.len() as f64).ln() + lower,
    }
}

pub fn classify_rate(p: &[f64], r: f64) -> RateRegime {
    let t = regime_thresholds(p);
    if r < t.lower {
        RateRegime::Standard
    } else if r < t.upper {
        RateRegime::PaperInconsistent
    } else {
        RateRegime::Beyond
    }
}
