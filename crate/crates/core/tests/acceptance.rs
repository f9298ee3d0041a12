//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the PASS/FAIL lines are always printed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{non_uniform, random_prob, random_tiny_instance, spectrum};
use locc_exponents::cli;
use locc_exponents::exponents::{
    critical_rates, dual_divergence_minus_entropy, min_divergence_minus_entropy, ClassTag, ExponentCurve, RateConstraint,
};
use locc_exponents::protocol::{
    build_hoeffding_collection, build_zero_error_collection, dense_oracle_evaluate, evaluate_test, hoeffding_bounds,
    zero_error_log_beta_bound,
};
use locc_exponents::separable::SeparableTable;
use locc_exponents::sld::br_tail_estimate;
use locc_exponents::spectrum::{gaussian_quantile, renyi, varentropy_of};
use locc_exponents::typelattice::{exact_tail, one_way_log_beta_exact, type_count, Side};
use locc_exponents::SchmidtSpectrum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIGURE_TOL: f64 = 2e-3;
const FIGURE_TIME: Duration = Duration::from_secs(1);
const DOMINANCE_TOL: f64 = 1e-9;
const DUALITY_TOL: f64 = 1e-7;
const ORACLE_TOL: f64 = 1e-12;
const ORACLE_TIME: Duration = Duration::from_secs(10);
const PROTOCOL_TIME: Duration = Duration::from_secs(60);
const STEIN_BAND: f64 = 2.0;
const LEMMA_TOL: f64 = 1e-12;
const BRUTE_STEP: f64 = 1e-3;
const BRUTE_SLACK: f64 = 2e-3;
const TAIL_TOL: f64 = 0.5;
const TAIL_MONOTONE_TOL: f64 = 0.05;

type Check = fn() -> (bool, String);

fn figure_reproduction() -> (bool, String) {
    let cases: [(usize, f64, [f64; 5]); 2] = [
        (2, 0.1, [0.511, 0.092, 0.693, 0.916, 1.061]),
        (4, 0.05, [0.911, 0.212, 1.386, 1.841, 2.185]),
    ];
    let mut pass = true;
    let mut notes = vec![];
    for (d, lambda, want) in cases {
        let dir = tempfile::tempdir().unwrap();
        let start = Instant::now();
        let args = ["locc-exponents", "figure", "--d", &d.to_string(), "--lambda", &lambda.to_string(), "--out"];
        let out = cli::run(args.iter().map(|s| s.to_string()).chain([dir.path().display().to_string()])).unwrap();
        let took = start.elapsed();
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.files[1].as_path()).unwrap()).unwrap();
        let s = &side["scalars"];
        let got = ["r_one_way", "r_two_way", "log_dims_minus_h0", "log_dims_minus_h_half", "log_dims_minus_h1"]
            .map(|k| s[k].as_f64().unwrap());
        for (k, (g, w)) in got.iter().zip(want).enumerate() {
            if (g - w).abs() > FIGURE_TOL {
                pass = false;
                notes.push(format!("d={d} scalar {k}: {g:.5} vs {w}"));
            }
        }
        if took > FIGURE_TIME {
            pass = false;
            notes.push(format!("d={d} took {took:?}"));
        }
    }
    let detail = if notes.is_empty() { "10/10 scalars within 0.002".into() } else { notes.join("; ") };
    (pass, detail)
}

fn dominance() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::INFINITY;
    let mut all_strict = true;
    let mut tried = 0;
    while tried < 20 {
        let d = rng.gen_range(2..=5);
        let p = random_prob(&mut rng, d);
        if !non_uniform(&p) {
            continue;
        }
        tried += 1;
        let s = spectrum(&p);
        let (r1, r2) = critical_rates(&s);
        let r_max = 1.5 * r1.max(r2);
        let one = ExponentCurve::new(&s, ClassTag::OneWay);
        let two = ExponentCurve::new(&s, ClassTag::TwoWay);
        let mut strict = false;
        for i in 0..200 {
            let r = r_max * i as f64 / 199.0;
            let gap = two.evaluate(r) - one.evaluate(r);
            worst = worst.min(gap);
            strict |= gap > 1e-6;
        }
        all_strict &= strict;
    }
    let mut uni = 0.0f64;
    for d in 2..=5 {
        let s = SchmidtSpectrum::maximally_entangled(d).unwrap();
        let one = ExponentCurve::new(&s, ClassTag::OneWay);
        let two = ExponentCurve::new(&s, ClassTag::TwoWay);
        for i in 0..200 {
            let r = 2.0 * i as f64 / 199.0;
            uni = uni.max((two.evaluate(r) - one.evaluate(r)).abs());
        }
    }
    let pass = worst >= -DOMINANCE_TOL && all_strict && uni <= DOMINANCE_TOL;
    (pass, format!("min gap {worst:.2e}, strict on every spectrum: {all_strict}, uniform max gap {uni:.1e}"))
}

/// `min_q Σ q (2 log q - log p)` on a simplex grid.
fn simplex_grid_min(p: &[f64]) -> f64 {
    let f = |q: &[f64]| -> f64 { q.iter().zip(p).filter(|(&a, _)| a > 0.0).map(|(&a, &b)| a * (2.0 * a.ln() - b.ln())).sum() };
    match p.len() {
        2 => (0..=10_000).map(|i| i as f64 * 1e-4).map(|a| f(&[a, 1.0 - a])).fold(f64::INFINITY, f64::min),
        3 => {
            // coarse pass, then a 1e-4 grid around the coarse optimum
            let (mut best, mut at) = (f64::INFINITY, (0.0, 0.0));
            for i in 0..=500 {
                for j in 0..=(500 - i) {
                    let (a, b) = (i as f64 * 2e-3, j as f64 * 2e-3);
                    let v = f(&[a, b, (1.0 - a - b).max(0.0)]);
                    if v < best {
                        best = v;
                        at = (a, b);
                    }
                }
            }
            for i in -40..=40 {
                for j in -40..=40 {
                    let (a, b) = (at.0 + i as f64 * 1e-4, at.1 + j as f64 * 1e-4);
                    if a < 0.0 || b < 0.0 || a + b > 1.0 {
                        continue;
                    }
                    best = best.min(f(&[a, b, 1.0 - a - b]));
                }
            }
            best
        }
        _ => unreachable!(),
    }
}

fn duality() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_dual = 0.0f64;
    let mut k = 0;
    while k < 30 {
        let d = rng.gen_range(2..=5);
        let p = random_prob(&mut rng, d);
        if !non_uniform(&p) {
            continue;
        }
        k += 1;
        // below saturation the constraint binds
        let root: Vec<f64> = p.iter().map(|v| v.sqrt()).collect();
        let z: f64 = root.iter().sum();
        let sat: f64 = root.iter().zip(&p).map(|(a, b)| (a / z) * ((a / z) / b).ln()).sum();
        let r = if k % 3 == 0 { rng.gen_range(sat..2.0 * sat) } else { rng.gen_range(0.01..1.0) * sat };
        let primal = min_divergence_minus_entropy(&p, RateConstraint::AtMost(r)).unwrap();
        let dual = dual_divergence_minus_entropy(&p, r).unwrap();
        worst_dual = worst_dual.max((primal - dual).abs());
    }
    let mut worst_grid = 0.0f64;
    for _ in 0..10 {
        let d = rng.gen_range(2..=3);
        let p = random_prob(&mut rng, d);
        let unc = min_divergence_minus_entropy(&p, RateConstraint::Unconstrained).unwrap();
        worst_grid = worst_grid.max((unc - simplex_grid_min(&p)).abs());
        worst_grid = worst_grid.max((unc + renyi(&p, 0.5)).abs());
    }
    let pass = worst_dual <= DUALITY_TOL && worst_grid <= DUALITY_TOL;
    (pass, format!("primal/dual max diff {worst_dual:.1e}, grid max diff {worst_grid:.1e}"))
}

fn operator_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let (spec, coll) = random_tiny_instance(&mut rng);
        let a = evaluate_test(&spec, &coll).unwrap();
        let b = dense_oracle_evaluate(&spec, &coll).unwrap();
        worst = worst.max((a.alpha - b.alpha).abs()).max((a.beta - b.beta).abs());
    }
    let took = start.elapsed();
    (worst <= ORACLE_TOL && took < ORACLE_TIME, format!("max diff {worst:.1e} in {took:.2?}"))
}

fn protocol_bounds() -> (bool, String) {
    let s = spectrum(&[0.1, 0.9]);
    let start = Instant::now();
    let (mut fails, mut runs, mut min_slack) = (vec![], 0, f64::INFINITY);
    for r in [0.05, 0.1, 0.2] {
        for n in 6..=40 {
            let out = evaluate_test(&s, &build_hoeffding_collection(&s, n, r).unwrap()).unwrap();
            let b = hoeffding_bounds(&s, n, r).unwrap();
            runs += 1;
            min_slack = min_slack.min(b.log_beta - out.log_beta);
            if !(out.alpha <= b.log_alpha.exp() && out.log_beta <= b.log_beta) {
                fails.push(format!("r={r} n={n}"));
            }
        }
    }
    for n in 6..=40 {
        let out = evaluate_test(&s, &build_zero_error_collection(&s, n).unwrap()).unwrap();
        runs += 1;
        if !(out.alpha == 0.0 && out.log_beta <= zero_error_log_beta_bound(&s, n).unwrap()) {
            fails.push(format!("zero-error n={n}"));
        }
    }
    let took = start.elapsed();
    let pass = fails.is_empty() && took < PROTOCOL_TIME;
    (pass, format!("{}/{runs} within bounds, min log-beta slack {min_slack:.2}, {took:.2?}", runs - fails.len()))
}

fn one_way_stein() -> (bool, String) {
    let s = spectrum(&[0.1, 0.9]);
    let p = s.lambdas();
    let (h, v, l) = (renyi(p, 1.0), varentropy_of(p), s.log_dims());
    let mut bands = vec![];
    for eps in [0.1, 0.3, 0.5] {
        let q = gaussian_quantile(eps).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for n in 20..=200 {
            let nf = n as f64;
            let res = one_way_log_beta_exact(&s, n, eps).unwrap() + nf * (l - h) + (nf * v).sqrt() * q + 0.5 * nf.ln();
            lo = lo.min(res);
            hi = hi.max(res);
        }
        bands.push(hi - lo);
    }
    let pass = bands.iter().all(|&b| b <= STEIN_BAND);
    (pass, format!("bands {:.3}/{:.3}/{:.3} nats for eps 0.1/0.3/0.5", bands[0], bands[1], bands[2]))
}

/// Minimum of `1 - <√p, x>²` over non-negative unit `x` in the plane with
/// `(x_1 + x_2)²/2 <= beta`.
fn brute_alpha(p: &[f64], beta: f64) -> f64 {
    let m = (std::f64::consts::FRAC_PI_2 / BRUTE_STEP).ceil() as usize;
    (0..=m)
        .map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / m as f64)
        .filter_map(|t| {
            let (a, b) = (t.cos(), t.sin());
            ((a + b) * (a + b) / 2.0 <= beta).then(|| {
                let o = a * p[0].sqrt() + b * p[1].sqrt();
                1.0 - o * o
            })
        })
        .fold(1.0, f64::min)
}

fn separable_sandwich() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut lemma_bad = 0;
    let mut k = 0;
    while k < 50 {
        let d = rng.gen_range(2..=3);
        let p = random_prob(&mut rng, d);
        if !non_uniform(&p) {
            continue;
        }
        k += 1;
        let t = SeparableTable::new(&p, rng.gen_range(1..=12)).unwrap();
        let m = t.levels().len();
        for kp in 0..m {
            for kk in kp..m {
                let a = t.a_at(kk, kp);
                let lo = -t.sums_at(kk).log_p1.exp_m1();
                let hi = -t.sums_at(kp).log_p1.exp_m1();
                if !(lo - LEMMA_TOL <= a && a <= hi + LEMMA_TOL) {
                    lemma_bad += 1;
                }
            }
        }
    }
    let mut brute_bad = 0;
    let mut brute_runs = 0;
    for _ in 0..20 {
        let p = random_prob(&mut rng, 2);
        if !non_uniform(&p) {
            continue;
        }
        let t = SeparableTable::new(&p, 1).unwrap();
        for kp in 0..t.levels().len() {
            let res = t.sandwich_at(kp);
            let brute = brute_alpha(&p, res.beta_value * (1.0 + 1e-12));
            brute_runs += 1;
            if !(res.alpha_lower - BRUTE_SLACK <= brute && brute <= res.alpha_upper + BRUTE_SLACK) {
                brute_bad += 1;
            }
        }
    }
    let pass = lemma_bad == 0 && brute_bad == 0;
    (pass, format!("lemma violations {lemma_bad} on 50 instances, bracket misses {brute_bad}/{brute_runs}"))
}

fn bahadur_rao() -> (bool, String) {
    let cases: [(&[f64], f64); 3] = [(&[0.5, 0.5], 0.75), (&[0.7, 0.3], 0.5), (&[0.2, 0.8], 0.9)];
    let mut pass = true;
    let mut worst = 0.0f64;
    for (w, r) in cases {
        let x = [0.0, 1.0];
        let mut prev = f64::INFINITY;
        for n in [100, 200, 400] {
            let exact = exact_tail(w, &x, n, r, Side::Ge).unwrap();
            let approx = br_tail_estimate(w, &x, n, r).unwrap().approx_log_tail;
            let res = (approx - exact).abs();
            worst = worst.max(res);
            pass &= res <= TAIL_TOL && res <= prev + TAIL_MONOTONE_TOL;
            prev = res;
        }
    }
    (pass, format!("max residual {worst:.4} nats"))
}

fn two_way_vs_separable() -> (bool, String) {
    let s = spectrum(&[0.1, 0.9]);
    let d = s.dim_min();
    let mut min_margin = f64::INFINITY;
    let mut bad = vec![];
    for r in [0.05, 0.1, 0.2] {
        for n in 10..=40 {
            let out = evaluate_test(&s, &build_hoeffding_collection(&s, n, r).unwrap()).unwrap();
            let t = SeparableTable::new(s.lambdas(), n).unwrap();
            // smallest R' whose lower α still covers the two-way α
            let Some(sw) = (0..t.levels().len()).rev().map(|kp| t.sandwich_at(kp)).find(|sw| sw.alpha_lower >= out.alpha) else {
                bad.push(format!("r={r} n={n}: no threshold"));
                continue;
            };
            let slack = 3.0 * (type_count(d, n).unwrap() as f64).ln() + (8.0 * d as f64).ln();
            let margin = out.log_beta - (sw.log_beta_bipartite(&s, n) - slack);
            min_margin = min_margin.min(margin);
            if margin < 0.0 {
                bad.push(format!("r={r} n={n}"));
            }
        }
    }
    (bad.is_empty(), format!("min margin {min_margin:.2} nats over 93 cases{}", if bad.is_empty() { String::new() } else { format!("; failing {}", bad.join(", ")) }))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("figure reproduction", figure_reproduction),
        ("hoeffding dominance and coincidence", dominance),
        ("exponential-family duality", duality),
        ("formula vs operator oracle", operator_oracle),
        ("protocol bounds", protocol_bounds),
        ("one-way second-order band", one_way_stein),
        ("separable sandwich", separable_sandwich),
        ("bahadur-rao accuracy", bahadur_rao),
        ("two-way vs separable at finite n", two_way_vs_separable),
    ];
    let mut failed = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(v) => v,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failed += usize::from(!pass);
        println!("criterion {} [{}] {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
