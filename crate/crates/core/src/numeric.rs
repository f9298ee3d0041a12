//! Small numerical helpers shared by the modules: log-domain sums and
//! one-dimensional search.

/// `log Σ exp(x_i)`, ignoring `-inf` terms. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `log(exp(a) - exp(b))` for `a >= b`; `-inf` when equal.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp_m1()).ln()
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximisation of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximise `f` on `[lo, hi]` by a uniform scan of `points` nodes followed by
/// golden-section refinement around the best node.
pub fn scan_then_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize, tol: f64) -> (f64, f64) {
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..points {
        let s = if i == points - 1 { hi } else { lo + step * i as f64 };
        let v = f(s);
        if v > best.1 {
            best = (s, v);
            best_i = i;
        }
    }
    let a = if best_i == 0 { lo } else { lo + step * (best_i - 1) as f64 };
    let b = if best_i + 1 >= points { hi } else { lo + step * (best_i + 1) as f64 };
    let refined = golden_max(&f, a, b.min(hi), tol);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}

/// Bisection for the root of a function that changes sign on `[lo, hi]`.
/// `increasing` states the direction of monotonicity.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64, increasing: bool) -> f64 {
    for _ in 0..300 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Checks that `p` is a probability vector within `tol` and returns its sum.
pub(crate) fn check_probability(p: &[f64], tol: f64, allow_zero: bool) -> Result<(), String> {
    if p.is_empty() {
        return Err("empty vector".into());
    }
    for (i, &x) in p.iter().enumerate() {
        if !x.is_finite() || x < 0.0 || (!allow_zero && x <= 0.0) {
            return Err(format!("entry {i} = {x} is not {}", if allow_zero { "non-negative" } else { "positive" }));
        }
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(format!("entries sum to {s}, not 1"));
    }
    Ok(())
}

/// Shannon entropy in nats; zero entries contribute nothing.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Relative entropy `D(q || p)` in nats.
pub fn kl(q: &[f64], p: &[f64]) -> f64 {
    q.iter()
        .zip(p)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}
