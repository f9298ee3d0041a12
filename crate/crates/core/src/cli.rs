//! Command-line front end. Every command reads an optional flat JSON config,
//! overlays command-line flags and writes its documents into the output
//! directory (`--out`, then `LOCC_EXPONENTS_OUT`, then the config's
//! `output_path`, then the working directory).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exponents::{critical_rates, stein_strassen_terms, ClassTag, ExponentCurve};
use crate::protocol::{
    build_hoeffding_collection, build_stein_collection, build_zero_error_collection, dense_oracle_evaluate,
    evaluate_test, hoeffding_bounds, zero_error_log_beta_bound, MeasureCollection, ShellParams,
};
use crate::separable::SeparableTable;
use crate::sld::br_tail_estimate;
use crate::spectrum::{renyi, SchmidtSpectrum};
use crate::typelattice::{exact_tail, one_way_log_beta_exact, Side};

pub const OUTPUT_ENV: &str = "LOCC_EXPONENTS_OUT";
pub const DOC_VERSION: &str = "v1";
pub const RANGE_FLAG: &str = "paper-range ambiguity";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Hoeffding,
    ZeroError,
    Stein,
}

/// Flat run configuration. Either `(d_a, d_b, lambdas)` or the
/// one-parameter shorthand `(d, lambda)` names the state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_a: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_b: Option<usize>,
    /// Schmidt coefficients, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// `(λ, ..., λ, 1-(d-1)λ)` on `d x d`
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    /// evaluate this collection file instead of building one
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// also evaluate with the dense operator oracle (tiny n only)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<bool>,
    /// tail law weights, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// tail support values, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[arg(long = "out")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        overlay!(
            self, top, d_a, d_b, lambdas, d, lambda, r_grid, r_max, points, n, n_grid, eps, r, suite,
            construction, input, dense, weights, x, output_path, format, seed
        );
        self
    }

    /// The state, plus any range flags raised by the shorthand.
    pub fn spectrum(&self) -> Result<(SchmidtSpectrum, Vec<String>)> {
        match (&self.lambdas, self.lambda) {
            (Some(_), Some(_)) => Err(Error::arg("give either `lambdas` or `lambda`, not both")),
            (Some(l), None) => {
                let da = self.d_a.or(self.d).unwrap_or(l.len());
                let db = self.d_b.or(self.d).unwrap_or(l.len());
                Ok((SchmidtSpectrum::new(l.clone(), da, db)?, vec![]))
            }
            (None, Some(lam)) => {
                let d = self.d.ok_or_else(|| Error::arg("`lambda` needs `d`"))?;
                let flags = if SchmidtSpectrum::psi_lambda_range_flag(d, lam) {
                    vec![RANGE_FLAG.to_string()]
                } else {
                    vec![]
                };
                Ok((SchmidtSpectrum::psi_lambda(d, lam)?, flags))
            }
            (None, None) => Err(Error::arg("no state given: set `lambdas` or `d` and `lambda`")),
        }
    }

    fn spectrum_or(&self, default: &[f64]) -> Result<(SchmidtSpectrum, Vec<String>)> {
        if self.lambdas.is_none() && self.lambda.is_none() {
            let d = default.len();
            return Ok((SchmidtSpectrum::new(default.to_vec(), d, d)?, vec![]));
        }
        self.spectrum()
    }

    pub fn output_dir(&self) -> PathBuf {
        // flag and config share the field; the env var sits between them
        self.output_path.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Debug, Parser)]
#[command(name = "locc-exponents", version, about = "Error exponents for local state discrimination")]
pub struct Cli {
    /// flat JSON config; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// one-way and two-way Hoeffding curves plus the caption scalars
    Figure(RunConfig),
    /// closed forms for global measurements
    Global(RunConfig),
    /// cross-checks: stein-oneway, hoeffding-protocol, sep-sandwich, bahadur-rao
    Verify(RunConfig),
    /// build, serialize and evaluate a measure collection
    Protocol(RunConfig),
    /// separable sandwich over the threshold grid
    Sep(RunConfig),
    /// strong large deviation tail estimates against exact tails
    Tail(RunConfig),
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub pass: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        // --help and --version
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(Outcome { files: vec![], pass: true });
        }
        Err(e) => return Err(Error::arg(e.to_string())),
    };
    let base = match &cli.config {
        Some(p) => RunConfig::from_json(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => RunConfig::default(),
    };
    let (flags, kind): (RunConfig, fn(&RunConfig) -> Result<Outcome>) = match cli.command {
        Command::Figure(c) => (c, cmd_figure),
        Command::Global(c) => (c, cmd_global),
        Command::Verify(c) => (c, cmd_verify),
        Command::Protocol(c) => (c, cmd_protocol),
        Command::Sep(c) => (c, cmd_sep),
        Command::Tail(c) => (c, cmd_tail),
    };
    let mut cfg = base;
    if let Ok(dir) = std::env::var(OUTPUT_ENV) {
        if !dir.is_empty() {
            cfg.output_path = Some(PathBuf::from(dir));
        }
    }
    let cfg = cfg.overlay(flags);
    kind(&cfg)
}

/// `x` with 6 significant digits, positional notation for moderate
/// magnitudes and scientific otherwise.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn out_file(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir.join(name))
}

/// Writes a table as CSV or as a JSON document with a `rows` array.
fn write_table(cfg: &RunConfig, stem: &str, header: &[&str], rows: Vec<Vec<String>>, meta: Value) -> Result<PathBuf> {
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let path = out_file(cfg, &format!("{stem}.csv"))?;
            write_csv(&path, header, &rows)?;
            Ok(path)
        }
        Format::Json => {
            let path = out_file(cfg, &format!("{stem}.json"))?;
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|r| Value::Object(header.iter().map(|h| h.to_string()).zip(r.into_iter().map(Value::String)).collect()))
                .collect();
            let mut doc = json!({ "version": DOC_VERSION, "rows": rows });
            if let (Value::Object(d), Value::Object(m)) = (&mut doc, meta) {
                d.extend(m);
            }
            write_json(&path, &doc)?;
            Ok(path)
        }
    }
}

fn warn_flags(flags: &[String]) {
    for f in flags {
        eprintln!("warning: {f}");
    }
}

/// Caption scalars of a curve pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureScalars {
    pub r_one_way: f64,
    pub r_two_way: f64,
    pub log_dims_minus_h0: f64,
    pub log_dims_minus_h_half: f64,
    pub log_dims_minus_h1: f64,
}

pub fn figure_scalars(spec: &SchmidtSpectrum) -> FigureScalars {
    let (r1, r2) = critical_rates(spec);
    let (l, p) = (spec.log_dims(), spec.lambdas());
    FigureScalars {
        r_one_way: r1,
        r_two_way: r2,
        log_dims_minus_h0: l - renyi(p, 0.0),
        log_dims_minus_h_half: l - renyi(p, 0.5),
        log_dims_minus_h1: l - renyi(p, 1.0),
    }
}

fn r_grid(cfg: &RunConfig, scalars: &FigureScalars) -> Vec<f64> {
    if let Some(g) = &cfg.r_grid {
        return g.clone();
    }
    let r_max = cfg.r_max.unwrap_or((1.5 * scalars.r_one_way.max(scalars.r_two_way)).max(0.1));
    let pts = cfg.points.unwrap_or(201).max(2);
    (0..pts).map(|i| r_max * i as f64 / (pts - 1) as f64).collect()
}

pub fn cmd_figure(cfg: &RunConfig) -> Result<Outcome> {
    let (spec, flags) = cfg.spectrum()?;
    warn_flags(&flags);
    let scalars = figure_scalars(&spec);
    let one = ExponentCurve::new(&spec, ClassTag::OneWay);
    let two = ExponentCurve::new(&spec, ClassTag::TwoWay);
    let rows: Vec<Vec<String>> = r_grid(cfg, &scalars)
        .into_iter()
        .map(|r| vec![sig6(r), sig6(one.evaluate(r)), sig6(two.evaluate(r))])
        .collect();
    let table = write_table(cfg, "figure", &["r", "one_way_exponent", "two_way_exponent"], rows, json!({}))?;
    let side = out_file(cfg, "figure.scalars.json")?;
    write_json(
        &side,
        &json!({
            "version": DOC_VERSION,
            "spectrum": spec,
            "scalars": scalars,
            "flags": flags,
        }),
    )?;
    Ok(Outcome {
        files: vec![table, side],
        pass: true,
    })
}

/// The four closed forms for unrestricted measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalReport {
    pub n: usize,
    pub eps: f64,
    pub r: f64,
    /// `log β_g(ε | Ψ ‖ ρ_mix) = -n log d_A d_B + log(1-ε)`
    pub log_beta_psi_eps: f64,
    /// `β_g(ε | ρ_mix ‖ Ψ)`
    pub beta_mix_eps: f64,
    /// `β_g(e^{-nr} | ρ_mix ‖ Ψ)`
    pub beta_mix_rate: f64,
    /// `log β_g(e^{-nr} | Ψ ‖ ρ_mix) = -n log d_A d_B + log(1 - e^{-nr})`
    pub log_beta_psi_rate: f64,
}

pub fn global_report(spec: &SchmidtSpectrum, n: usize, eps: f64, r: f64) -> GlobalReport {
    let l = n as f64 * spec.log_dims();
    GlobalReport {
        n,
        eps,
        r,
        log_beta_psi_eps: -l + (-eps).ln_1p(),
        beta_mix_eps: 0.0,
        beta_mix_rate: if r <= spec.log_dims() { 0.0 } else { 1.0 },
        log_beta_psi_rate: -l + (-(-(n as f64) * r).exp()).ln_1p(),
    }
}

pub fn cmd_global(cfg: &RunConfig) -> Result<Outcome> {
    let (spec, flags) = cfg.spectrum()?;
    warn_flags(&flags);
    let rep = global_report(&spec, cfg.n.unwrap_or(1), cfg.eps.unwrap_or(0.0), cfg.r.unwrap_or(0.0));
    let path = out_file(cfg, "global.json")?;
    write_json(&path, &json!({ "version": DOC_VERSION, "spectrum": spec, "report": rep, "flags": flags }))?;
    Ok(Outcome {
        files: vec![path],
        pass: true,
    })
}

const DEFAULT_P: [f64; 2] = [0.1, 0.9];

fn verify_stein(cfg: &RunConfig) -> Result<(bool, Value)> {
    let (spec, _) = cfg.spectrum_or(&DEFAULT_P)?;
    let eps = cfg.eps.unwrap_or(0.3);
    let ns = cfg.n_grid.clone().unwrap_or_else(|| (1..=10).map(|k| 20 * k).collect());
    let exp = stein_strassen_terms(&spec, eps, ClassTag::OneWay)?;
    let mut rows = vec![];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &n in &ns {
        let lb = one_way_log_beta_exact(&spec, n, eps)?;
        let res = lb - exp.evaluate(n);
        lo = lo.min(res);
        hi = hi.max(res);
        rows.push(json!({ "n": n, "log_beta_exact": lb, "expansion": exp.evaluate(n), "residual": res }));
    }
    let band = hi - lo;
    Ok((band <= 2.0, json!({ "eps": eps, "band": band, "band_limit": 2.0, "rows": rows })))
}

fn verify_hoeffding(cfg: &RunConfig) -> Result<(bool, Value)> {
    let (spec, _) = cfg.spectrum_or(&DEFAULT_P)?;
    let r = cfg.r.unwrap_or(0.3);
    let ns = cfg.n_grid.clone().unwrap_or_else(|| vec![cfg.n.unwrap_or(10)]);
    let mut rows = vec![];
    let mut pass = true;
    for &n in &ns {
        let out = evaluate_test(&spec, &build_hoeffding_collection(&spec, n, r)?)?;
        let b = hoeffding_bounds(&spec, n, r)?;
        let zero = evaluate_test(&spec, &build_zero_error_collection(&spec, n)?)?;
        let zb = zero_error_log_beta_bound(&spec, n)?;
        let ok = out.alpha <= b.log_alpha.exp() && out.log_beta <= b.log_beta && zero.alpha == 0.0 && zero.log_beta <= zb;
        pass &= ok;
        rows.push(json!({
            "n": n, "alpha": out.alpha, "alpha_bound": b.log_alpha.exp(),
            "log_beta": out.log_beta, "log_beta_bound": b.log_beta,
            "zero_error_alpha": zero.alpha, "zero_error_log_beta": zero.log_beta,
            "zero_error_log_beta_bound": zb, "pass": ok,
        }));
    }
    Ok((pass, json!({ "r": r, "rows": rows })))
}

fn verify_sep(cfg: &RunConfig) -> Result<(bool, Value)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let ns = cfg.n_grid.clone().unwrap_or_else(|| vec![1, 2, 4, 8, 12]);
    let mut rows = vec![];
    let mut pass = true;
    for &n in &ns {
        let p = match cfg.spectrum_or(&[]) {
            Ok((s, _)) => s.lambdas().to_vec(),
            Err(_) => {
                let d = rng.gen_range(2..=3);
                let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|v| v / s).collect()
            }
        };
        let t = SeparableTable::new(&p, n)?;
        let m = t.levels().len();
        let (mut lemma_ok, mut ordered, mut violations) = (true, true, 0usize);
        for kp in 0..m {
            for k in kp..m {
                let a = t.a_at(k, kp);
                let lo = -t.sums_at(k).log_p1.exp_m1();
                let hi = -t.sums_at(kp).log_p1.exp_m1();
                lemma_ok &= lo - 1e-12 <= a && a <= hi + 1e-12;
            }
            let s = t.sandwich_at(kp);
            ordered &= s.alpha_lower <= s.alpha_upper + 1e-15;
            violations += s.monotonicity_violations.len();
        }
        pass &= lemma_ok && ordered;
        rows.push(json!({
            "n": n, "p": p, "levels": m, "lemma_holds": lemma_ok,
            "bracket_ordered": ordered, "monotonicity_violations": violations,
        }));
    }
    Ok((pass, json!({ "seed": cfg.seed(), "rows": rows })))
}

fn tail_inputs(cfg: &RunConfig) -> (Vec<f64>, Vec<f64>, f64) {
    (
        cfg.weights.clone().unwrap_or_else(|| vec![0.5, 0.5]),
        cfg.x.clone().unwrap_or_else(|| vec![0.0, 1.0]),
        cfg.r.unwrap_or(0.75),
    )
}

fn verify_tail(cfg: &RunConfig) -> Result<(bool, Value)> {
    let (w, x, r) = tail_inputs(cfg);
    let ns = cfg.n_grid.clone().unwrap_or_else(|| vec![20, 40, 80]);
    let mut rows = vec![];
    let mut prev = f64::INFINITY;
    let mut pass = true;
    for &n in &ns {
        let exact = exact_tail(&w, &x, n, r, Side::Ge)?;
        let approx = br_tail_estimate(&w, &x, n, r)?.approx_log_tail;
        let res = (approx - exact).abs();
        pass &= res <= prev + 0.05;
        prev = res;
        rows.push(json!({ "n": n, "exact_log_tail": exact, "approx_log_tail": approx, "residual": res }));
    }
    Ok((pass, json!({ "weights": w, "x": x, "r": r, "rows": rows })))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let suite = cfg.suite.clone().unwrap_or_default();
    let (pass, body) = match suite.as_str() {
        "stein-oneway" => verify_stein(cfg)?,
        "hoeffding-protocol" => verify_hoeffding(cfg)?,
        "sep-sandwich" => verify_sep(cfg)?,
        "bahadur-rao" => verify_tail(cfg)?,
        _ => return Err(Error::UnknownSuite(suite)),
    };
    let path = out_file(cfg, &format!("verify-{suite}.json"))?;
    write_json(&path, &json!({ "version": DOC_VERSION, "suite": suite, "pass": pass, "report": body }))?;
    Ok(Outcome { files: vec![path], pass })
}

pub fn cmd_protocol(cfg: &RunConfig) -> Result<Outcome> {
    let (spec, flags) = cfg.spectrum()?;
    warn_flags(&flags);
    let mut files = vec![];
    let coll: MeasureCollection = match &cfg.input {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => {
            let n = cfg.n.ok_or_else(|| Error::arg("`n` is required"))?;
            let coll = match cfg.construction.unwrap_or(Construction::Hoeffding) {
                Construction::Hoeffding => {
                    build_hoeffding_collection(&spec, n, cfg.r.ok_or_else(|| Error::arg("`r` is required"))?)?
                }
                Construction::ZeroError => build_zero_error_collection(&spec, n)?,
                Construction::Stein => build_stein_collection(
                    &spec,
                    n,
                    cfg.eps.ok_or_else(|| Error::arg("`eps` is required"))?,
                    ShellParams::defaults(&spec)?,
                )?,
            };
            let path = out_file(cfg, "collection.json")?;
            write_json(&path, &serde_json::to_value(&coll)?)?;
            files.push(path);
            coll
        }
    };
    let exact = evaluate_test(&spec, &coll)?;
    let dense = if cfg.dense.unwrap_or(false) {
        Some(dense_oracle_evaluate(&spec, &coll)?)
    } else {
        None
    };
    let path = out_file(cfg, "outcome.json")?;
    write_json(
        &path,
        &json!({
            "version": DOC_VERSION,
            "n": coll.n,
            "measures": coll.measure_count().to_string(),
            "outcome": exact,
            "dense": dense,
            "flags": flags,
        }),
    )?;
    files.push(path);
    Ok(Outcome { files, pass: true })
}

pub fn cmd_sep(cfg: &RunConfig) -> Result<Outcome> {
    let (spec, flags) = cfg.spectrum()?;
    warn_flags(&flags);
    let ns = cfg.n_grid.clone().unwrap_or_else(|| vec![cfg.n.unwrap_or(10)]);
    let log_dmax = (spec.dim_max() as f64).ln();
    let mut rows = vec![];
    for &n in &ns {
        let t = SeparableTable::new(spec.lambdas(), n)?;
        for kp in 0..t.levels().len() {
            let s = t.sandwich_at(kp);
            rows.push(vec![
                n.to_string(),
                sig6(s.r_prime),
                sig6(s.log_beta_value),
                sig6(s.log_beta_value - n as f64 * log_dmax),
                sig6(s.alpha_lower),
                sig6(s.alpha_upper),
                sig6(s.r_min),
                s.r_tilde.map_or(String::new(), sig6),
                s.exact.to_string(),
                s.monotonicity_violations.len().to_string(),
            ]);
        }
    }
    let header = [
        "n",
        "r_prime",
        "log_beta_value",
        "log_beta_bipartite",
        "alpha_lower",
        "alpha_upper",
        "r_min",
        "r_tilde",
        "exact",
        "monotonicity_violations",
    ];
    let path = write_table(cfg, "sep", &header, rows, json!({ "flags": flags }))?;
    Ok(Outcome {
        files: vec![path],
        pass: true,
    })
}

pub fn cmd_tail(cfg: &RunConfig) -> Result<Outcome> {
    let (w, x, r) = tail_inputs(cfg);
    let ns = cfg.n_grid.clone().unwrap_or_else(|| vec![cfg.n.unwrap_or(100)]);
    let mut rows = vec![];
    for &n in &ns {
        let a = br_tail_estimate(&w, &x, n, r)?;
        let exact = exact_tail(&w, &x, n, r, Side::Ge)?;
        rows.push(vec![
            n.to_string(),
            sig6(r),
            sig6(exact),
            sig6(a.approx_log_tail),
            sig6(a.chi0),
            sig6(a.chi1),
            sig6(a.lattice_span),
        ]);
    }
    let header = ["n", "r", "exact_log_tail", "approx_log_tail", "chi0", "chi1", "lattice_span"];
    let path = write_table(cfg, "tail", &header, rows, json!({}))?;
    Ok(Outcome {
        files: vec![path],
        pass: true,
    })
}
