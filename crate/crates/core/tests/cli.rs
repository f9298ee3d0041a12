use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};

use locc_exponents::cli::{Construction, Format, RunConfig, OUTPUT_ENV};
use proptest::prelude::*;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_locc-exponents"));
    c.env_remove(OUTPUT_ENV).stdout(Stdio::null()).stderr(Stdio::null());
    c
}

fn figure_in(dir: &Path) -> Vec<u8> {
    let st = bin()
        .args(["figure", "--d", "3", "--lambda", "0.1", "--points", "51", "--out"])
        .arg(dir)
        .status()
        .unwrap();
    assert!(st.success());
    fs::read(dir.join("figure.csv")).unwrap()
}

#[test]
fn figure_output_is_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let x = figure_in(a.path());
    let y = figure_in(b.path());
    assert_eq!(x, y);
    assert!(!x.contains(&b'\r'));
    assert!(a.path().join("figure.scalars.json").exists());
}

#[test]
fn env_var_sits_between_flag_and_config() {
    let (cfg_dir, env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg_path = cfg_dir.path().join("run.json");
    let cfg = RunConfig {
        lambdas: Some(vec![0.1, 0.9]),
        n: Some(8),
        output_path: Some(cfg_dir.path().to_path_buf()),
        ..Default::default()
    };
    fs::write(&cfg_path, cfg.to_json().unwrap()).unwrap();

    assert!(bin().args(["global", "--config"]).arg(&cfg_path).status().unwrap().success());
    assert!(cfg_dir.path().join("global.json").exists());

    let st = bin().args(["global", "--config"]).arg(&cfg_path).env(OUTPUT_ENV, env_dir.path()).status().unwrap();
    assert!(st.success());
    assert!(env_dir.path().join("global.json").exists());

    let st = bin()
        .args(["global", "--config"])
        .arg(&cfg_path)
        .env(OUTPUT_ENV, env_dir.path())
        .arg("--out")
        .arg(flag_dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    assert!(flag_dir.path().join("global.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin().args(["verify", "--suite", "stein-oneway", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(ok.code(), Some(0));
    // residuals must shrink with n; listing n in decreasing order breaks that
    let fail = bin()
        .args(["verify", "--suite", "bahadur-rao", "--n-grid", "400,10", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(fail.code(), Some(1));
    let err = bin().args(["verify", "--suite", "nonsense", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(err.code(), Some(2));
    assert_eq!(bin().arg("--help").status().unwrap().code(), Some(0));
    let bad = bin().args(["figure", "--lambdas", "0.5,0.6"]).status().unwrap();
    assert_eq!(bad.code(), Some(2));
}

#[test]
fn protocol_writes_collection_that_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["protocol", "--lambdas", "0.1,0.9", "--n", "10", "--r", "0.2", "--construction", "hoeffding", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let first: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("outcome.json")).unwrap()).unwrap();
    let again = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["protocol", "--lambdas", "0.1,0.9", "--input"])
        .arg(dir.path().join("collection.json"))
        .arg("--out")
        .arg(again.path())
        .status()
        .unwrap();
    assert!(st.success());
    let second: serde_json::Value = serde_json::from_str(&fs::read_to_string(again.path().join("outcome.json")).unwrap()).unwrap();
    assert_eq!(first["alpha"], second["alpha"]);
    assert_eq!(first["log_beta"], second["log_beta"]);
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        (
            prop::option::of(1usize..6),
            prop::option::of(prop::collection::vec(0.0f64..1.0, 1..5)),
            prop::option::of(0.0f64..1.0),
            prop::option::of(1usize..500),
            prop::option::of(prop::collection::vec(1usize..500, 0..4)),
        ),
        (
            prop::option::of(-1e3f64..1e3),
            prop::option::of("[a-z-]{1,12}"),
            prop::option::of(prop_oneof![Just(Construction::Hoeffding), Just(Construction::ZeroError), Just(Construction::Stein)]),
            prop::option::of(any::<bool>()),
            prop::option::of(prop_oneof![Just(Format::Csv), Just(Format::Json)]),
            prop::option::of(any::<u64>()),
        ),
    )
        .prop_map(|((d, lambdas, lambda, n, n_grid), (r, suite, construction, dense, format, seed))| RunConfig {
            d_a: d,
            lambdas,
            lambda,
            n,
            n_grid,
            r,
            eps: lambda,
            suite,
            construction,
            dense,
            format,
            seed,
            ..Default::default()
        })
}

proptest! {
    #[test]
    fn config_round_trips(cfg in config_strategy()) {
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    assert!(RunConfig::from_json(r#"{"lambdas":[0.5,0.5],"colour":"red"}"#).is_err());
}
