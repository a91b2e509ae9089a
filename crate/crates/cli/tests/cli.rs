use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wgchain_cli::config::{self, Method, Overrides, RunConfig};
use wgchain_cli::runner::{execute, run_member, write_artifacts};
use wgchain_core::{Error, PhysParams};

fn wgchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgchain")).args(args).output().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn run_to(dir: &Path, args: &[&str]) -> Value {
    let mut all = vec!["run"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    let out = wgchain(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    summary(dir)
}

/// Artifacts with the wall-clock timings removed.
fn reproducible(dir: &Path) -> (String, String, Value) {
    let mut s = summary(dir);
    s.as_object_mut().unwrap().remove("timings");
    s["config"].as_object_mut().unwrap().remove("out");
    for m in s["members"].as_array_mut().unwrap() {
        m.as_object_mut().map(|o| o.remove("timings"));
    }
    (
        std::fs::read_to_string(dir.join("probabilities.csv")).unwrap(),
        std::fs::read_to_string(dir.join("profiles.csv")).unwrap(),
        s,
    )
}

#[test]
fn fig2_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let s = run_to(tmp.path(), &["fig2", "--scale", "0.3"]);
    let csv = std::fs::read_to_string(tmp.path().join("probabilities.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,p,p0,pa,E_left,E_right,E_raman,E_ext");
    let prof = std::fs::read_to_string(tmp.path().join("profiles.csv")).unwrap();
    assert_eq!(prof.lines().next().unwrap(), "z_over_vg_per_gamma,alpha2_left,alpha2_right");
    assert!(prof.lines().count() > 10);
    assert_eq!(s["format_version"], 1);
    assert_eq!(s["method_used"], "markovian");
    assert!(s["diagnostics"]["witness_p0_pa"].as_f64().unwrap() <= 1e-6);
    let p = PhysParams::default();
    let expect = 90.0 * p.gamma_1d() / 2.0;
    let fast = s["rates"]["fast_component"].as_f64().unwrap();
    assert!((fast - expect).abs() / expect < 0.1, "{fast} vs {expect}");
    assert_eq!(s["oscillation"]["status"], "not_applicable");
}

#[test]
fn fig4_oscillates() {
    let tmp = tempfile::tempdir().unwrap();
    let s = run_to(tmp.path(), &["fig4", "--scale", "0.3"]);
    assert_eq!(s["oscillation"]["status"], "fitted");
    assert!(s["oscillation"]["frequency"].as_f64().unwrap() > 0.0);
}

#[test]
fn fig7b_matches_cavity_model() {
    let tmp = tempfile::tempdir().unwrap();
    let s = run_to(tmp.path(), &["fig7b", "--scale", "0.1"]);
    assert_eq!(s["method_used"], "spectral");
    assert_eq!(s["regime"]["cavity_retardation"], true);
    let osc = s["oscillation"]["frequency"].as_f64().unwrap();
    let jc = s["jc_fit"]["frequency"].as_f64().unwrap();
    assert!((osc - jc).abs() / jc < 0.1, "{osc} vs {jc}");
    assert_eq!(s["converged"], true);
}

#[test]
fn repeat_runs_are_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = ["fig3c", "--scale", "0.1", "--ensemble", "2", "--seed", "5"];
    run_to(a.path(), &args);
    run_to(b.path(), &args);
    let mut one = args.to_vec();
    one.extend_from_slice(&["--workers", "1"]);
    run_to(c.path(), &one);
    let (ra, rb, rc) = (reproducible(a.path()), reproducible(b.path()), reproducible(c.path()));
    assert_eq!(ra, rb);
    assert_eq!(ra.0, rc.0);
    assert_eq!(ra.1, rc.1);
    assert_eq!(ra.2["ledger"], rc.2["ledger"]);
    assert_eq!(ra.2["members"].as_array().unwrap().len(), 2);
}

#[test]
fn methods_agree_in_markovian_regime() {
    let cfg = RunConfig::scenario("fig2", 0.1).unwrap();
    let m = run_member(&cfg, 0, Method::Markovian).unwrap();
    let s = run_member(&cfg, 0, Method::Spectral).unwrap();
    assert_eq!(m.series.t, s.series.t);
    let worst = m
        .series
        .p
        .iter()
        .zip(&s.series.p)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn config_errors_point_at_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, "[run]\nscenario = \"fig2\"\nscale = -0.5\n").unwrap();
    let out = wgchain(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml:3:"), "{err}");

    std::fs::write(&path, "[run]\nscenario = \"fig2\"\n\n[spectral]\nwidth = 3.0\n").unwrap();
    let out = wgchain(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.toml:5:"));
}

#[test]
fn unknown_scenario_is_rejected() {
    let out = wgchain(&["run", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fig9") && err.contains("fig7b"), "{err}");
}

#[test]
fn free_space_spectral_is_unsupported() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("c.toml");
    std::fs::write(&path, "[run]\nscenario = \"bare\"\nscale = 0.1\nmethod = \"spectral\"\nfree_space = true\n").unwrap();
    let cfg = config::load(&path, &Overrides::default()).unwrap();
    assert!(matches!(run_member(&cfg, 0, Method::Spectral), Err(Error::Unsupported(_))));
}

#[test]
fn custom_geometry() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("c.toml");
    std::fs::write(
        &path,
        "[emitter]\ncount = 6\n\n[right_mirror]\ncount = 12\nspacing = 0.25\n\n[time]\nt_max = 8.0\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let s = run_to(&out_dir, &["--config", path.to_str().unwrap()]);
    let counts: Vec<u64> = s["config"]["chain"]["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|seg| seg["count"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, [6, 12]);
    assert_eq!(s["regime"]["n_emitter"], 6);
    let ledger = &s["ledger"];
    let total: f64 = ["p_left", "p_right", "p_raman", "p_ext", "residual"]
        .iter()
        .map(|k| ledger[k].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 3e-3, "{total}");
    assert!(s["diagnostics"]["max_balance_error"].as_f64().unwrap() < 1e-6);
}

#[test]
fn summary_config_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::scenario("fig5", 0.1).unwrap();
    cfg.out = tmp.path().join("a");
    write_artifacts(&execute(&cfg).unwrap(), &cfg.out).unwrap();
    let echoed: RunConfig = serde_json::from_value(summary(&cfg.out)["config"].clone()).unwrap();
    assert_eq!(echoed, cfg);
    let mut again = echoed;
    again.out = tmp.path().join("b");
    write_artifacts(&execute(&again).unwrap(), &again.out).unwrap();
    let (a, b) = (reproducible(&cfg.out), reproducible(&again.out));
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.2["ledger"], b.2["ledger"]);
}
