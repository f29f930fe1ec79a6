//! End-to-end runs of the `nlkg` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nlkg::cli::output::{RunManifest, MANIFEST};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn nlkg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlkg"))
        .args(args)
        .env("NLKG_OUT_DIR", out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn run_ok(args: &[&str], out: &Path) -> Vec<PathBuf> {
    let o = nlkg(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap().lines().map(PathBuf::from).collect()
}

fn results(dir: &Path) -> serde_json::Map<String, Value> {
    RunManifest::load(dir).unwrap().results
}

fn outcome(dir: &Path) -> String {
    results(dir)["outcome"]["tag"].as_str().unwrap().to_string()
}

fn files_under(root: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn small_data_disperses() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = run_ok(&["evolve", "--alpha", "1", "--sigma", "0.5"], tmp.path());
    assert_eq!(outcome(&dirs[0]), "Dispersal");
}

#[test]
fn cfl_violation_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nlkg(&["evolve", "--dt", "0.05"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
    let o = nlkg(&["evolve", "--alpha", "-1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_location() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, "{\n  \"alpha\": 1,\n  \"sigmaa\": 2\n}\n").unwrap();
    let o = nlkg(&["evolve", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("sigmaa"), "{err}");
}

#[test]
fn static_start_stays_undecided() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("static.json");
    fs::write(&cfg, r#"{"alpha": 1, "start": "static", "t_end": 10}"#).unwrap();
    let dirs = run_ok(&["evolve", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(outcome(&dirs[0]), "Undecided");
    assert_eq!(results(&dirs[0])["outcome"]["t_end"].as_f64(), Some(10.0));
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"alpha": 1, "sigma": 0.5, "t_end": 2, "name": "x"}"#).unwrap();
    let dirs = run_ok(&["evolve", "--config", cfg.to_str().unwrap(), "--t-end", "3"], tmp.path());
    let m = RunManifest::load(&dirs[0]).unwrap();
    assert_eq!(m.config["t_end"].as_f64(), Some(3.0));
    assert_eq!(m.config["sigma"].as_f64(), Some(0.5));
}

#[test]
fn spectrum_reports_closed_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = run_ok(&["spectrum", "--alpha", "1,0.5,1.5"], tmp.path());
    assert_eq!(dirs.len(), 3);
    let read = |d: &Path| -> Value {
        serde_json::from_str(&fs::read_to_string(d.join("spectrum.json")).unwrap()).unwrap()
    };
    let one = read(&dirs[0]);
    let data = &one["spectral_data"];
    assert!((data["s0"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-14);
    assert_eq!(data["resonant"], Value::Bool(true));
    assert_eq!(data["lambdas"], serde_json::json!([2.0]));
    let half = &read(&dirs[1])["spectral_data"];
    assert_eq!(half["lambdas"], serde_json::json!([1.5, 0.5]));
    assert!((half["omegas"][0].as_f64().unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-14);
    assert_eq!(half["resonant"], Value::Bool(false));
    assert_eq!(half["antibound"], serde_json::json!([]));
    let three_halves = &read(&dirs[2])["spectral_data"];
    assert_eq!(three_halves["lambdas"], serde_json::json!([2.5]));
    assert_eq!(three_halves["resonant"], Value::Bool(false));
    let header = fs::read_to_string(dirs[1].join("profiles.csv")).unwrap();
    assert!(header.starts_with("x,v0,v1,zero_mode\n"));
}

#[test]
fn manifest_indexes_every_file_and_runs_reproduce() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["evolve", "--alpha", "1.5", "--sigma", "1.3", "--t-end", "6", "--snapshots", "2,4", "--probes", "0,1.5"];
    let a = run_ok(&args, tmp.path()).remove(0);
    let b = run_ok(&args, tmp.path()).remove(0);
    assert_ne!(a, b, "runs never share a directory");

    let m = RunManifest::load(&a).unwrap();
    let mut indexed: Vec<String> = m.files.iter().map(|f| f.path.clone()).collect();
    indexed.push(MANIFEST.to_string());
    indexed.sort();
    assert_eq!(indexed, files_under(&a));
    for f in &m.files {
        let bytes = fs::read(a.join(&f.path)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), f.sha256);
        assert_eq!(fs::read(b.join(&f.path)).unwrap(), bytes, "{} differs between runs", f.path);
    }

    // the echoed configuration reproduces the run
    let echo = tmp.path().join("echo.json");
    fs::write(&echo, serde_json::to_string(&m.config).unwrap()).unwrap();
    let c = run_ok(&["evolve", "--config", echo.to_str().unwrap()], tmp.path()).remove(0);
    let mc = RunManifest::load(&c).unwrap();
    assert_eq!(mc.config, m.config);
    let sums = |m: &RunManifest| m.files.iter().map(|f| (f.path.clone(), f.sha256.clone())).collect::<Vec<_>>();
    assert_eq!(sums(&mc), sums(&m));
}

#[test]
fn linearized_unstable_mode_grows_at_s0() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = run_ok(&["evolve", "--alpha", "1", "--linearized", "--t-end", "4"], tmp.path());
    let t = nlkg::cli::output::Table::read(&dirs[0].join("probes.csv")).unwrap();
    let (ts, us) = (t.column("t").unwrap(), t.column("u@0.0").unwrap());
    let k = ts.len() - 1;
    let rate = (us[k] / us[0]).ln() / ts[k];
    assert!((rate - 3f64.sqrt()).abs() < 1e-3, "rate {rate}");
}

#[test]
fn identical_seed_outcomes_are_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("b.json");
    fs::write(&cfg, r#"{"alpha": 1, "bisection": {"seeds": [1e-6, 2e-6], "target_digits": 4}}"#).unwrap();
    let o = nlkg(&["bisect", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no threshold"));
}

#[test]
fn figures_need_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nlkg(&["figures"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = nlkg(&["figures", tmp.path().join("nope").to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("manifest.json"));
}

#[test]
fn bisect_fit_and_figures_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("b.json");
    fs::write(
        &cfg,
        r#"{"alpha": 1.5, "snapshots": [40, 50, 60],
            "bisection": {"target_digits": 8, "trap_t_end": 70}}"#,
    )
    .unwrap();
    let run = run_ok(&["bisect", "--config", cfg.to_str().unwrap()], tmp.path()).remove(0);
    let rec: Value = serde_json::from_str(&fs::read_to_string(run.join("bisection.json")).unwrap()).unwrap();
    assert!(rec["digits"].as_f64().unwrap() >= 8.0);
    let r = results(&run);
    assert_ne!(r["sub_outcome"]["tag"], "Blowup");
    assert_eq!(r["super_outcome"]["tag"], "Blowup");
    assert!(run.join("trapped/snapshots/snapshot_0002.csv").exists());

    let fit = run_ok(&["fit", run.to_str().unwrap()], tmp.path()).remove(0);
    let report: Value = serde_json::from_str(&fs::read_to_string(fit.join("fit.json")).unwrap()).unwrap();
    let s0 = report["s0_measured"].as_f64().unwrap();
    assert!((s0 / (21f64.sqrt() / 2.0) - 1.0).abs() < 0.05, "s0 {s0}");
    assert!(fit.join("residual.csv").exists() && fit.join("envelope.csv").exists());

    let figs = run_ok(&["figures", run.to_str().unwrap()], tmp.path()).remove(0);
    let profiles = fs::read_to_string(figs.join("fig2/profiles.csv")).unwrap();
    assert!(profiles.starts_with("x,zero_mode,t=40,t=50,t=60\n"), "{}", profiles.lines().next().unwrap());
    let pair = fs::read_to_string(figs.join("fig2/pair.csv")).unwrap();
    assert!(pair.starts_with("t,u_sub,u_super,s\n"));
}
