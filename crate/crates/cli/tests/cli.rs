use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PRIOR_SHIFT: &str = r#"
seed = 2024
paths = 100
true_prior = 0.2
agent_prior = 0.1
outcome = "drawn_from_prior"

[scenario]
kind = "discrete"
horizon = 300
truth = { family = "gaussian_iid", mean_b = 0.5, mean_bbar = -0.5, stdev = 1.0 }
test = { family = "gaussian_iid", mean_b = 0.5, mean_bbar = -0.5, stdev = 1.0 }

[redundancy]
series_a = "agent"
series_b = "would_be"

[asset]
payoff_b = 100.0
payoff_bbar = 50.0
discount = 0.95
"#;

const FILTER: &str = r#"
seed = 11
paths = 40
true_prior = 0.5
agent_prior = 0.3
outcome = "b"

[scenario]
kind = "filter"
true_drift = 0.5
agent_drift = 0.4
obs_noise = 1.0
agent_obs_noise = 1.0
step = 0.01
steps = 100
"#;

fn seqbelief(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqbelief")).args(args).output().unwrap()
}

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (PathBuf, Output) {
    let cfg = dir.join(format!("{command}.toml"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("out_{command}_{}", extra.join("_").replace(['-', ','], "")));
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = seqbelief(&args);
    (out, o)
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn error_report(o: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap()
}

#[test]
fn matched_model_has_zero_error_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PRIOR_SHIFT.replace("agent_prior = 0.1", "agent_prior = 0.2");
    let (out, o) = run(dir.path(), "simulate", &cfg, &["--paths", "5"]);
    ok(&o);
    for k in 0..5 {
        let text = fs::read_to_string(out.join(format!("trajectories/path_{k:06}.csv"))).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header, ["step", "datum", "true_loglr", "test_loglr", "p", "p_check", "pi", "err", "bias", "diffusive"]);
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 301);
        for row in rows {
            assert_eq!(&row[7..], ["0", "0", "0"]);
        }
    }
}

#[test]
fn prior_shift_verdict_is_linear_with_factor() {
    let dir = tempfile::tempdir().unwrap();
    let (out, o) = run(dir.path(), "redundancy", PRIOR_SHIFT, &[]);
    ok(&o);
    let report = json(&out.join("redundancy.json"));
    assert_eq!(report["verdict"]["verdict"], "redundant_linear");
    let c = report["verdict"]["c"].as_f64().unwrap();
    assert!((c - 2.25).abs() < 0.01, "c = {c}");
    let fits = fs::read_to_string(out.join("time_fits.csv")).unwrap();
    assert_eq!(fits.lines().next().unwrap(), "time,gamma,c,residual,state_map_residual");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, oa) = run(dir.path(), "simulate", FILTER, &[]);
    ok(&oa);
    let b = dir.path().join("again");
    let cfg = dir.path().join("simulate.toml");
    ok(&seqbelief(&["simulate", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]));
    let ma = json(&a.join("manifest.json"));
    let mb = json(&b.join("manifest.json"));
    assert_eq!(ma["artifacts"], mb["artifacts"]);
    assert_eq!(ma["config_sha256"], mb["config_sha256"]);
    let artifacts = ma["artifacts"].as_object().unwrap();
    assert_eq!(artifacts.keys().filter(|k| k.starts_with("trajectories/")).count(), 40);
    for name in artifacts.keys() {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let header = fs::read_to_string(a.join("trajectories/path_000000.csv")).unwrap();
    assert!(header.starts_with("time,datum,"));
}

#[test]
fn seed_override_changes_output_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let (a, oa) = run(dir.path(), "simulate", FILTER, &["--format", "jsonl"]);
    ok(&oa);
    let (b, ob) = run(dir.path(), "simulate", FILTER, &["--format", "jsonl", "--seed", "12"]);
    ok(&ob);
    assert_eq!(json(&a.join("manifest.json"))["seed"], 11);
    assert_eq!(json(&b.join("manifest.json"))["seed"], 12);
    assert_ne!(
        fs::read(a.join("summaries.jsonl")).unwrap(),
        fs::read(b.join("summaries.jsonl")).unwrap()
    );
    assert!(!a.join("trajectories").exists());
    assert!(!a.join("summary.json").exists());
}

#[test]
fn manifest_checksums_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let (out, o) = run(dir.path(), "errors", FILTER, &["--format", "csv,json"]);
    ok(&o);
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["command"], "errors");
    assert_eq!(m["paths"], 40);
    assert_eq!(m["formats"], serde_json::json!(["csv", "json"]));
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    for (name, art) in m["artifacts"].as_object().unwrap() {
        let bytes = fs::read(out.join(name)).unwrap();
        assert_eq!(art["bytes"].as_u64().unwrap(), bytes.len() as u64, "{name}");
    }
    let decomposition = fs::read_to_string(out.join("decomposition.csv")).unwrap();
    assert_eq!(
        decomposition.lines().next().unwrap(),
        "path,time,bias,diffusive,total,bias_closed_form,rho"
    );
    let stats = json(&out.join("sign_statistics.json"));
    let rows = stats["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[3]["drift_integral"].as_f64().unwrap() > 0.0);
}

#[test]
fn scenario_writes_asset_table() {
    let dir = tempfile::tempdir().unwrap();
    let (out, o) = run(dir.path(), "scenario", PRIOR_SHIFT, &["--paths", "3", "--format", "csv"]);
    ok(&o);
    let asset = fs::read_to_string(out.join("asset.csv")).unwrap();
    let mut lines = asset.lines();
    assert_eq!(lines.next().unwrap(), "path,step,x,y,z");
    assert_eq!(lines.count(), 3 * 301);
    let first: Vec<f64> = asset.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // π = 0.1, p = 0.2: X = 0.95 · 55, Y = 60.
    assert!((first[2] - 52.25).abs() < 1e-12);
    assert!((first[3] - 60.0).abs() < 1e-12);
    assert!((first[4] - 7.75).abs() < 1e-12);
}

#[test]
fn exit_codes_and_error_reports() {
    let dir = tempfile::tempdir().unwrap();

    let (_, o) = run(dir.path(), "simulate", "seed = [", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_report(&o)["error"], "parse");

    let no_seed = PRIOR_SHIFT.replace("seed = 2024", "");
    let (_, o) = run(dir.path(), "simulate", &no_seed, &[]);
    assert_eq!(o.status.code(), Some(3));
    let report = error_report(&o);
    assert_eq!(report["exit_code"], 3);
    assert!(report["message"].as_str().unwrap().contains("seed"));

    let bad_prior = PRIOR_SHIFT.replace("true_prior = 0.2", "true_prior = 0.0");
    let (_, o) = run(dir.path(), "errors", &bad_prior, &[]);
    assert_eq!(o.status.code(), Some(3));

    let (_, o) = run(dir.path(), "redundancy", FILTER, &[]);
    assert_eq!(o.status.code(), Some(3));

    let flat = PRIOR_SHIFT.replace(
        "test = { family = \"gaussian_iid\", mean_b = 0.5, mean_bbar = -0.5",
        "test = { family = \"gaussian_iid\", mean_b = 0.3, mean_bbar = 0.3",
    );
    let (_, o) = run(dir.path(), "redundancy", &flat, &[]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_report(&o)["error"], "runtime");

    assert_eq!(seqbelief(&["frobnicate"]).status.code(), Some(2));
}
