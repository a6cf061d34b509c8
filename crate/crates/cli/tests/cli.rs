use std::fs;
use std::path::Path;

use es_cli::main_with_args;
use serde_json::Value;

fn small_config(extra: &str) -> String {
    format!(
        r#"
mode = "simulate"
seed = 11

[physical]
K = 1.0
gamma = 3.0

[grid]
dim = 1
points = 64
half_length = 10.0

[scheme]
dt_max = 1e-2
t_end = 0.2
output_stride = 5

[background]
lambda = 0.1
kind = "trig"
amplitudes = [0.02]
modes = [1.0]

[initial.rho]
family = "gaussian"
amplitude = 1e-4
width = 1.5

[initial.w]
family = "gaussian"
amplitude = 1e-4
width = 1.5

[initial.a]
family = "gaussian"
amplitude = 1e-4
width = 1.5
wavenumber = [1.0]
{extra}
"#
    )
}

fn esim(dir: &Path, config: Option<&str>, args: &[&str]) -> u8 {
    let mut argv: Vec<String> = vec!["esim".into()];
    if let Some(text) = config {
        let p = dir.join("run.toml");
        fs::write(&p, text).unwrap();
        argv.extend(["-c".into(), p.display().to_string()]);
    }
    argv.extend(args.iter().map(|s| s.to_string()));
    main_with_args(argv)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_manifest_series_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = small_config("").replace("output_stride = 5", "output_stride = 5\ncheckpoint_every = 2");
    assert_eq!(esim(tmp.path(), Some(&cfg), &["-o", out.to_str().unwrap()]), 0);
    for f in ["manifest.json", "series.csv", "report.json", "decay.svg", "checkpoints/final.esf"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["seed"], 11);
    assert_eq!(manifest["spectral_gap"]["pass"], true);
    let report = json(&out.join("report.json"));
    assert_eq!(report["outcome"]["status"], "completed");
    assert!((report["final_time"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    let rows = fs::read_to_string(out.join("series.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 5);
    let ckpts = fs::read_dir(out.join("checkpoints")).unwrap().count();
    assert_eq!(ckpts, 3 + 1);
}

#[test]
fn verify_lemmas_needs_no_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lemmas");
    assert_eq!(esim(tmp.path(), None, &["verify-lemmas", "-o", out.to_str().unwrap()]), 0);
    let r = json(&out.join("lemmas.json"));
    assert_eq!(r["seed"], 2024);
    assert!(r["two_mode_error"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["orders"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_and_unknown_settings_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();
    assert_eq!(esim(tmp.path(), None, &["simulate", "-o", o]), 2);
    assert_eq!(esim(tmp.path(), Some(&small_config("[scheme2]\nfoo = 1")), &["-o", o]), 2);
    assert_eq!(esim(tmp.path(), Some(&small_config("").replace("gamma = 3.0", "gamma = 1.0")), &["-o", o]), 2);
    assert_eq!(esim(tmp.path(), None, &["--no-such-flag"]), 2);
    assert!(!out.exists());
}

#[test]
fn contracting_background_fails_the_gate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("gate");
    let cfg = small_config("").replace("lambda = 0.1", "lambda = -0.5");
    assert_eq!(esim(tmp.path(), Some(&cfg), &["-o", out.to_str().unwrap()]), 3);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["spectral_gap"]["pass"], false);
    assert!(!out.join("series.csv").exists());
}

#[test]
fn strict_gate_rejects_low_regularity() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("strict");
    let cfg = small_config("").replace("output_stride = 5", "output_stride = 5\nregularity = 2.0");
    let o = out.to_str().unwrap();
    assert_eq!(esim(tmp.path(), Some(&cfg), &["-o", o, "--strict-gate"]), 3);
    assert_eq!(esim(tmp.path(), Some(&cfg), &["-o", o]), 0);
    assert_eq!(json(&out.join("report.json"))["regularity_gate_pass"], false);
}

#[test]
fn monitor_trip_exits_with_its_own_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("trip");
    let cfg = small_config("[monitors]\nboundary_tol = 0.0");
    assert_eq!(esim(tmp.path(), Some(&cfg), &["-o", out.to_str().unwrap()]), 4);
    let report = json(&out.join("report.json"));
    assert_eq!(report["outcome"]["status"], "aborted");
    assert_eq!(report["outcome"]["kind"], "boundary");
}

#[test]
fn sweep_writes_one_directory_per_gamma_and_an_aggregate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let cfg = small_config("[sweep]\ngammas = [1.5, 2.0, 3.0]");
    assert_eq!(esim(tmp.path(), Some(&cfg), &["sweep", "-o", out.to_str().unwrap()]), 0);
    for g in ["1.5", "2", "3"] {
        let r = json(&out.join(format!("gamma_{g}")).join("report.json"));
        assert_eq!(r["outcome"]["status"], "completed");
    }
    let rows = json(&out.join("sweep.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3 * 3);
    assert!(rows.iter().all(|r| r["status"] == "completed"));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
}

#[test]
fn report_mode_rebuilds_the_decay_report() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    assert_eq!(esim(tmp.path(), Some(&small_config("")), &["-o", run_dir.to_str().unwrap()]), 0);
    let rep_dir = tmp.path().join("rep");
    let cfg = format!("mode = \"report\"\n[report]\ninput = {:?}\n", run_dir.display().to_string());
    assert_eq!(esim(tmp.path(), Some(&cfg), &["-o", rep_dir.to_str().unwrap()]), 0);
    let original = json(&run_dir.join("report.json"));
    assert_eq!(json(&rep_dir.join("report.json")), original["decay"]);
    assert!(rep_dir.join("decay.svg").is_file());
}

#[test]
fn verify_burgers_reports_slopes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("burgers");
    let cfg = r#"
mode = "verify-burgers"
[grid]
dim = 1
points = 128
half_length = 3.141592653589793
[background]
lambda = 1.0
kind = "trig"
amplitudes = [0.1]
modes = [1.0]
[burgers]
samples = 12
"#;
    assert_eq!(esim(tmp.path(), Some(cfg), &["-o", out.to_str().unwrap()]), 0);
    let r = json(&out.join("burgers.json"));
    let slopes = r["table"]["f_slopes"].as_array().unwrap();
    assert!(slopes[0].as_f64().unwrap() <= -0.5 + 0.15);
    assert!(slopes[1].as_f64().unwrap() <= -1.5 + 0.15);
    assert!(out.join("burgers.csv").is_file() && out.join("burgers.svg").is_file());
}
