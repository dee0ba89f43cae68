use std::path::Path;
use std::process::{Command, Output};

use phaseless_stft::bounds::known_window_measurement_set;
use phaseless_stft::problem::{random_pair, Distribution, ProblemParams, Rng};
use phaseless_stft::stft::measure;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phaseless-stft"));
    c.env_remove("PHASELESS_STFT_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bound_values_and_formats() {
    let o = run(&["bound", "--N", "11", "--W", "3", "--L", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("known=31 blind=33"));
    let o = run(&["bound", "--N", "100", "--W", "10", "--L", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["known_window_count"], 361);
    let o = run(&["bound", "--N", "100", "--W", "10", "--L", "4", "--format", "csv"]);
    assert!(stdout(&o).starts_with("N,W,L,alpha,known,blind,cap_known,cap_blind\n100,10,4,4,361,"));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["bound", "--N", "11", "--W", "12", "--L", "1"]).status.code(), Some(2));
    assert_eq!(run(&["recover", "known", "--N", "16", "--W", "1", "--L", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn recover_statuses_and_exit_codes() {
    let o = run(&["recover", "known", "--N", "16", "--W", "4", "--L", "1", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "unique");
    assert!(v["error"].as_f64().unwrap() <= 1e-6);

    let o = run(&["recover", "blind", "--N", "12", "--W", "3", "--L", "1", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "unique");

    let o = run(&["recover", "blind", "--N", "12", "--W", "3", "--L", "1", "--seed", "1", "--no-closure"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn recover_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = ProblemParams::new(16, 4, 1).unwrap();
    let pair = random_pair(&p, Distribution::ComplexGaussian, &mut Rng::new(9));
    let set = measure(&p, &pair, &known_window_measurement_set(&p).unwrap()).unwrap();
    let csv = dir.path().join("m.csv");
    set.write_csv(std::fs::File::create(&csv).unwrap()).unwrap();
    let win = dir.path().join("w.json");
    std::fs::write(&win, serde_json::to_string(&pair.w).unwrap()).unwrap();

    let base = ["recover", "known", "--N", "16", "--W", "4", "--L", "1", "--input", csv.to_str().unwrap()];
    assert_eq!(run(&base).status.code(), Some(2), "window is required with --input");
    let mut args = base.to_vec();
    args.extend(["--window", win.to_str().unwrap()]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let x: Vec<num_complex::Complex64> = serde_json::from_value(v["estimate"]["x"].clone()).unwrap();
    let err = phaseless_stft::ambiguity::phase_error(&x, &pair.x);
    assert!(err <= 1e-6, "{err}");

    // Dropping one prescribed sample is reported, not guessed around.
    let text = std::fs::read_to_string(&csv).unwrap();
    let short: Vec<&str> = text.lines().take(text.lines().count() - 1).collect();
    std::fs::write(&csv, short.join("\n") + "\n").unwrap();
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn verify_and_negative_control() {
    let o = run(&["verify", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = run(&["verify", "--trials", "1", "--break-action"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL invariance"));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn simulate_writes_tables_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["simulate", "figure4", "--K", "8", "--L", "2", "--W", "6,9", "--trials", "3", "--seed", "7", "--out", out];
    assert_eq!(run(&args).status.code(), Some(0));
    let first = read(dir.path(), "figure4.csv");
    assert!(first.starts_with("K,L,W,success_rate,mean_iterations,mean_final_error,schema_version\n"));
    assert_eq!(first.lines().count(), 3);
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "figure4.manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["outputs"][0], "figure4.csv");
    // Same seed, identical bytes.
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(read(dir.path(), "figure4.csv"), first);

    assert_eq!(run(&["simulate", "figure1", "--N", "100", "--L", "1,4", "--W", "2-20", "--out", out]).status.code(), Some(0));
    let fig1 = read(dir.path(), "figure1.csv");
    assert!(fig1.starts_with("L,W,known,blind,cap_known,cap_blind,schema_version\n"));
    assert_eq!(fig1.lines().count(), 1 + 2 * 19);

    let o = run(&["simulate", "proofsweep", "--trials", "5", "--format", "json", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&read(dir.path(), "proofsweep.json")).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 4);
}

#[test]
fn output_directory_from_environment_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["simulate", "figure1", "--N", "20", "--W", "3"])
        .env("PHASELESS_STFT_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("figure1.csv").exists());

    // A regular file where the directory should be.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = run(&["simulate", "figure1", "--N", "20", "--W", "3", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "N = 11\nW = 3\nL = 1\n").unwrap();
    let o = run(&["bound", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&o).contains("known=31"));
    let o = run(&["bound", "--config", cfg.to_str().unwrap(), "--N", "100", "--W", "10", "--L", "4"]);
    assert!(stdout(&o).contains("known=361"));
}
