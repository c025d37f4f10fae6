use std::path::Path;
use std::process::Command;

use alcove_cli::experiments::{self, Experiment};
use alcove_cli::{ExperimentConfig, RunReport, Status};

fn small_config(out: &Path, extra: &str) -> String {
    format!(
        "n = 1\nT = 1\ndt = 0.01\nsteps = 20\nparticles = 40\nseed = 11\nK = 10\n\
         depths = 0 2 4\nname = small\nout = {}\n{extra}",
        out.display()
    )
}

fn alcove(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_alcove"))
        .args(args)
        .output()
        .expect("binary runs");
    let text =
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

fn read_report(dir: &Path) -> RunReport {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.conf");
    std::fs::write(&path, small_config(dir.path(), "m: 3 7\nE_max = 12.5\n")).unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.n, 1);
    assert_eq!(cfg.m, vec![3.0, 7.0]);
    assert_eq!(cfg.e_max, Some(12.5));
    assert_eq!(cfg.depths, vec![0, 2, 4]);
    assert_eq!(cfg.out, dir.path());
}

#[test]
fn reports_are_reproducible() {
    for exp in [Experiment::Figures, Experiment::Hypotheses] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ca = ExperimentConfig::parse(&small_config(a.path(), "")).unwrap();
        let cb = ExperimentConfig::parse(&small_config(b.path(), "")).unwrap();
        let ra = experiments::run(exp, &ca).unwrap();
        let rb = experiments::run(exp, &cb).unwrap();
        assert_eq!(ra.to_json(), rb.to_json());
        for file in ra.files.iter().chain(["report.json".to_string()].iter()) {
            let fa = std::fs::read(exp.output_dir(&ca).join(file)).unwrap();
            let fb = std::fs::read(exp.output_dir(&cb).join(file)).unwrap();
            assert!(fa == fb, "{} differs in {file}", exp.name());
        }
    }
}

#[test]
fn seed_changes_the_report() {
    let a = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::parse(&small_config(a.path(), "")).unwrap();
    let first = experiments::run(Experiment::Figures, &cfg).unwrap();
    cfg.seed += 1;
    let second = experiments::run(Experiment::Figures, &cfg).unwrap();
    assert_ne!(first.config_hash, second.config_hash);
    assert_ne!(first.metrics, second.metrics);
}

#[test]
fn figures_outputs_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("f.conf");
    std::fs::write(&conf, small_config(Path::new("unused"), "")).unwrap();
    let out = dir.path().join("runs");
    let (code, text) = alcove(&[
        "figures",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "5",
    ]);
    assert_eq!(code, 0, "{text}");
    let exp_dir = out.join("figures");
    for f in [
        "small.csv",
        "small.svg",
        "small_alpha0.svg",
        "small_input.csv",
        "report.json",
    ] {
        assert!(exp_dir.join(f).is_file(), "missing {f}");
    }
    let report = read_report(&exp_dir);
    assert_eq!(report.seed, 5);
    assert_eq!(report.status, Status::Pass);
    let csv = std::fs::read_to_string(exp_dir.join("small.csv")).unwrap();
    assert!(csv.starts_with("t,pair_0,pair_1,series,depth\n"));
    // input + 3 depths x 2 cascades + red, 20 grid points each
    assert_eq!(csv.lines().count(), 1 + 8 * 20);
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "n = 1\nbogus = 3\n").unwrap();
    let (code, text) = alcove(&["cones", "--config", conf.to_str().unwrap()]);
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("unknown key"));
    let (code, _) = alcove(&["cones", "--config", "/nonexistent/alcove.conf"]);
    assert_eq!(code, 2);
}

#[test]
fn driver_error_is_reported_and_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("e.conf");
    // drift outside the fundamental alcove: <nu_hat, alpha_0^vee> < 0
    std::fs::write(&conf, small_config(dir.path(), "nu = 2\n")).unwrap();
    let (code, text) = alcove(&["converge", "--config", conf.to_str().unwrap()]);
    assert_eq!(code, 2, "{text}");
    let report = read_report(&dir.path().join("converge"));
    assert_eq!(report.status, Status::Error);
    assert!(report.checks.iter().any(|c| c.status == Status::Error));
}

#[test]
fn threshold_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("x.conf");
    std::fs::write(&conf, small_config(dir.path(), "n = 2\n")).unwrap();
    let (code, text) = alcove(&["explosion", "--config", conf.to_str().unwrap()]);
    let report = read_report(&dir.path().join("explosion"));
    assert_eq!(code, report.status.exit_code(), "{text}");
    assert_eq!(report.status, Status::Fail, "{text}");
    assert_eq!(code, 1);
}
