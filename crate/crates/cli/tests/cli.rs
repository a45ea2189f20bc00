use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BASE: &str = "\
[grid]
kind = interval
cells = 16

[model]
chi = 1
mu = 1

[initial_u]
profile = cosine
base = 1
amplitude = 0.5

[time]
t_end = 0.5
dt_max = 0.01
sample_every = 0.1

[output]
dir = run
snapshots = final
";

fn kslab(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kslab"))
        .args(args)
        .env("KSLAB_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.cfg");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_outputs_under_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), BASE);
    let out = kslab(tmp.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let dir = tmp.path().join("run");
    let csv = fs::read_to_string(dir.join("series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(dir.join("report.txt").exists());
    assert!(dir.join("snapshot_final.bin").exists());
    assert!(stdout(&out).contains("mass_decay_bound"));
}

#[test]
fn ceiling_zero_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{BASE}[time]\nceiling = 0\n"));
    let out = kslab(tmp.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stdout(&out).contains("TRIGGERED"));
}

#[test]
fn bad_config_exits_2_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &BASE.replace("mu = 1", "mu = -1"));
    let out = kslab(tmp.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 7"), "{}", stderr(&out));
    assert!(stderr(&out).contains("mu > 0"));
}

#[test]
fn unwritable_output_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run"), b"not a directory").unwrap();
    let cfg = write_config(tmp.path(), BASE);
    let out = kslab(tmp.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn sweep_and_empty_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{BASE}[sweep]\nmu = 1, 2\n"));
    let out = kslab(tmp.path(), &["sweep", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("run/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "mu,chi,epsilon,dim,outcome,max_sup_u,t_final");
    assert!(lines[1].starts_with("1,1,0,1,bounded,"));
    assert!(lines[2].starts_with("2,1,0,1,bounded,"));

    let cfg = write_config(tmp.path(), &format!("{BASE}[sweep]\nchi =\n"));
    let out = kslab(tmp.path(), &["sweep", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(tmp.path().join("run/sweep.csv")).unwrap().lines().count(), 1);
}

#[test]
fn eps_study_needs_three_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{BASE}[eps_study]\nepsilons = 0.1, 0.01\n"));
    let out = kslab(tmp.path(), &["eps-study", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least 3"));

    let cfg = write_config(tmp.path(), &format!("{BASE}[eps_study]\nepsilons = 0.1, 0.01, 0.001\n"));
    let out = kslab(tmp.path(), &["eps-study", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(tmp.path().join("run/eps_study.csv").exists());
}

#[test]
fn oracle_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kslab(tmp.path(), &["oracle", "a1", "2"]);
    assert_eq!(stdout(&out), "delta,a1\n2.0000000000000000e0,1.8518518518518517e-2\n");
    let out = kslab(tmp.path(), &["oracle", "min-h", "--delta", "2", "--chi", "1"]);
    let row: Vec<f64> = stdout(&out).lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[4] - 1.0 / 3.0).abs() < 1e-12 && (row[5] - 0.5).abs() < 1e-12, "{row:?}");
    let out = kslab(tmp.path(), &["oracle", "threshold", "--dim", "2", "--chi", "5"]);
    assert!(stdout(&out).ends_with(",0.0000000000000000e0\n"));
    let out = kslab(tmp.path(), &["oracle", "logistic", "--u0", "0", "--a", "1", "--mu", "1", "--t", "0", "5"]);
    assert_eq!(stdout(&out).lines().count(), 3);
    assert!(stdout(&out).contains(",0.0000000000000000e0"));
    let out = kslab(tmp.path(), &["oracle", "a1", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_filters() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kslab(tmp.path(), &["verify", "a1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("[PASS]  8 a1-values"));
    assert!(stdout(&out).contains("0 failed"));

    let out = kslab(tmp.path(), &["verify", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("available: homogeneous-equivalence"));
}

#[test]
fn shipped_scenarios_listed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kslab(tmp.path(), &["scenario"]);
    assert!(stdout(&out).lines().any(|l| l == "default_1d"));
    let out = kslab(tmp.path(), &["scenario", "default_1d"]);
    assert!(stdout(&out).contains("[eps_study]"));
}
