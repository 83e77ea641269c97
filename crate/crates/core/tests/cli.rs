use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac-cqed"))
}

fn run_config(dir: &Path, text: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, text).unwrap();
    bin().arg("run").arg(&cfg).arg("--out-dir").arg(dir.join("out")).args(extra).output().unwrap()
}

#[test]
fn run_is_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let text = "scenario = fig2_fw\nname = det\n";
    for dir in [&a, &b] {
        let out = run_config(dir.path(), text, &[]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["det_fw_linearized_trajectory.csv", "det_fw_exact_trajectory.csv"] {
        let x = std::fs::read(a.path().join("out").join(file)).unwrap();
        let y = std::fs::read(b.path().join("out").join(file)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn trajectory_csv_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "scenario = fig2_heavy\nname = h\nframes = effective\n", &[]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("out/h_effective_trajectory.csv")).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(lines.next().unwrap().split(',').next(), Some("t"));
    assert_eq!(lines.count(), 301);
    assert!(String::from_utf8_lossy(&out.stdout).contains("h effective: t=30.000"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "scenario = fig1a\nn_max = lots\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = run_config(dir.path(), "", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncation_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "scenario = fig1a\nframes = effective\noutputs = trajectory\n", &["--nmax", "12"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unresolved_dt_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "scenario = fig1a\nframes = lab\n", &["--dt", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes_and_detects_injected_fault() {
    let ok = bin().arg("check").output().unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = bin().args(["check", "--inject-sigma-y-fault"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(4));
    let report = String::from_utf8_lossy(&bad.stdout);
    assert!(report.lines().any(|l| l.starts_with("ehrenfest_relations\tfail\t")), "{report}");
}

#[test]
fn list_scenarios_names_all_sixteen() {
    let out = bin().arg("list-scenarios").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 16);
    assert!(text.lines().any(|l| l.starts_with("fig3f\t")));
}

#[test]
fn sweep_writes_one_row_per_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, "scenario = fig2_massless\nname = sw\nsweep_omegas = 2pi*50MHz, 2pi*200MHz\n").unwrap();
    let out = bin().arg("sweep-rwa").arg(&cfg).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().filter(|l| l.starts_with("Omega=")).count(), 2);
    assert!(dir.path().join("sw_rwa_sweep.csv").exists());
}
