//! End-to-end checks of the command-line interface: exit codes, output
//! files, and byte-level rerun determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mppfv"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn run_linear_writes_outputs() {
    let dir = scratch("run_linear");
    let cfg = dir.join("run.cfg");
    write(&cfg, "problem = linear_1d\nnx = 50\nt_end = 0.2\n");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&dir)
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let solution = std::fs::read_to_string(dir.join("solution.csv")).unwrap();
    assert!(solution.starts_with("x,u\n"));
    assert_eq!(solution.lines().count(), 51);
    let diag = std::fs::read_to_string(dir.join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,dt,min,max,min_theta,mass\n"));
    // limiter on: the min column never goes below -1e-12
    for line in diag.lines().skip(1) {
        let min: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(min >= -1e-12, "{line}");
    }
    // resolved config parses back
    let used = std::fs::read_to_string(dir.join("config_used.cfg")).unwrap();
    assert!(used.contains("problem = linear_1d"));
}

#[test]
fn unknown_problem_is_validation_error() {
    let dir = scratch("unknown_problem");
    let cfg = dir.join("run.cfg");
    write(&cfg, "problem = what_even\n");
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_t_end_rejected() {
    let dir = scratch("zero_t_end");
    let cfg = dir.join("run.cfg");
    write(&cfg, "problem = linear_1d\nt_end = 0\n");
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_mesh_list_rejected() {
    let dir = scratch("empty_meshes");
    let cfg = dir.join("run.cfg");
    write(&cfg, "problem = linear_1d\nmeshes =\n");
    let out = bin()
        .args(["convergence", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_table_id_rejected() {
    let out = bin().args(["table", "--id", "t99"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("determinism");
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        "problem = burgers_1d\nnx = 80\nt_end = 0.01\nlimiter = on\n",
    );
    let mut outputs = Vec::new();
    for pass in 0..2 {
        let sub = dir.join(format!("pass{pass}"));
        std::fs::create_dir_all(&sub).unwrap();
        let out = bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--output")
            .arg(&sub)
            .arg("--quiet")
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push((
            std::fs::read(sub.join("solution.csv")).unwrap(),
            std::fs::read(sub.join("diagnostics.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
}

#[test]
fn convergence_writes_table() {
    let dir = scratch("convergence");
    let cfg = dir.join("run.cfg");
    write(&cfg, "problem = linear_1d\nmeshes = 25,50\nt_end = 0.1\n");
    let out = bin()
        .args(["convergence", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("convergence.csv")).unwrap();
    assert!(csv.starts_with("block,mesh,l1_error,"));
    // NonMPP and MPP blocks, two meshes each
    assert_eq!(csv.lines().count(), 5);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("MPP"));
}

#[test]
fn table_command_emits_csv() {
    let dir = scratch("table_t10");
    let out = bin()
        .args(["table", "--id", "t10", "--output"])
        .arg(&dir)
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("t10.csv")).unwrap();
    // NonMPP and MPP blocks with four exponents each
    assert_eq!(csv.lines().count(), 9);
    for line in csv.lines().skip(1) {
        let umin: f64 = line.split(',').nth(7).unwrap().parse().unwrap();
        if line.starts_with("MPP") {
            assert!(umin >= -1e-12, "{line}");
        }
    }
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = scratch("threads");
    let cfg = dir.join("run.cfg");
    write(&cfg, "problem = linear_2d\nnx = 16\nt_end = 0.02\n");
    let mut bytes = Vec::new();
    for (pass, threads) in ["1", "4"].iter().enumerate() {
        let sub = dir.join(format!("pass{pass}"));
        std::fs::create_dir_all(&sub).unwrap();
        let out = bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--output")
            .arg(&sub)
            .args(["--threads", threads, "--quiet"])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        bytes.push(std::fs::read(sub.join("solution.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}
