//! End-to-end checks of the `gevwave` binary: exit codes, file outputs,
//! and deterministic CSV emission.

use std::path::{Path, PathBuf};
use std::process::Command;

fn gevwave() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gevwave"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gevwave-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn constants_command_prints_c0() {
    let out = gevwave()
        .args(["constants", "--n", "1", "--p", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("5.02262"), "stdout: {stdout}");
    assert!(stdout.contains("C1"), "stdout: {stdout}");
}

#[test]
fn constants_divergent_p_exits_one() {
    let out = gevwave()
        .args(["constants", "--n", "1", "--p", "0.4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn linear_smoke_run_passes_and_writes_outputs() {
    let dir = temp_dir("smoke");
    let out = gevwave()
        .arg("run")
        .arg(repo_config("linear-smoke.toml"))
        .arg("--out")
        .arg(&dir)
        .arg("--plot-data")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for file in ["norms.csv", "tau.csv", "fits.csv", "final_snapshot.csv", "summary.txt", "run.log"] {
        assert!(dir.join(file).exists(), "missing {file}");
    }
    assert!(dir.join("plot/tau_measured.dat").exists());
    let summary = std::fs::read_to_string(dir.join("summary.txt")).unwrap();
    assert!(summary.starts_with("status: PASS"), "summary: {summary}");
    let log = std::fs::read_to_string(dir.join("run.log")).unwrap();
    assert!(log.lines().next().unwrap().starts_with("t=0 E="));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn malformed_config_exits_one() {
    let dir = temp_dir("badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "[lattice]\nnot_a_key = 3\n").unwrap();
    let out = gevwave().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn runs_are_byte_identical() {
    let dir1 = temp_dir("det1");
    let dir2 = temp_dir("det2");
    for dir in [&dir1, &dir2] {
        let out = gevwave()
            .arg("run")
            .arg(repo_config("linear-smoke.toml"))
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["norms.csv", "tau.csv", "fits.csv", "final_snapshot.csv"] {
        let a = std::fs::read(dir1.join(file)).unwrap();
        let b = std::fs::read(dir2.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    let _ = std::fs::remove_dir_all(&dir1);
    let _ = std::fs::remove_dir_all(&dir2);
}

#[test]
fn compare_quadratic_passes() {
    let dir = temp_dir("cmp");
    let out = gevwave()
        .arg("compare")
        .arg(repo_config("compare-quadratic.toml"))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("compare.csv")).unwrap();
    assert!(csv.starts_with("t,h1,h2,margin\n"));
    assert!(csv.lines().count() > 2);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn tampered_constants_exit_three() {
    let dir = temp_dir("tamper");
    std::fs::create_dir_all(&dir).unwrap();
    let base = std::fs::read_to_string(repo_config("compare-quadratic.toml")).unwrap();
    let tampered = format!("{base}\n[debug]\ntamper_c0 = 0.05\n");
    let cfg = dir.join("tampered.toml");
    std::fs::write(&cfg, tampered).unwrap();
    let out = gevwave()
        .arg("compare")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn scaling_sweep_writes_rows() {
    let dir = temp_dir("scaling");
    let out = gevwave()
        .arg("scaling")
        .arg(repo_config("scaling-sn.toml"))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("scaling.csv")).unwrap();
    assert!(csv.starts_with("nu,lambda_fit,rho_exact,rho_measured,rho_fixed_lambda,"));
    assert_eq!(csv.lines().count(), 8); // header + 7 sweep points
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn divergent_run_exits_two_and_flushes_partial_series() {
    let dir = temp_dir("blowup");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_text = r#"
bounds = []

[lattice]
dim = 1
split = 1
max_mode = 16

[equation]
form = "standard"

[nonlinearity]
form = "monomial"
sign = "minus"
k = 3

[initial]
preset = "cosine"
amplitude = 2000.0

[solver]
dt = 1e-3
t_final = 50.0
sample_stride = 10

[gevrey]
p = 1.0
tau0 = { policy = "fixed", value = 0.1 }

[output]
dir = "unused"
"#;
    let cfg = dir.join("blowup.toml");
    std::fs::write(&cfg, cfg_text).unwrap();
    let out = gevwave()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    // partial series flushed before aborting
    let norms = std::fs::read_to_string(dir.join("out/norms.csv")).unwrap();
    assert!(norms.lines().count() > 1);
    let summary = std::fs::read_to_string(dir.join("out/summary.txt")).unwrap();
    assert!(summary.starts_with("status: DIVERGED"), "summary: {summary}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn all_shipped_presets_parse() {
    let configs_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(configs_dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e == "toml").unwrap_or(false) {
            let text = std::fs::read_to_string(&path).unwrap();
            gevrey_waves::config::RunConfig::from_toml_str(&text)
                .unwrap_or_else(|e| panic!("{} failed to parse: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 6, "expected the preset set, found {count}");
}

#[test]
fn malformed_scaling_grid_exits_one() {
    let dir = temp_dir("badscale");
    std::fs::create_dir_all(&dir).unwrap();
    let base = std::fs::read_to_string(repo_config("scaling-sn.toml")).unwrap();
    let bad = base.replace(
        "nu_values = [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4]",
        "nu_values = [0.5, 2.0]",
    );
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, bad).unwrap();
    let out = gevwave().arg("scaling").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}
