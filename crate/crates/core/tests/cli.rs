//! End-to-end runs of the `fvk` binary: exit codes, outputs, config
//! precedence and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn fvk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fvk"))
        .args(args)
        .env("FVK_WORKERS", "1")
        .output()
        .expect("fvk runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn out_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn custom_run_writes_fields_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = fvk(&[
        "custom", "--mesh-h", "0.25", "--beta", "8", "--gamma", "1e-3", "--pressure", "-1",
        "--disclination", "0,0,-1", "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["summary.csv", "var_profiles.csv", "var_sigma_rr.csv", "var.vtk", "manifest.toml"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let vtk = std::fs::read_to_string(dir.path().join("var.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version"));
    for name in ["SCALARS w", "SCALARS v", "SCALARS gauss_bracket", "SCALARS sigma_rr"] {
        assert!(vtk.contains(name), "{name}");
    }
    let manifest = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    for key in ["[versions]", "[config]", "[mesh]", "[[runs]]", "residual_history"] {
        assert!(manifest.contains(key), "{key}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "mesh_h = 0.3\nbeta = 5.0\ngamma = 0.0\nwrite_vtk = false\n").unwrap();
    let out = dir.path().join("out");
    let o = fvk(&[
        "custom", "--config", cfg.to_str().unwrap(), "--beta", "7", "--disclination", "0.1,0,1",
        "--out", &out_arg(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("beta = 7.0"));
    assert!(manifest.contains("mesh_h = 0.3"));
    assert!(!out.join("var.vtk").exists());
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "mesh_h = 0.3\nunknown_key = 1\n").unwrap();
    let o = fvk(&["custom", "--config", cfg.to_str().unwrap(), "--beta", "5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown_key"));

    let o = fvk(&["sweep-beta", "--betas", "10,30,20", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 2);
    let o = fvk(&["custom", "--mesh-h", "0.3", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 2, "custom without beta");
    let o = fvk(&["custom", "--beta", "5", "--nu", "0.7"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn solver_failure_exits_with_3_and_keeps_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = fvk(&[
        "custom", "--mesh-h", "0.3", "--beta", "20", "--gamma", "1e-2", "--pressure", "-1",
        "--preset", "four-positive", "--max-iters", "1", "--no-vtk", "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 3);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("converged = false"));
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn verification_threshold_breach_exits_with_4() {
    // on a coarse mesh the discretisation error exceeds the 1% gate
    let dir = tempfile::tempdir().unwrap();
    let o = fvk(&[
        "verify-test1", "--mesh-h", "0.2", "--variant", "var", "--no-vtk", "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn identical_runs_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = fvk(&[
            "disclinations", "--mesh-h", "0.25", "--preset", "flower", "--no-vtk", "--out", &out_arg(d.path()),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["summary.csv", "flower_profiles.csv", "flower_sigma_rr.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn csv_numbers_carry_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let o = fvk(&["verify-test2", "--mesh-h", "0.25", "--variant", "var", "--no-vtk", "--out", &out_arg(dir.path())]);
    assert!(matches!(code(&o), 0 | 4));
    let text = std::fs::read_to_string(dir.path().join("profiles.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi,v_var,v_exact"));
    let cell = lines.nth(5).unwrap().split(',').nth(1).unwrap();
    let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{cell}");
}
