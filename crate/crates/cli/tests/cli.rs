//! End-to-end tests of the `gpsav` binary: subcommands, exit codes, and
//! artifact determinism through the CLI surface.

use std::path::Path;
use std::process::{Command, Output};

fn gpsav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpsav"))
        .args(args)
        .env("GPSAV_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let text = "\
grid.sizes = 16,16
grid.lower = -8,-8
grid.upper = 8,8
time.tau = 0.01
time.t_final = 0.1
scheme.stages = 2
model.beta = 5
model.omega = 0.5
initial.kind = gaussian
output.snapshot_times = 0.05
";
    let path = dir.join("exp.cfg");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn help_documents_subcommands_and_exit_codes() {
    let out = gpsav(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["run", "converge", "inspect"] {
        assert!(text.contains(needle), "missing `{needle}` in help");
    }
    let long = gpsav(&["help"]);
    let text = String::from_utf8_lossy(&long.stdout);
    assert!(text.contains("EXIT CODES"), "{text}");
    assert!(text.contains("GPSAV_THREADS"));
}

#[test]
fn run_and_inspect_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = gpsav(&["run", "--config", &cfg, "--output", out_dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for artifact in ["manifest.txt", "diagnostics.csv", "final.gpfld", "snap_step00000005.gpfld"] {
        assert!(out_dir.join(artifact).exists(), "missing {artifact}");
    }

    let inspect = gpsav(&["inspect", out_dir.join("final.gpfld").to_str().unwrap()]);
    assert!(inspect.status.success());
    let text = String::from_utf8_lossy(&inspect.stdout);
    assert!(text.contains("dim     = 2"));
    assert!(text.contains("16 x 16"));
    assert!(text.contains("time    = 0.1"));
}

#[test]
fn rerun_reproduces_diagnostics_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out_str = out_dir.to_str().unwrap().to_string();
    assert!(gpsav(&["run", "--config", &cfg, "--output", &out_str]).status.success());
    let first = std::fs::read(out_dir.join("diagnostics.csv")).unwrap();
    let first_final = std::fs::read(out_dir.join("final.gpfld")).unwrap();
    assert!(gpsav(&["run", "--config", &cfg, "--output", &out_str]).status.success());
    assert_eq!(first, std::fs::read(out_dir.join("diagnostics.csv")).unwrap());
    assert_eq!(first_final, std::fs::read(out_dir.join("final.gpfld")).unwrap());
}

#[test]
fn preset_with_overrides_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("preset-out");
    let out = gpsav(&[
        "run",
        "--preset",
        "gaussian-2d",
        "--output",
        out_dir.to_str().unwrap(),
        "--override",
        "grid.sizes=16,16",
        "--override",
        "time.t_final=0.05",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("final.gpfld").exists());
    let manifest = std::fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("grid.sizes = 16,16"));
}

#[test]
fn converge_emits_rate_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = "\
grid.sizes = 12,12
grid.lower = -6,-6
grid.upper = 6,6
time.tau = 0.01
time.t_final = 0.2
scheme.stages = 2
model.beta = 5
model.omega = 0.5
initial.kind = gaussian
converge.taus = 0.02,0.01,0.005
";
    let cfg = dir.path().join("conv.cfg");
    std::fs::write(&cfg, cfg_text).unwrap();
    let out_dir = dir.path().join("conv-out");
    let out = gpsav(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("rate"), "{text}");
    let rates = std::fs::read_to_string(out_dir.join("rates.csv")).unwrap();
    assert!(rates.lines().count() >= 4, "{rates}");
}

#[test]
fn exit_codes_distinguish_failures() {
    // unknown key -> config error (2)
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "grid.size = 8\n").unwrap();
    let out = gpsav(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // missing config file -> i/o error (3)
    let out = gpsav(&["run", "--config", "/nonexistent/nowhere.cfg"]);
    assert_eq!(out.status.code(), Some(3));

    // divergent run -> 4
    let cfg = small_config(dir.path());
    let out = gpsav(&[
        "run",
        "--config",
        &cfg,
        "--output",
        dir.path().join("diverge").to_str().unwrap(),
        "--override",
        "time.tau=10",
        "--override",
        "time.t_final=20",
        "--override",
        "model.beta=500",
        "--override",
        "solver.max_iter=30",
    ]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // malformed snapshot -> 5
    let junk = dir.path().join("junk.gpfld");
    std::fs::write(&junk, b"garbage").unwrap();
    let out = gpsav(&["inspect", junk.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));

    // unknown preset -> 2
    let out = gpsav(&["run", "--preset", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}
