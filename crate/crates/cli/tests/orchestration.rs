//! End-to-end persistence und orchestration checks.

use std::path::Path;

use muskat_cli::config::SimConfig;
use muskat_cli::manifest::RunManifest;
use muskat_cli::orchestrate::{boundary_sweep, check_run, compare_depths, deep_twin, run};
use muskat_cli::snapshot::{load_snapshot, render_snapshot};
use muskat_core::runner::SimState;
use muskat_core::spectral::PeriodicField;

fn confined_cfg(t_end: f64) -> SimConfig {
    let text = format!(
        r#"
backend = "spectral"
resolution = 256
t_end = {t_end}
sample_every = 2
checks = ["decay_hhalf", "energy_sigma"]

[model]
kind = "confined_model"
depth_l = 1.5707963267948966

[initial_data]
family = "cos_amplitude"
a = 0.3

[controller]
scheme = "rk45"
tol_rel = 1e-8
tol_abs = 1e-10
"#
    );
    SimConfig::from_str_with_overrides(&text, &[]).unwrap()
}

fn caso1_cfg(n: usize, dt: f64, t_end: f64) -> SimConfig {
    let text = format!(
        r#"
backend = "realline"
resolution = {n}
half_width = 10.0
t_end = {t_end}
sample_every = 25

[model]
kind = "confined_muskat"

[initial_data]
family = "caso1"
amplitude = 1.5706963267948966
exponent = 6

[controller]
scheme = "rk4"
dt = {dt}
"#
    );
    SimConfig::from_str_with_overrides(&text, &[]).unwrap()
}

#[test]
fn zero_horizon_run_has_one_row_and_one_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&confined_cfg(0.0), dir.path()).unwrap();
    assert_eq!(out.run.records.len(), 1);
    assert!(dir.path().join("snapshots/snapshot_000000.txt").exists());
    assert!(!dir.path().join("snapshots/snapshot_000001.txt").exists());
    assert_eq!(out.manifest.termination, "completed");
    out.manifest.verify(dir.path()).unwrap();
}

#[test]
fn identical_configs_give_identical_csv_bodies() {
    let cfg = confined_cfg(0.3);
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    run(&cfg, d1.path()).unwrap();
    run(&cfg, d2.path()).unwrap();
    let a = std::fs::read(d1.path().join("diagnostics.csv")).unwrap();
    let b = std::fs::read(d2.path().join("diagnostics.csv")).unwrap();
    assert_eq!(a, b);
    // manifests agree on every artifact digest even though wall times differ
    let ma = RunManifest::read(d1.path()).unwrap();
    let mb = RunManifest::read(d2.path()).unwrap();
    for (x, y) in ma.artifacts.iter().zip(&mb.artifacts) {
        assert_eq!(x.path, y.path);
        assert_eq!(x.sha256, y.sha256, "artifact {} differs", x.path);
    }
}

#[test]
fn tampered_artifact_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&confined_cfg(0.1), dir.path()).unwrap();
    std::fs::write(
        dir.path().join("diagnostics.csv"),
        "t,linf\n0,corrupted\n",
    )
    .unwrap();
    assert!(out.manifest.verify(dir.path()).is_err());
}

#[test]
fn monotone_amplitude_on_near_wall_cos_data() {
    // spectral n = 2^10, f0 = (pi/2 - 0.001) cos x, short horizon
    let mut cfg = confined_cfg(0.25);
    cfg.resolution = 1024;
    cfg.initial_data = muskat_cli::config::InitialData::CosAmplitude {
        a: std::f64::consts::FRAC_PI_2 - 0.001,
    };
    cfg.checks.clear();
    let dir = tempfile::tempdir().unwrap();
    let out = run(&cfg, dir.path()).unwrap();
    let linf: Vec<f64> = out.run.records.iter().map(|r| r.linf).collect();
    assert!(linf.windows(2).all(|w| w[1] <= w[0] + 1e-8), "{linf:?}");
    assert_eq!(out.manifest.termination, "completed");
}

#[test]
fn check_subcommand_reevaluates_stored_run() {
    let dir = tempfile::tempdir().unwrap();
    run(&confined_cfg(0.3), dir.path()).unwrap();
    let summaries = check_run(dir.path(), &["decay_hhalf".to_string()]).unwrap();
    assert_eq!(summaries.len(), 1);
    assert_eq!(summaries[0].satisfied, summaries[0].total);
    assert!(dir.path().join("checks/decay_hhalf.csv").exists());
}

#[test]
fn snapshot_backend_mismatch_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    // write a realline snapshot, then feed it to a spectral config
    let itf = muskat_core::realline::LineInterface::uniform(10.0, 256, |x| {
        0.1 * (-x * x).exp()
    })
    .unwrap();
    let path = dir.path().join("line_state.txt");
    std::fs::write(&path, render_snapshot(&SimState::Line(itf), 0.0, "f")).unwrap();

    let mut cfg = confined_cfg(0.1);
    cfg.initial_data = muskat_cli::config::InitialData::CustomSamples { path };
    match cfg.build() {
        Err(e) => {
            let msg = e.to_string();
            assert!(msg.contains("backend"), "unexpected message: {msg}");
        }
        Ok(_) => panic!("backend mismatch must be refused"),
    }
}

#[test]
fn custom_samples_roundtrip_through_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let f = PeriodicField::from_fn(256, "f", |x| 0.25 * x.cos()).unwrap();
    let path = dir.path().join("state.txt");
    std::fs::write(&path, render_snapshot(&SimState::Spectral(f.clone()), 0.0, "f")).unwrap();
    let mut cfg = confined_cfg(0.0);
    cfg.checks.clear();
    cfg.initial_data = muskat_cli::config::InitialData::CustomSamples { path };
    let out = run(&cfg, &dir.path().join("run")).unwrap();
    assert_eq!(out.run.states[0].values(), f.values());

    // the emitted initial snapshot loads back bit-exactly
    let snap = load_snapshot(&dir.path().join("run/snapshots/snapshot_000000.txt")).unwrap();
    assert_eq!(snap.state.values(), f.values());
}

#[test]
fn compare_depths_refuses_mismatched_grids() {
    let confined = caso1_cfg(80, 2e-3, 0.02);
    let mut deep = deep_twin(&confined).unwrap();
    deep.controller.dt = Some(1e-3);
    let dir = tempfile::tempdir().unwrap();
    assert!(compare_depths(&confined, &deep, dir.path()).is_err());
}

#[test]
fn compare_depths_on_flat_data_gives_zero_columns() {
    let mut confined = caso1_cfg(80, 2e-3, 0.02);
    confined.initial_data = muskat_cli::config::InitialData::Caso1 {
        amplitude: 0.0,
        exponent: 6,
    };
    let deep = deep_twin(&confined).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = compare_depths(&confined, &deep, dir.path()).unwrap();
    assert_eq!(out.ordering_violations, 0);
    for row in &out.rows {
        assert_eq!(row.linf_confined, 0.0);
        assert_eq!(row.linf_deep, 0.0);
    }
    // t = 0 row carries the shared initial amplitude in both columns
    assert_eq!(out.rows[0].linf_confined, out.rows[0].linf_deep);
}

#[test]
fn boundary_sweep_arms_tracker_and_records_termination() {
    let text = r#"
backend = "spectral"
resolution = 512
t_end = 0.01
sample_every = 1
boundary_touching = true

[model]
kind = "confined_model"
depth_l = 1.5707963267948966

[initial_data]
family = "boundary_family"
a = 0.1

[controller]
scheme = "rk45"
tol_rel = 1e-9
tol_abs = 1e-11
"#;
    let base = SimConfig::from_str_with_overrides(text, &[]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let entries = boundary_sweep(&base, &[0.1, 0.3], dir.path()).unwrap();
    assert_eq!(entries.len(), 2);
    for e in &entries {
        assert!(e.amplitude_hook_ok, "amplitude exceeded the wall for a = {}", e.a);
        assert!(e.output.run.records[0].touch_value.is_some());
        assert!(e.dir.join("checks/curvature_ode.csv").exists());
    }
    assert!(dir.path().join("sweep_manifest.toml").exists());
}

#[test]
fn cli_binary_runs_and_reports_errors() {
    let exe = env!("CARGO_BIN_EXE_muskat");
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg_path,
        r#"
backend = "spectral"
resolution = 128
t_end = 0.05
sample_every = 1

[model]
kind = "confined_model"
depth_l = 1.5707963267948966

[initial_data]
family = "cos_amplitude"
a = 0.3

[controller]
scheme = "rk45"
"#,
    )
    .unwrap();

    let out = std::process::Command::new(exe)
        .args([
            "run",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.path().join("run").to_str().unwrap(),
            "--override",
            "t_end=0.02",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // manifest reflects the override
    let manifest = RunManifest::read(&dir.path().join("run")).unwrap();
    assert_eq!(manifest.config.t_end, 0.02);

    // unknown key: nonzero exit and the offending field named
    std::fs::write(&cfg_path, "backend = \"spectral\"\nwhatever = 1\n").unwrap();
    let out = std::process::Command::new(exe)
        .args([
            "run",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.path().join("run2").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn halted_runs_exit_zero_through_the_binary() {
    let exe = env!("CARGO_BIN_EXE_muskat");
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.toml");
    // starts outside the admissible strip: expected halt, not a failure
    std::fs::write(
        &cfg_path,
        r#"
backend = "spectral"
resolution = 64
t_end = 0.1
sample_every = 1

[model]
kind = "confined_model"
depth_l = 1.5707963267948966

[initial_data]
family = "cos_amplitude"
a = 1.5707963267948966

[controller]
scheme = "rk45"
"#,
    )
    .unwrap();
    let out = std::process::Command::new(exe)
        .args([
            "run",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.path().join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = RunManifest::read(&dir.path().join("run")).unwrap();
    assert_eq!(manifest.termination, "halted-boundary");
}

#[test]
fn deep_twin_shares_everything_but_the_kind() {
    let confined = caso1_cfg(150, 2e-3, 0.5);
    let deep = deep_twin(&confined).unwrap();
    assert_eq!(deep.resolution, confined.resolution);
    assert_eq!(deep.initial_data, confined.initial_data);
    assert!(deep.model.depth_l.is_none());
}

#[allow(dead_code)]
fn assert_dir(p: &Path) {
    assert!(p.is_dir());
}
