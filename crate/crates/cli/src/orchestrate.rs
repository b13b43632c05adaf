//! Run orchestration: execute simulations, persist artifacts, evaluate the
//! requested bound checks, and reproduce the comparison and sweep
//! experiments.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use muskat_core::diagnostics::{
    curvature_growth_factors, curvature_ode_check, decay_bound_hhalf, decay_bound_linf_line,
    decay_bound_linf_torus, energy_balance_sigma, entropy_balance_deep, referee_energy_balance,
    BoundCheck, DiagnosticsRecord,
};
use muskat_core::runner::{run_sampled, SampledRun, SimState, Termination, TOUCH_HALT_SLACK};
use muskat_core::spectral::PeriodicField;

use crate::config::{BackendKind, InitialData, ModelKindConfig, SchemeConfig, SimConfig};
use crate::csvio::{
    render_compare, write_bound_checks, write_diagnostics, CompareRow, CsvError,
};
use crate::manifest::{digest_file, Artifact, RunManifest, MANIFEST_FORMAT};
use crate::snapshot::{emit_snapshot, load_snapshot};

/// Default residual tolerance of the balance checks.
const BALANCE_RESIDUAL_TOL: f64 = 1e-4;
/// Relative agreement required between the two dissipation routes.
const ROUTE_REL_TOL: f64 = 1e-3;

pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub run: SampledRun,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

fn state_label(cfg: &SimConfig) -> &'static str {
    if cfg.model.kind == ModelKindConfig::DeepModelDerivative {
        "g"
    } else {
        "f"
    }
}

/// Execute one simulation and persist snapshots, diagnostics, bound checks
/// and the manifest into `out_dir`. Expected halts terminate the run but
/// not the process.
pub fn run(cfg: &SimConfig, out_dir: &Path) -> anyhow::Result<RunOutput> {
    let (setup, state0) = cfg.build()?;
    std::fs::create_dir_all(out_dir.join("snapshots"))?;
    if !cfg.checks.is_empty() {
        std::fs::create_dir_all(out_dir.join("checks"))?;
    }

    let started_at = now();
    let run = run_sampled(&setup, state0).context("simulation failed")?;
    let ended_at = now();

    let label = state_label(cfg);
    let mut artifacts: Vec<PathBuf> = Vec::new();
    for (i, (state, t)) in run.states.iter().zip(&run.times).enumerate() {
        let path = out_dir.join(format!("snapshots/snapshot_{i:06}.txt"));
        emit_snapshot(state, *t, label, &path)?;
        artifacts.push(path);
    }
    let diag_path = out_dir.join("diagnostics.csv");
    write_diagnostics(&run.records, &diag_path)?;
    artifacts.push(diag_path);

    for name in &cfg.checks {
        let checks = evaluate_check(name, cfg, &run)?;
        let path = out_dir.join(format!("checks/{name}.csv"));
        write_bound_checks(&checks, &path)?;
        artifacts.push(path);
    }
    if setup.track_touch {
        let path = out_dir.join("checks").join("curvature_ode.csv");
        std::fs::create_dir_all(out_dir.join("checks"))?;
        write_curvature_tracker(&run, setup.model.depth_l.unwrap(), &path)?;
        artifacts.push(path);
    }

    let manifest = RunManifest {
        format: MANIFEST_FORMAT.into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        started_at,
        ended_at,
        termination: run.termination.as_str().into(),
        termination_detail: run.termination.detail().map(|s| s.to_string()),
        accepted_steps: run.accepted_steps,
        config: cfg.clone(),
        artifacts: artifacts
            .iter()
            .map(|p| {
                Ok(Artifact {
                    path: p
                        .strip_prefix(out_dir)
                        .unwrap_or(p)
                        .to_string_lossy()
                        .into_owned(),
                    sha256: digest_file(p)?,
                })
            })
            .collect::<Result<Vec<_>, crate::manifest::ManifestError>>()?,
    };
    manifest.write(out_dir)?;
    Ok(RunOutput {
        dir: out_dir.to_path_buf(),
        manifest,
        run,
    })
}

/// Evaluate one named bound check on a finished run.
pub fn evaluate_check(
    name: &str,
    cfg: &SimConfig,
    run: &SampledRun,
) -> anyhow::Result<Vec<BoundCheck>> {
    evaluate_check_on_records(name, cfg, &run.records, || match &run.states[0] {
        SimState::Spectral(f) => Ok(f.clone()),
        SimState::Line(_) => bail!("check '{name}' needs a spectral initial state"),
    })
}

fn evaluate_check_on_records(
    name: &str,
    cfg: &SimConfig,
    records: &[DiagnosticsRecord],
    initial_field: impl FnOnce() -> anyhow::Result<PeriodicField>,
) -> anyhow::Result<Vec<BoundCheck>> {
    let depth = cfg.model_spec().depth_l;
    match name {
        "decay_linf_torus" => {
            let l = depth.context("decay_linf_torus needs a finite depth")?;
            let f0 = initial_field()?;
            let out = decay_bound_linf_torus(records, &f0, l)?;
            let mut all = out.primary;
            if let Some(proof) = out.proof_form {
                all.extend(proof);
            }
            Ok(all)
        }
        "decay_hhalf" => Ok(decay_bound_hhalf(records)?.checks),
        "energy_sigma" => Ok(energy_balance_sigma(records)?),
        "decay_linf_line" => {
            let l = depth.context("decay_linf_line needs a finite depth")?;
            Ok(decay_bound_linf_line(records, l, cfg.t_end)?)
        }
        "entropy_deep" => {
            let out = entropy_balance_deep(records, BALANCE_RESIDUAL_TOL, ROUTE_REL_TOL)?;
            let mut all = out.residual;
            all.extend(out.dissipation_sign);
            all.extend(out.route_agreement);
            Ok(all)
        }
        "referee_energy" => Ok(referee_energy_balance(records, BALANCE_RESIDUAL_TOL).0),
        other => bail!("unknown check '{other}'"),
    }
}

fn write_curvature_tracker(run: &SampledRun, l: f64, path: &Path) -> Result<(), CsvError> {
    use std::fmt::Write as _;
    let ode = match curvature_ode_check(&run.records, l) {
        Ok(o) => o,
        Err(_) => return Ok(()), // fewer than two samples
    };
    let (factors, fitted) = curvature_growth_factors(&run.records, l)
        .expect("tracker columns present when armed");
    let mut text = String::from("t,curvature_measured,curvature_ode,growth_factor,fitted_c\n");
    for i in 0..ode.times.len() {
        writeln!(
            text,
            "{},{},{},{},{}",
            ode.times[i], ode.measured[i], ode.modeled[i], factors[i], fitted
        )
        .unwrap();
    }
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// compare-depths
// ---------------------------------------------------------------------------

pub struct CompareOutput {
    pub rows: Vec<CompareRow>,
    /// Samples with t > 0 where the finite-depth amplitude fell below the
    /// deep-water one.
    pub ordering_violations: usize,
    pub csv_path: PathBuf,
    pub confined: RunOutput,
    pub deep: RunOutput,
}

/// Derive the deep-water twin of a confined Muskat configuration.
pub fn deep_twin(confined: &SimConfig) -> anyhow::Result<SimConfig> {
    if confined.model.kind != ModelKindConfig::ConfinedMuskat {
        bail!("compare-depths starts from a confined_muskat configuration");
    }
    let mut deep = confined.clone();
    deep.model.kind = ModelKindConfig::DeepMuskat;
    deep.model.depth_l = None;
    deep.checks.clear();
    Ok(deep)
}

/// Run the two Muskat equations on the same data and time grid and emit the
/// aligned amplitude table.
pub fn compare_depths(
    confined_cfg: &SimConfig,
    deep_cfg: &SimConfig,
    out_dir: &Path,
) -> anyhow::Result<CompareOutput> {
    // shared-grid preconditions
    if confined_cfg.model.kind != ModelKindConfig::ConfinedMuskat
        || deep_cfg.model.kind != ModelKindConfig::DeepMuskat
    {
        bail!("compare-depths needs one confined_muskat and one deep_muskat configuration");
    }
    if confined_cfg.backend != BackendKind::Realline || deep_cfg.backend != BackendKind::Realline {
        bail!("compare-depths runs on the realline backend");
    }
    if confined_cfg.controller.scheme != SchemeConfig::Rk4
        || deep_cfg.controller.scheme != SchemeConfig::Rk4
    {
        bail!("compare-depths needs the fixed-step rk4 scheme so the time grids align");
    }
    let same = confined_cfg.resolution == deep_cfg.resolution
        && confined_cfg.half_width == deep_cfg.half_width
        && confined_cfg.t_end == deep_cfg.t_end
        && confined_cfg.sample_every == deep_cfg.sample_every
        && confined_cfg.initial_data == deep_cfg.initial_data
        && confined_cfg.controller.dt == deep_cfg.controller.dt;
    if !same {
        bail!("compare-depths configurations must share data, grid and controller");
    }

    let confined = run(confined_cfg, &out_dir.join("confined"))?;
    let deep = run(deep_cfg, &out_dir.join("deep"))?;
    if confined.run.times.len() != deep.run.times.len() {
        bail!(
            "runs sampled different grids ({} vs {} samples)",
            confined.run.times.len(),
            deep.run.times.len()
        );
    }

    let mut rows = Vec::new();
    let mut violations = 0usize;
    for (rc, rd) in confined.run.records.iter().zip(&deep.run.records) {
        if (rc.t - rd.t).abs() > 1e-12 {
            bail!("sample grids diverged at t = {} vs {}", rc.t, rd.t);
        }
        if rc.t > 0.0 && rc.linf < rd.linf {
            violations += 1;
        }
        rows.push(CompareRow {
            t: rc.t,
            linf_confined: rc.linf,
            linf_deep: rd.linf,
        });
    }
    let csv_path = out_dir.join("compare_depths.csv");
    std::fs::write(&csv_path, render_compare(&rows))?;
    Ok(CompareOutput {
        rows,
        ordering_violations: violations,
        csv_path,
        confined,
        deep,
    })
}

// ---------------------------------------------------------------------------
// boundary-sweep
// ---------------------------------------------------------------------------

pub struct SweepEntry {
    pub a: f64,
    pub dir: PathBuf,
    pub termination: Termination,
    pub max_linf: f64,
    /// The sampled amplitude never exceeded the depth (up to the halt slack).
    pub amplitude_hook_ok: bool,
    pub output: RunOutput,
}

/// Run the wall-touching family f0 = a cos x + l - a for each amplitude a.
pub fn boundary_sweep(
    base: &SimConfig,
    a_values: &[f64],
    out_dir: &Path,
) -> anyhow::Result<Vec<SweepEntry>> {
    if base.model.kind != ModelKindConfig::ConfinedModel {
        bail!("boundary-sweep drives the confined model");
    }
    let l = base
        .model
        .depth_l
        .context("boundary-sweep needs model.depth_l")?;
    let mut entries = Vec::new();
    for &a in a_values {
        let mut cfg = base.clone();
        cfg.initial_data = InitialData::BoundaryFamily { a };
        cfg.boundary_touching = true;
        let dir = out_dir.join(format!("a_{a}"));
        let output = run(&cfg, &dir)?;
        let max_linf = output
            .run
            .records
            .iter()
            .map(|r| r.linf)
            .fold(0.0_f64, f64::max);
        entries.push(SweepEntry {
            a,
            dir,
            termination: output.run.termination.clone(),
            max_linf,
            amplitude_hook_ok: max_linf <= l + TOUCH_HALT_SLACK,
            output,
        });
    }

    // sweep-level manifest
    let mut text = String::from("format = \"muskat-sweep-manifest-v1\"\n\n");
    for e in &entries {
        use std::fmt::Write as _;
        writeln!(text, "[[runs]]").unwrap();
        writeln!(text, "a = {}", e.a).unwrap();
        writeln!(text, "dir = \"{}\"", e.dir.file_name().unwrap().to_string_lossy()).unwrap();
        writeln!(text, "termination = \"{}\"", e.termination.as_str()).unwrap();
        writeln!(text, "max_linf = {}", e.max_linf).unwrap();
        writeln!(text, "amplitude_hook_ok = {}", e.amplitude_hook_ok).unwrap();
        text.push('\n');
    }
    std::fs::write(out_dir.join("sweep_manifest.toml"), text)?;
    Ok(entries)
}

// ---------------------------------------------------------------------------
// check (re-evaluate bound checks on stored artifacts)
// ---------------------------------------------------------------------------

pub struct CheckSummary {
    pub name: String,
    pub total: usize,
    pub satisfied: usize,
}

/// Re-run bound checks against the stored diagnostics of a finished run.
pub fn check_run(run_dir: &Path, names: &[String]) -> anyhow::Result<Vec<CheckSummary>> {
    let manifest = RunManifest::read(run_dir)?;
    manifest.verify(run_dir).context("artifact integrity")?;
    let records = crate::csvio::read_diagnostics(&run_dir.join("diagnostics.csv"))?;
    let cfg = &manifest.config;
    let requested: Vec<String> = if names.is_empty() {
        cfg.checks.clone()
    } else {
        names.to_vec()
    };
    std::fs::create_dir_all(run_dir.join("checks"))?;
    let mut out = Vec::new();
    for name in &requested {
        let checks = evaluate_check_on_records(name, cfg, &records, || {
            let snap = load_snapshot(&run_dir.join("snapshots/snapshot_000000.txt"))?;
            match snap.state {
                SimState::Spectral(f) => Ok(f),
                SimState::Line(_) => bail!("check '{name}' needs a spectral initial state"),
            }
        })?;
        write_bound_checks(&checks, &run_dir.join(format!("checks/{name}.csv")))?;
        out.push(CheckSummary {
            name: name.clone(),
            total: checks.len(),
            satisfied: checks.iter().filter(|c| c.satisfied).count(),
        });
    }
    Ok(out)
}
