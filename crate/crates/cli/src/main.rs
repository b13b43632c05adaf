use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use muskat_cli::config::SimConfig;
use muskat_cli::orchestrate;

/// Numerical laboratory for nonlocal interface models of porous-media flow.
#[derive(Parser)]
#[command(name = "muskat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override a config key, e.g. --override t_end=2.0 or
    /// --override controller.tol_rel=1e-9 (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write snapshots, diagnostics, checks and the
    /// manifest.
    Run(ConfigArgs),
    /// Run the confined and deep-water Muskat equations on the same data
    /// and emit the aligned amplitude comparison.
    CompareDepths(ConfigArgs),
    /// Sweep the wall-touching family f0 = a cos x + l - a over amplitudes.
    BoundarySweep {
        #[command(flatten)]
        common: ConfigArgs,
        /// Comma-separated amplitudes.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
        a_values: Vec<f64>,
    },
    /// Re-evaluate bound checks on the stored CSVs of a finished run.
    Check {
        /// Directory of a finished run (must contain manifest.toml).
        #[arg(long)]
        run: PathBuf,
        /// Comma-separated check names; defaults to the run's own list.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
}

fn parse_overrides(raw: &[String]) -> anyhow::Result<Vec<(String, String)>> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .with_context(|| format!("override '{s}' is not KEY=VALUE"))
        })
        .collect()
}

fn load(args: &ConfigArgs) -> anyhow::Result<SimConfig> {
    let overrides = parse_overrides(&args.overrides)?;
    Ok(SimConfig::from_path(&args.config, &overrides)?)
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = load(&args)?;
            let out = orchestrate::run(&cfg, &args.out)?;
            println!(
                "run finished: {} after {} accepted steps (t = {:.6})",
                out.manifest.termination,
                out.manifest.accepted_steps,
                out.run.times.last().copied().unwrap_or(0.0)
            );
            if let Some(detail) = &out.manifest.termination_detail {
                println!("  {detail}");
            }
            println!("  artifacts in {}", out.dir.display());
        }
        Command::CompareDepths(args) => {
            let confined = load(&args)?;
            let deep = orchestrate::deep_twin(&confined)?;
            let out = orchestrate::compare_depths(&confined, &deep, &args.out)?;
            println!(
                "compare-depths: {} samples, {} ordering violations",
                out.rows.len(),
                out.ordering_violations
            );
            println!("  table: {}", out.csv_path.display());
        }
        Command::BoundarySweep { common, a_values } => {
            let base = load(&common)?;
            let entries = orchestrate::boundary_sweep(&base, &a_values, &common.out)?;
            for e in &entries {
                println!(
                    "a = {}: {} (max |f| = {:.12}, amplitude hook {})",
                    e.a,
                    e.termination.as_str(),
                    e.max_linf,
                    if e.amplitude_hook_ok { "ok" } else { "VIOLATED" }
                );
            }
        }
        Command::Check { run, checks } => {
            let summaries = orchestrate::check_run(&run, &checks)?;
            for s in &summaries {
                let status = if s.satisfied == s.total { "PASS" } else { "FAIL" };
                println!("{status} {}: {}/{} samples satisfied", s.name, s.satisfied, s.total);
            }
            if summaries.iter().any(|s| s.satisfied != s.total) {
                std::process::exit(3);
            }
        }
    }
    Ok(())
}
