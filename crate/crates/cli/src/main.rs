use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use log::{error, info, warn};
use sqent_cli::config::ExperimentConfig;
use sqent_cli::exit;
use sqent_cli::properties::{run_properties, PropertyOptions};
use sqent_cli::quench::{run_quench, summary_path, write_outputs};
use sqent_cli::{bounds, table1};

#[derive(Parser, Debug)]
#[command(name = "sqent", version, about = "Squashed-entanglement estimators and the quenched Ising experiment")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restrict to one named partition.
    #[arg(long, global = true)]
    partition: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Reproducible bytes: no wall-clock data in the artifacts.
    #[arg(long, global = true)]
    deterministic: bool,
    #[arg(long = "n-traj", global = true)]
    n_traj: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// GHZ / W conditional mutual information for n = 3..8.
    Table1,
    /// Run the quench and write one CSV per partition plus summary.json.
    Quench,
    /// Randomized invariant suites; exit code 2 on any failure.
    Properties {
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Upper bound on T_sq for a state file.
    Bounds { state: PathBuf },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.protocol.seed = seed;
    }
    if let Some(n) = cli.n_traj {
        cfg.protocol.n_traj = n;
    }
    if let Some(dt) = cli.dt {
        cfg.protocol.dt = dt;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.deterministic |= cli.deterministic;
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(cfg: &ExperimentConfig, name: &str, value: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let path = cfg.out_dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn run(cli: &Cli) -> Result<i32> {
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::Table1 => {
            let report = table1::run_table1()?;
            print!("{}", report.render());
            write_json(&cfg, "table1.json", &report)?;
            Ok(if report.passed { exit::PASS } else { exit::PROPERTY_FAILURE })
        }
        Command::Quench => {
            if let Some(name) = &cli.partition {
                cfg.selected = Some(vec![name.clone()]);
            }
            let run = run_quench(&cfg)?;
            let summary = write_outputs(&cfg, &run)?;
            for check in &summary.checks {
                let tag = match (check.passed, check.finding_only) {
                    (true, _) => "pass",
                    (false, true) => "finding",
                    (false, false) => "FAIL",
                };
                println!("[{tag}] {} ({}): {}", check.name, check.partition, check.detail);
            }
            for f in &summary.files {
                println!("{}  {}", f.sha256, cfg.out_dir.join(&f.file).display());
            }
            info!("summary written to {}", summary_path(&cfg.out_dir).display());
            Ok(exit::PASS)
        }
        Command::Properties { samples } => {
            let opts = PropertyOptions {
                seed: cfg.protocol.seed,
                n_samples: *samples,
                squash: cfg.squash_options(),
                dump_dir: Some(cfg.out_dir.join("counterexamples")),
            };
            let report = run_properties(&opts)?;
            for s in &report.suites {
                println!(
                    "[{}] {}: {} samples, worst violation {:.3e}",
                    if s.passed { "pass" } else { "FAIL" },
                    s.name,
                    s.samples,
                    s.worst_violation
                );
            }
            let path = write_json(&cfg, "properties.json", &report)?;
            info!("report written to {}", path.display());
            if !report.passed {
                warn!("property suite failed; counterexamples in {}", cfg.out_dir.join("counterexamples").display());
            }
            Ok(if report.passed { exit::PASS } else { exit::PROPERTY_FAILURE })
        }
        Command::Bounds { state } => {
            let report = bounds::run_bounds(state, cli.partition.as_deref(), &cfg)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(exit::PASS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(exit::RUNTIME_ERROR as u8)
        }
    }
}
