// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use polaron_lab::config::{Config, ScenarioKind};
use polaron_lab::error::LabError;
use polaron_lab::run::{run, write_artifacts, RunReport};

#[derive(Parser)]
#[command(name = "polaron-lab", version, about = "Landau-Pekar and dressed-flow numerical lab")]
struct Cli {
    /// Repeat for more detail on stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run(RunArgs),
    /// Run several configurations (or seeds) concurrently.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory for trajectory.csv, summary.json and verdict.json.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML configuration files.
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    #[arg(short, long, default_value = "sweep")]
    out: PathBuf,
    /// Replicate every config over seeds `0..seeds`.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
}

fn usage_error(e: &LabError) -> bool {
    matches!(
        e,
        LabError::Config(_)
            | LabError::Io(_)
            | LabError::InvalidGrid(_)
            | LabError::InvalidCutoff(_)
            | LabError::InvalidConfig(_)
            | LabError::InvalidModel(_)
            | LabError::DimensionOverflow { .. }
    )
}

fn load(path: &Path, seed: Option<u64>, scenario: Option<ScenarioKind>) -> Result<Config, LabError> {
    let mut cfg = Config::load(path).map_err(|e| match e {
        LabError::Io(io) => LabError::Config(format!("{}: {io}", path.display())),
        other => other,
    })?;
    if let Some(s) = seed {
        cfg.scenario.seed = s;
    }
    if let Some(k) = scenario {
        cfg.scenario.kind = k;
    }
    Ok(cfg)
}

fn report(label: &str, r: &RunReport, verbose: u8) {
    let status = if r.passed() { "PASS" } else { "FAIL" };
    println!("{status} {label} ({:?}, seed {})", r.scenario, r.seed);
    if let Some(a) = &r.aborted {
        println!("  aborted at step {} (t = {}): {}", a.step, a.time, a.reason);
    }
    if verbose > 0 {
        for v in &r.verdicts {
            println!("  {} {} = {:e} ({})", if v.pass { "ok  " } else { "fail" }, v.check, v.value, v.limit);
        }
    }
}

fn run_one(cfg: &Config, out: &Path) -> Result<RunReport, LabError> {
    let r = run(cfg)?;
    write_artifacts(out, &r)?;
    Ok(r)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => load(&a.config, a.seed, a.scenario).and_then(|cfg| {
            if cli.verbose > 1 {
                eprintln!("{cfg:#?}");
            }
            let r = run_one(&cfg, &a.out)?;
            report(&a.config.display().to_string(), &r, cli.verbose);
            Ok(r.passed())
        }),
        Command::Sweep(a) => {
            let mut jobs = Vec::new();
            let mut err = None;
            for path in &a.configs {
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let seeds: Vec<Option<u64>> = match a.seeds {
                    Some(n) => (0..n).map(Some).collect(),
                    None => vec![None],
                };
                for seed in seeds {
                    match load(path, seed, a.scenario) {
                        Ok(cfg) => {
                            let label = match seed {
                                Some(s) => format!("{stem}-seed{s}"),
                                None => stem.clone(),
                            };
                            jobs.push((label, cfg));
                        }
                        Err(e) => err = err.or(Some(e)),
                    }
                }
            }
            match err {
                Some(e) => Err(e),
                None => {
                    let results: Vec<_> = jobs
                        .par_iter()
                        .map(|(label, cfg)| (label, run_one(cfg, &a.out.join(label))))
                        .collect();
                    let mut all = Ok(true);
                    for (label, r) in results {
                        match r {
                            Ok(r) => {
                                report(label, &r, cli.verbose);
                                if let Ok(ok) = &mut all {
                                    *ok &= r.passed();
                                }
                            }
                            Err(e) => {
                                println!("FAIL {label}: {e}");
                                if all.is_ok() {
                                    all = Err(e);
                                }
                            }
                        }
                    }
                    all
                }
            }
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}
