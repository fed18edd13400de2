//! Command-line runner for reachability, synthesis and benchmark experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ivreach::config::{ExperimentConfig, OutputFormat, SynthesisConfig};
use ivreach::experiment::{
    benchmark_csv, run_benchmark, run_reach, run_synthesis, write_benchmark, write_reach,
    write_synthesis, ReachOutcome,
};
use ivreach::partition::default_workers;

#[derive(Parser)]
#[command(name = "ivreach", version, about = "Interval reachability and robust synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: config value, else all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for every random draw (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Partitioned embedding rollouts plus a Monte Carlo containment check.
    Reach(Common),
    /// Robust pendulum swing-up synthesis with a certificate.
    Synth(Common),
    /// Runtime table over partition counts, integrators and worker counts.
    Bench {
        #[command(flatten)]
        common: Common,
        /// One timed repetition and no warm-up.
        #[arg(long)]
        smoke: bool,
    },
    /// Monte Carlo containment check only; writes just the summary.
    McCheck(Common),
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: ivreach::Error| e.to_string())
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn experiment(common: &Common) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let path = common.config.as_deref().ok_or("--config is required for this command")?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(f) = common.format {
        cfg.format = f;
    }
    Ok(cfg)
}

fn workers(common: &Common, configured: Option<usize>) -> usize {
    common.workers.or(configured).unwrap_or_else(default_workers).max(1)
}

fn report(outcome: &ReachOutcome) -> ExitCode {
    let s = &outcome.summary;
    let c = &s.containment;
    println!(
        "cells={} failed={} rollout={:.3}s samples={} violating={} max_excess={:.3e} monte_carlo={:.3}s",
        s.cells,
        s.failed_cells.len(),
        s.rollout_seconds,
        c.samples,
        c.violating_samples,
        c.max_excess,
        s.monte_carlo_seconds
    );
    for f in &s.failed_cells {
        eprintln!("cell {}: {}", f.cell, f.error);
    }
    if let Some(h) = &s.final_hull {
        println!("final lower {:?}", h.lower);
        println!("final upper {:?}", h.upper);
    }
    if s.passed() {
        ExitCode::SUCCESS
    } else {
        eprintln!("containment check failed");
        ExitCode::from(2)
    }
}

fn reach(common: &Common) -> CliResult {
    let cfg = experiment(common)?;
    let outcome = run_reach(&cfg, workers(common, cfg.workers), true)?;
    let files = write_reach(&common.out, cfg.format, &cfg, &outcome)?;
    println!("wrote {} files to {}", files.len(), common.out.display());
    Ok(report(&outcome))
}

fn mc_check(common: &Common) -> CliResult {
    let cfg = experiment(common)?;
    let outcome = run_reach(&cfg, workers(common, cfg.workers), true)?;
    write_summary(&common.out, &outcome)?;
    Ok(report(&outcome))
}

fn write_summary(dir: &Path, outcome: &ReachOutcome) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&outcome.summary)?)?;
    Ok(())
}

fn synth(common: &Common) -> CliResult {
    let mut cfg = match &common.config {
        Some(p) => SynthesisConfig::load(p)?,
        None => SynthesisConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let run = run_synthesis(&cfg, workers(common, cfg.workers))?;
    let r = &run.report;
    let c = &r.certificate;
    println!(
        "objective={:.6} margin={:.3e} gradient_evaluations={} solve={:.1}s",
        r.outcome.objective, r.outcome.margin, r.outcome.iterations, r.solve_seconds
    );
    println!("K = {:?}", r.gain);
    println!(
        "embedding: margin={:.3e} ok={}  monte carlo: {} samples, margin={:.3e}, violations={} ok={}",
        c.embedding_margin, c.embedding_ok, c.samples, c.mc_margin, c.mc_violations, c.mc_ok
    );
    let files = write_synthesis(&common.out, common.format.unwrap_or(OutputFormat::Csv), &run)?;
    println!("wrote {} files to {}", files.len(), common.out.display());
    Ok(if c.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn bench(common: &Common, smoke: bool) -> CliResult {
    let cfg = experiment(common)?;
    let mut spec = cfg.benchmark.clone().unwrap_or_default();
    if smoke {
        spec.repetitions = 1;
        spec.warmup = 0;
    }
    let rows = run_benchmark(&cfg, &spec, workers(common, cfg.workers))?;
    print!("{}", benchmark_csv(&rows));
    let path = write_benchmark(&common.out, cfg.format, &rows)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Reach(c) => reach(c),
        Command::Synth(c) => synth(c),
        Command::Bench { common, smoke } => bench(common, *smoke),
        Command::McCheck(c) => mc_check(c),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
