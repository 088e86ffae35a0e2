use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use levy_bdg::config::ExperimentConfig;
use levy_bdg::report::Format;
use levy_bdg::runner::{run, RunOptions};

/// Run a batch of moment-inequality experiments and write a report.
#[derive(Debug, Parser)]
#[command(name = "levy-bdg", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, env = "LEVY_BDG_THREADS", default_value_t = 0)]
    threads: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutFormat::Both)]
    format: OutFormat,
    /// Record per-experiment wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Both,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> anyhow::Result<u8> {
    let cli = Cli::parse();
    let cfg = ExperimentConfig::from_path(&cli.config)?;
    let opts = RunOptions { seed: cli.seed, threads: cli.threads, timing: cli.timing };
    let report = run(&cfg, &opts)?;
    let format = match cli.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
        OutFormat::Both => Format::Both,
    };
    report.write(&cli.out, format).with_context(|| format!("writing report to {}", cli.out.display()))?;
    for r in &report.results {
        println!("{:<40} {}", r.id, r.verdict.as_str());
    }
    Ok(report.exit_code() as u8)
}
