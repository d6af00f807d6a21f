use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use medium_core::analysis::write_check_csv;
use medium_core::experiments::{
    run_check_campaign, run_experiment, write_rows, ExperimentConfig, ExperimentError,
};

#[derive(Parser)]
#[command(
    name = "medium",
    version,
    about = "Simulate and analyse depth-weighted block-tree chain selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run per protocol and repetition, throughput metrics.
    Simulate(Common),
    /// Honest fraction against corrupted parties under secret-chain withholding.
    Throughput(Common),
    /// Fork duration of the balance attack against the mining ratio.
    Balance(Common),
    /// Derived parameters of a configuration.
    Params(Common),
    /// Property-check campaign; writes one record per check and trace.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    reps: Option<u32>,
    #[arg(long)]
    rounds: Option<u64>,
}

fn load(kind: &str, c: &Common) -> Result<ExperimentConfig, ExperimentError> {
    let text = match &c.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut cfg = ExperimentConfig::parse(&text, kind)?;
    if cfg.kind.name() != kind {
        return Err(ExperimentError::Config(format!(
            "config describes a `{}` experiment, not `{kind}`",
            cfg.kind.name()
        )));
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.reps {
        cfg.repetitions = r;
    }
    if let Some(r) = c.rounds {
        cfg.rounds = r;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>, ExperimentError> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    let (kind, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Throughput(c) => ("throughput", c),
        Command::Balance(c) => ("balance", c),
        Command::Params(c) => ("params", c),
        Command::Check(c) => ("check", c),
    };
    let cfg = load(kind, common)?;
    if kind == "check" {
        let records = run_check_campaign(&cfg)?;
        let failed = records.iter().filter(|r| !r.pass).count();
        write_check_csv(output(&cfg)?, &records)?;
        log::info!("{failed} of {} checks failed", records.len());
    } else {
        let rows = run_experiment(&cfg)?;
        write_rows(output(&cfg)?, &rows)?;
        log::info!("{} rows", rows.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
