mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::Output;
use config::{FieldError, RunConfig};

/// Exploratory mean-variance portfolio learning: closed forms, training and studies.
#[derive(Parser, Debug)]
#[command(name = "dtmv", version)]
struct Cli {
    /// TOML run configuration; omitted sections use the study defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (defaults to `runs/<command>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the study commands.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the closed-form policy and value against the numerical oracle.
    Analytic,
    /// Tabulate chained policy improvement from the configured seed family.
    Iterate,
    /// Train one learner on one seed.
    Train {
        /// Resume from a checkpoint written by an earlier `train`.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Simulation study across the configured volatilities.
    Simulate,
    /// Rolling-window backtest on monthly closes.
    Backtest,
    /// Both learners side by side on one market.
    Compare,
    /// Histogram of model draws or data returns.
    Histogram,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Iterate => "iterate",
            Command::Train { .. } => "train",
            Command::Simulate => "simulate",
            Command::Backtest => "backtest",
            Command::Compare => "compare",
            Command::Histogram => "histogram",
        }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    command: &'a str,
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seeds = vec![seed];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, out: &Output) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    let cfg = load_config(cli)?;
    out.text("config.effective", &cfg.to_toml())?;
    match &cli.command {
        Command::Analytic => commands::analytic(&cfg, out),
        Command::Iterate => commands::iterate_cmd(&cfg, out),
        Command::Train { resume } => commands::train(&cfg, out, resume.as_deref()),
        Command::Simulate => commands::simulate(&cfg, out),
        Command::Backtest => commands::backtest(&cfg, out),
        Command::Compare => commands::compare(&cfg, out),
        Command::Histogram => commands::histogram_cmd(&cfg, out),
    }
}

fn classify(err: &anyhow::Error) -> (&'static str, Option<&str>) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<exploratory_mv::Error>() {
            return (e.kind(), None);
        }
        if let Some(f) = cause.downcast_ref::<FieldError>() {
            return ("config", Some(f.field.as_str()));
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() {
            return ("config", None);
        }
    }
    ("io", None)
}

fn report_error(dir: &Path, command: &str, err: &anyhow::Error) {
    let (kind, field) = classify(err);
    let report = ErrorReport {
        command,
        kind,
        message: format!("{err:#}"),
        field,
    };
    let body = serde_json::to_string_pretty(&report).expect("error report serializes");
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(dir.join("error.json"), body + "\n");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| Path::new("runs").join(name));
    let result = Output::create(&dir).and_then(|out| execute(&cli, &out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("dtmv {name}: {err:#}");
            report_error(&dir, name, &err);
            ExitCode::FAILURE
        }
    }
}
