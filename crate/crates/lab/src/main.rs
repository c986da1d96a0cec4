use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mnac_core::channel::generate_codebooks;
use mnac_lab::codebook_io::write_codebooks;
use mnac_lab::commands::run_experiment;
use mnac_lab::{ExperimentConfig, Format, Kind, LabError, Params, Result};

/// Capacity, exponent and Monte Carlo tools for the Gaussian many-access channel.
#[derive(Parser)]
#[command(name = "mnac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; built-in parameters are used without it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format (CSV unless the configuration says otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Monte Carlo trial count; overrides the configuration.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Worker threads for Monte Carlo trials (defaults to the available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetric message-length capacity.
    Capacity,
    /// Minimum user-identification cost.
    IdentCost,
    /// Kernel, identification bound or random-coding exponent.
    Exponent,
    /// Monte Carlo simulation of the two-stage receiver.
    Simulate,
    /// Lower bound on the successive-decoding error.
    Succdec,
    /// Figure data tables.
    Figure {
        #[arg(value_enum)]
        which: Figure,
    },
    /// Binary dump of the codebooks of a simulation configuration.
    Codebook,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "4")]
    Four,
}

impl Command {
    fn kind(&self) -> Kind {
        match self {
            Command::Capacity => Kind::Capacity,
            Command::IdentCost => Kind::IdentCost,
            Command::Exponent => Kind::Exponent,
            Command::Simulate | Command::Codebook => Kind::Simulate,
            Command::Succdec => Kind::SuccDecode,
            Command::Figure { which: Figure::One } => Kind::Figure1,
            Command::Figure { which: Figure::Two } => Kind::Figure2,
            Command::Figure { which: Figure::Four } => Kind::Figure4,
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::parse_file(path)?,
        None => ExperimentConfig::example(kind),
    };
    if cfg.kind != kind {
        return Err(LabError::config(
            "kind",
            format!("configuration is for `{}`, command expects `{}`", cfg.kind.as_str(), kind.as_str()),
        ));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Command::Codebook = cli.command {
        let Params::Simulate(params) = &cfg.params else { unreachable!("codebook uses simulate parameters") };
        let path = cfg
            .output
            .path
            .clone()
            .ok_or_else(|| LabError::config("output.path", "the codebook dump needs --out"))?;
        let books = generate_codebooks(&params.sim_config(cfg.seed))?;
        let file = File::create(&path).map_err(|e| LabError::io(&path, e))?;
        return write_codebooks(BufWriter::new(file), cfg.seed, &books).map_err(|e| LabError::io(&path, e));
    }
    let table = run_experiment(&cfg, workers)?;
    table.emit(cfg.output.format, cfg.output.path.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
