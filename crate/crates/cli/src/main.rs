//! `aclab`: batch runs of the Allen-Cahn laboratory from JSON configs.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::{usage, Output, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "aclab", version, about = "Equivariant Allen-Cahn solvers, diagnostics and partition tools")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// RNG seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// 1D heteroclinic connection between two wells.
    Connect1d,
    /// Equivariant minimisation on a box.
    Solve {
        /// Continue from a field CSV written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Identity diagnostics of a field CSV.
    Diagnose {
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Weighted Steiner points for a batch of triangles.
    Steiner {
        /// CSV with columns id,ax,ay,bx,by,cx,cy,e12,e13,e23.
        #[arg(long)]
        batch: Option<PathBuf>,
    },
    /// Energy, density and blow-down series of a polygonal partition.
    Partition,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Connect1d => "connect1d",
            Command::Solve { .. } => "solve",
            Command::Diagnose { .. } => "diagnose",
            Command::Steiner { .. } => "steiner",
            Command::Partition => "partition",
        }
    }
}

fn run(cli: Cli) -> Result<(), output::Failure> {
    let loaded = config::load(cli.config.as_deref())?;
    let name = cli.command.name();
    if let Some(c) = &loaded.config.command {
        if c != name {
            return Err(usage(format!("config is for '{c}' but the subcommand is '{name}'")));
        }
    }
    let seed = cli.seed.or(loaded.config.seed).unwrap_or(0);
    let out = Output::new(&cli.out, name, &loaded.hash, seed)?;
    match cli.command {
        Command::Connect1d => commands::connect1d(&loaded, &out),
        Command::Solve { resume } => commands::solve(&loaded, &out, seed, resume.as_deref()),
        Command::Diagnose { field } => commands::diagnose(&loaded, &out, field.as_deref()),
        Command::Steiner { batch } => commands::steiner(&loaded, &out, batch.as_deref()),
        Command::Partition => commands::partition(&loaded, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
