use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spinstar::runner::{run_experiment, run_preset};
use spinstar::{Error, Method, RunConfig};

#[derive(Parser)]
#[command(name = "spinstar", version, about = "Two-qubit dynamics in a bosonized spin-star bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment described by a key=value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["laguerre", "exact"])]
        method: Option<String>,
    },
    /// Run every curve of a figure preset (fig1 .. fig8).
    Preset {
        name: String,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
        #[arg(long, value_parser = ["laguerre", "exact"], default_value = "laguerre")]
        method: String,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out, method } => {
            let mut cfg = RunConfig::from_file(&config).map_err(|e| match e {
                Error::Io(io) => Error::Config { line: 0, message: format!("{}: {io}", config.display()) },
                other => other,
            })?;
            if let Some(out) = out {
                cfg.output_path = out;
            }
            if let Some(m) = method.as_deref().and_then(Method::parse) {
                cfg.method = m;
            }
            let outcome = run_experiment(&cfg)?;
            eprintln!(
                "wrote {} ({} rows, m_C = {}, tail = {:.3e})",
                outcome.csv_path.display(),
                outcome.records.len(),
                outcome.evolution.ensemble.m_cutoff,
                outcome.evolution.ensemble.tail_mass
            );
        }
        Command::Preset { name, outdir, method } => {
            let method = Method::parse(&method).unwrap_or(Method::Laguerre);
            for outcome in run_preset(&name, &outdir, method)? {
                eprintln!("wrote {}", outcome.csv_path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
