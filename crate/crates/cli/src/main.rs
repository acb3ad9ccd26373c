use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spitzer_cli::config::{preset_names, GRID_EXPONENTS};
use spitzer_cli::error::{CliError, Result};
use spitzer_cli::{acceptance, run, RunConfig};

#[derive(Parser)]
#[command(name = "spitzer", version, about = "Fourier-z pricing of quantile and perpetual early-exercise options")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Price one contract and print a JSON record.
    Price(Input),
    /// Price over a range of grid sizes and write CSV.
    Sweep(Input),
    /// Monte Carlo estimate of the configured contract.
    Mc(Input),
    /// Run the acceptance suite; exits 3 if any criterion fails.
    Verify,
}

#[derive(Args)]
struct Input {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration.
    #[arg(long)]
    preset: Option<String>,
    /// log2 of the grid size; overrides the config.
    #[arg(long, value_parser = clap::value_parser!(u32))]
    grid: Option<u32>,
    /// Output file; overrides the config. Standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Input {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => {
                let names: Vec<_> = preset_names().collect();
                return Err(CliError::invalid("--config", format!("give a config file or one of --preset {}", names.join(", "))));
            }
        };
        if let Some(g) = self.grid {
            if !GRID_EXPONENTS.contains(&g) {
                return Err(CliError::invalid("--grid", format!("grid exponent {g} outside 7..=22")));
            }
            cfg.numerics.grid = Some(g);
            if let Some(s) = cfg.numerics.sweep.as_mut() {
                *s = [g, g];
            }
        }
        if self.out.is_some() {
            cfg.output.clone_from(&self.out);
        }
        Ok(cfg)
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    if let Some(p) = path {
        std::fs::write(p, text + "\n").map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
    }
    Ok(())
}

fn execute(verb: Verb) -> Result<ExitCode> {
    match verb {
        Verb::Price(input) => {
            let cfg = input.load()?;
            let record = cfg.resolve()?.run()?;
            write_json(&record, cfg.output.as_deref())?;
        }
        Verb::Sweep(input) => {
            let cfg = input.load()?;
            let rows = cfg.resolve()?.sweep_rows()?;
            run::write_sweep(&rows, sink(cfg.output.as_deref())?)?;
        }
        Verb::Mc(input) => {
            let cfg = input.load()?;
            let record = cfg.resolve()?.mc()?;
            write_json(&record, cfg.output.as_deref())?;
        }
        Verb::Verify => {
            let outcomes = acceptance::run_all(|o| println!("{o}"))?;
            if outcomes.iter().any(|o| !o.pass) {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.verb) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
