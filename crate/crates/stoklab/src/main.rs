use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stoklab::experiments::REGISTRY;
use stoklab::{run_experiment, ExperimentConfig, Format, RunError};

#[derive(Parser)]
#[command(
    name = "stoklab",
    version,
    about = "Stochastic-process simulation and verification lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and print its report.
    Run {
        experiment: String,
        #[arg(long, default_value_t = stoklab::runner::DEFAULT_SEED)]
        seed: u64,
        /// Override a parameter, as key=value. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
        overrides: Vec<(String, String)>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Worker threads. The report does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        /// Add wall time per row.
        #[arg(long)]
        timing: bool,
    },
    /// List experiments and their parameters.
    List,
}

fn parse_override(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected key=value, got `{s}`")),
    }
}

fn list() {
    for e in REGISTRY {
        println!("{:<18} {}", e.name, e.description);
        for p in e.params {
            println!("    {:<12} {:<8} {}", p.key, p.default, p.help);
        }
    }
}

fn run(command: Command) -> Result<i32, RunError> {
    match command {
        Command::List => {
            list();
            Ok(0)
        }
        Command::Run {
            experiment,
            seed,
            overrides,
            out,
            format,
            threads,
            timing,
        } => {
            let config = ExperimentConfig {
                name: experiment,
                seed,
                overrides,
                threads,
                timing,
            };
            let report = run_experiment(&config)?;
            let text = report.render(format);
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            if let Some(msg) = &report.failure {
                eprintln!("stoklab: {} stopped early: {msg}", report.experiment);
            }
            Ok(report.status())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let status = run(cli.command).unwrap_or_else(|e| {
        eprintln!("stoklab: {e}");
        e.exit_status()
    });
    ExitCode::from(status as u8)
}
