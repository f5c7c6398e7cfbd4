use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use homogenlab_cli::{cmd_audit, cmd_cell, cmd_converge, cmd_macro, cmd_micro, exit, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "homogenlab", version, about = "Perforated-domain heat/flow solver and homogenization diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "HOMOGENLAB_WORKERS")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the homogenized Brinkman/two-temperature system.
    Macro(Common),
    /// Solve the perforated problem for the first epsilon.
    Micro(Common),
    /// Run the epsilon sweep and write report.csv.
    Converge(Common),
    /// Cell-problem drag and corrector energies.
    Cell {
        #[command(flatten)]
        common: Common,
        /// Ball radius (overrides `cell.r`).
        #[arg(long)]
        r: Option<f64>,
        /// Comma-separated cell half-widths (overrides `cell.big_r`).
        #[arg(long = "big-r")]
        big_r: Option<String>,
        /// Grid cells per axis for a single R.
        #[arg(long = "grid-n")]
        grid_n: Option<usize>,
    },
    /// Randomized checks of the capacity and trace inequalities.
    Audit(Common),
    /// Print every config key with its default.
    Defaults,
}

fn load(common: &Common, extra: Vec<(String, String)>) -> Result<RunConfig, CliError> {
    let mut pairs = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::new(exit::VALIDATION, format!("cannot read {}: {e}", path.display())))?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    for (k, v) in extra {
        pairs.retain(|(key, _)| *key != k);
        pairs.push((k, v));
    }
    let mut cfg = RunConfig::from_pairs(pairs)?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    set_workers(common.workers)?;
    Ok(cfg)
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    // full parse first so that syntax errors carry their line number
    RunConfig::parse(text)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}

#[cfg(feature = "parallel")]
fn set_workers(workers: Option<usize>) -> Result<(), CliError> {
    if let Some(k) = workers {
        if k == 0 {
            return Err(CliError::new(exit::VALIDATION, "--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::new(exit::VALIDATION, e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_workers(workers: Option<usize>) -> Result<(), CliError> {
    if workers == Some(0) {
        return Err(CliError::new(exit::VALIDATION, "--workers must be at least 1"));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Macro(c) => cmd_macro(&load(&c, vec![])?),
        Command::Micro(c) => cmd_micro(&load(&c, vec![])?),
        Command::Converge(c) => cmd_converge(&load(&c, vec![])?),
        Command::Audit(c) => cmd_audit(&load(&c, vec![])?),
        Command::Cell {
            common,
            r,
            big_r,
            grid_n,
        } => {
            let mut extra = Vec::new();
            if let Some(r) = r {
                extra.push(("cell.r".to_string(), r.to_string()));
            }
            if let Some(b) = big_r {
                extra.push(("cell.big_r".to_string(), b));
            }
            cmd_cell(&load(&common, extra)?, grid_n)
        }
        Command::Defaults => {
            print!("{}", RunConfig::documented_defaults());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
