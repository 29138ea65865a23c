//! `telemax` command-line front end.

mod args;
mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use telemax::TelemaxError;
use thiserror::Error;

use args::{Cli, Command, Output};
use output::{Format, Table};

const EXIT_DOMAIN: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Law(#[from] TelemaxError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => EXIT_USAGE,
            AppError::Io(_) => EXIT_IO,
            AppError::Law(e) => match e {
                TelemaxError::NonConvergence { .. } | TelemaxError::Quadrature { .. } => EXIT_CONVERGENCE,
                TelemaxError::Domain(_) | TelemaxError::Capacity(_) | TelemaxError::EmptyInput(_) => EXIT_DOMAIN,
            },
        }
    }
}

fn configure_threads() -> Result<(), AppError> {
    let Ok(v) = std::env::var("TELEMAX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| AppError::Usage(format!("TELEMAX_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| AppError::Usage(format!("cannot size the worker pool: {e}")))
}

fn sink(out: &Output) -> Result<Box<dyn Write>, AppError> {
    Ok(match &out.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(table: &Table, out: &Output) -> Result<(), AppError> {
    let mut w = sink(out)?;
    table.write(out.format, &mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool, AppError> {
    configure_threads()?;
    let (outcome, out) = match &cli.command {
        Command::MaxCdf(a) => (commands::max_law(a, false)?, &a.output),
        Command::MaxPdf(a) => (commands::max_law(a, true)?, &a.output),
        Command::PointMass(a) => (commands::point_mass(a)?, &a.output),
        Command::PositionPdf(a) => (commands::position(a)?, &a.output),
        Command::NonhomPdf(a) => (commands::nonhom(a)?, &a.output),
        Command::EpdCheck(a) => (commands::epd(a)?, &a.output),
        Command::Sample(a) => (commands::sample(a)?, &a.output),
        Command::Validate(a) => (commands::validate(a)?, &a.output),
        Command::ATriangle(a) => {
            let row = commands::triangle(a)?;
            let mut w = sink(&a.output)?;
            match a.output.format {
                Format::Csv => {
                    let cells: Vec<String> = row.iter().map(u128::to_string).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
                Format::Json => {
                    let row: Vec<serde_json::Value> = row
                        .iter()
                        .map(|&v| u64::try_from(v).map_or_else(|_| v.to_string().into(), Into::into))
                        .collect();
                    serde_json::to_writer(&mut w, &serde_json::json!({ "k": a.k, "row": row }))
                        .map_err(io::Error::from)?;
                    writeln!(w)?;
                }
            }
            w.flush()?;
            return Ok(true);
        }
    };
    emit(&outcome.table, out)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("telemax: validation failed");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(e) => {
            eprintln!("telemax: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
