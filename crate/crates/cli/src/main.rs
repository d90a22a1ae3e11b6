// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use spinreg_cli::{emit, load_config, run_command, CliError, Command, Format, Status};

/// Simulate decoupling sequences, gates and readout of a two-ion spin register.
#[derive(Parser, Debug)]
#[command(name = "spinreg", version)]
struct Args {
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: String,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

fn run(args: &Args) -> Result<Status, CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let format = match args.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Jsonl) => Format::Jsonl,
        None => cfg.output.format.unwrap_or_default(),
    };
    let run = run_command(&cfg, args.command)?;
    match args.out.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            emit(&run.record, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = std::io::stdout().lock();
            emit(&run.record, format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(run.status)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Infeasible) => {
            eprintln!("spinreg: {}: no sequence met the feasibility thresholds", args.command.name());
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("spinreg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
