// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Configuration, experiment commands, fitting and output for the `spinreg` tool.

pub mod commands;
pub mod config;
pub mod fit;
pub mod record;

pub use commands::{run_command, CliError, Command, Run, Status};
pub use config::{load_config, parse_config, ConfigError, Format, RunConfig};
pub use fit::{fit_damped_cosine, fit_stretched_exp, DampedCosineFit, FitError, StretchedExpFit};
pub use record::{emit, parse_jsonl, FitRecord, ResultRecord};
