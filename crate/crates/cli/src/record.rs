// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Result records and their CSV / JSON-lines encodings.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Format;

/// Fitted parameters and their one-sigma uncertainties.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub sigma: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// Sweep variable first, then outputs.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: BTreeMap<String, f64>,
    pub fits: Vec<FitRecord>,
}

impl ResultRecord {
    pub fn new(command: &str, config_hash: String, seed: u64, columns: &[&str]) -> Self {
        Self {
            command: command.into(),
            config_hash,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            fits: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.summary.insert(key.into(), value);
    }

    /// Name of the first non-finite value, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        for row in &self.rows {
            for (c, v) in self.columns.iter().zip(row) {
                if !v.is_finite() {
                    return Some(c.clone());
                }
            }
        }
        let fit_values = self.fits.iter().flat_map(|f| f.params.iter().chain(&f.sigma));
        self.summary.iter().chain(fit_values).find(|(_, v)| !v.is_finite()).map(|(k, _)| k.clone())
    }
}

/// Writes `record` as CSV (columns and rows only) or as one JSON line.
pub fn emit(record: &ResultRecord, format: Format, out: &mut impl Write) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", record.columns.join(","))?;
            for row in &record.rows {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        Format::Jsonl => {
            serde_json::to_writer(&mut *out, record)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Reads every record of a JSON-lines document.
pub fn parse_jsonl(text: &str) -> serde_json::Result<Vec<ResultRecord>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}
