// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Repeated (QND) readout statistics by exact enumeration.

use crate::error::{invalid, Error, Result};

/// Largest number of rounds enumerated exactly.
pub const MAX_ROUNDS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QndPolicy {
    /// Fidelity of round `k` (1-based) alone.
    PerRound(usize),
    /// Keep only shots where every round agrees.
    PostSelect,
    /// Majority vote over all rounds; ties count as a coin flip.
    Majority,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct QndResult {
    pub fidelity: f64,
    pub acceptance: f64,
}

/// Per-round readout model.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QndModel {
    /// Flip probability after each read.
    pub p_err: f64,
    /// Single-shot readout fidelity of the reading electron.
    pub f_read: f64,
    /// Contrast of the mapping gate; when present each round's assignment fidelity is
    /// `(1 + p * f_read * (1 - p_err/2)) / 2`.
    pub gate_contrast: Option<f64>,
}

impl QndModel {
    pub fn round_fidelity(&self) -> f64 {
        match self.gate_contrast {
            Some(p) => 0.5 * (1.0 + p * self.f_read * (1.0 - self.p_err / 2.0)),
            None => self.f_read,
        }
    }

    fn validate(&self, rounds: usize) -> Result<()> {
        if rounds == 0 {
            return Err(invalid("rounds", "must be at least 1"));
        }
        if rounds > MAX_ROUNDS {
            return Err(Error::RoundsTooLarge(rounds));
        }
        if !(0.0..=1.0).contains(&self.p_err) {
            return Err(invalid("p_err", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.f_read) {
            return Err(invalid("f_read", "must lie in [0, 1]"));
        }
        if let Some(p) = self.gate_contrast {
            if !(p.abs() <= 1.0) {
                return Err(invalid("gate_contrast", "must lie in [-1, 1]"));
            }
        }
        Ok(())
    }
}

/// Enumerates all outcome strings. The spin starts in a known state, each round is read
/// with the round fidelity, and flips with `p_err` after the read. Fidelity is measured
/// against the initial state.
pub fn qnd_analysis(rounds: usize, model: &QndModel, policy: QndPolicy) -> Result<QndResult> {
    model.validate(rounds)?;
    if let QndPolicy::PerRound(k) = policy {
        if k == 0 || k > rounds {
            return Err(invalid("round", format!("{k} not in 1..={rounds}")));
        }
    }
    let f = model.round_fidelity();
    let p = model.p_err;
    // Forward pass over outcome strings; track P(outcomes, current state) with initial 0.
    let mut fid = 0.0;
    let mut acc = 0.0;
    for mask in 0u32..(1u32 << rounds) {
        let outcome = |r: usize| (mask >> r) & 1;
        // alpha[s] = P(o_1..o_r, s_r = s).
        let mut alpha = [1.0, 0.0];
        for r in 0..rounds {
            let o = outcome(r) as usize;
            let read = |s: usize| if s == o { f } else { 1.0 - f };
            let a = [alpha[0] * read(0), alpha[1] * read(1)];
            alpha = [a[0] * (1.0 - p) + a[1] * p, a[0] * p + a[1] * (1.0 - p)];
        }
        let prob = alpha[0] + alpha[1];
        let ones = mask.count_ones() as usize;
        match policy {
            QndPolicy::PerRound(k) => {
                acc += prob;
                if outcome(k - 1) == 0 {
                    fid += prob;
                }
            }
            QndPolicy::PostSelect => {
                if ones == 0 || ones == rounds {
                    acc += prob;
                    if ones == 0 {
                        fid += prob;
                    }
                }
            }
            QndPolicy::Majority => {
                acc += prob;
                let zeros = rounds - ones;
                if zeros > ones {
                    fid += prob;
                } else if zeros == ones {
                    fid += 0.5 * prob;
                }
            }
        }
    }
    let fidelity = if acc > 0.0 { fid / acc } else { 0.0 };
    Ok(QndResult { fidelity, acceptance: acc })
}

/// Round-`k` fidelity limited only by `T1` relaxation, with the time per round given
/// explicitly (seconds).
pub fn t1_limited_fidelity(round: usize, shot_duration_s: f64, t1_s: f64) -> Result<f64> {
    if !(shot_duration_s >= 0.0) {
        return Err(invalid("shot_duration", "must be non-negative"));
    }
    if !(t1_s > 0.0) {
        return Err(invalid("t1", "must be positive"));
    }
    let t = round.saturating_sub(1) as f64 * shot_duration_s;
    Ok(0.5 * (1.0 + (-t / t1_s).exp()))
}
