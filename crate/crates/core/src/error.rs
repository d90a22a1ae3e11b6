// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("precession vector has zero length on branch {branch}")]
    ZeroPrecession { branch: &'static str },

    #[error("negative duration {0} us")]
    NegativeDuration(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("hyperfine coupling has no perpendicular component; no entangling axis")]
    NoEntanglingAxis,

    #[error("no CZ resonance in window [{lo}, {hi}] us")]
    NoRootInWindow { lo: f64, hi: f64 },

    #[error("no feasible sequence among {starts} starts")]
    NoFeasibleSequence { starts: usize },

    #[error("gate {0} requires an optimized sequence but none was supplied")]
    MissingGrassSequence(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("unitarity drift {0:.3e} exceeds tolerance")]
    UnitarityDrift(f64),

    #[error("fidelity {fidelity} is at or below 1/2 for {what}")]
    FidelityTooLow { what: &'static str, fidelity: f64 },

    #[error("{0} rounds exceeds exact-enumeration limit of 20")]
    RoundsTooLarge(usize),

    #[error("zero separation between ions")]
    ZeroSeparation,

    #[error("simulation box side {side_nm} nm is too small (need at least {min_nm} nm)")]
    BoxTooSmall { side_nm: f64, min_nm: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
