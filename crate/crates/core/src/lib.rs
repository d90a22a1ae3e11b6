// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation and control of a two-electron, one-nucleus spin register.
//!
//! The single-spin core (`spinsys`, `seqsim`, `grass`) is generic over the
//! scalar type; `f64` aliases are exported at the crate root.

pub mod circuits;
pub mod ensemble;
pub mod error;
pub mod grass;
pub mod scalar;
pub mod seqsim;
pub mod spinsys;
pub mod su2;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Su2 = su2::Su2<f64>;
pub type HyperfineParams = spinsys::HyperfineParams<f64>;
pub type PrecessionFrame = spinsys::PrecessionFrame<f64>;
pub type PulseSequence = seqsim::PulseSequence<f64>;
pub type ConditionalPropagator = seqsim::ConditionalPropagator<f64>;
pub type ZPrimeFrame = seqsim::ZPrimeFrame<f64>;
pub type TogglingPair = seqsim::TogglingPair<f64>;
