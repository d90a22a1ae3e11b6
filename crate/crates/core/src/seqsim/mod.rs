// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse sequences, conditional nuclear propagators, and two-electron timing.

mod deer;
mod eseem;
mod propagate;
mod resonance;
mod sequence;
mod toggling;

pub use deer::deer_trace;
pub use eseem::{chevron_map, eseem_contrast, nuclear_coherence};
pub use propagate::{
    branch_propagator, conditional_decompose, conditional_propagators, ConditionalPropagator,
    Decomposition,
};
pub use resonance::{
    cz_resonance_roots, cz_resonance_tau, quarter_turn_resonance, Resonance, ZPrimeFrame,
    DEFAULT_WINDOW,
};
pub use sequence::{static_residual_of, NamedSequence, PulsePhase, PulseSequence, SequenceFamily};
pub use toggling::{
    calibrate_offset, effective_interaction_time, InteractionTime, TimedSequence, TogglingPair,
};
