// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Register simulation: gate constructions, circuits, budgets and readout analysis.

pub mod budget;
pub mod experiments;
pub mod gates;
pub mod optical;
pub mod qnd;
pub mod register;

pub use budget::{fidelity_budget, readout_correct, readout_correct_bell, BudgetValue, CircuitKind, Corrected, NoiseBudget};
pub use experiments::{
    bell_ee_correlations, bell_en_correlations, ramsey_signal, remote_readout_fidelity, swap_squared_fidelity,
    Basis, Correlations,
};
pub use gates::{
    apply_circuit, build_gate, circuit_duration, circuit_unitary, simplify, EeTiming, GateKind, GateLibrary, GateOp,
    Realization, Sign, REFERENCE_J_KHZ,
};
pub use optical::{optical_excite_channel, OpticalMode};
pub use qnd::{qnd_analysis, t1_limited_fidelity, QndModel, QndPolicy, QndResult};
pub use register::{OpticalConstants, Pauli, Qubit, Register, RegisterState};
