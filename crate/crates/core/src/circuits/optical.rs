// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Effect of repeated optical excitation on the nuclear memory.

use num_complex::Complex64 as C;

use crate::circuits::register::{embed, Register, RegisterState, M8};
use crate::Su2;

/// Which electron is excited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum OpticalMode {
    /// Er-2, the electron coupled to the nucleus.
    Er2Direct,
    /// Er-1, coupled to the nucleus only through Er-2.
    Er1Remote,
}

/// Nuclear coherence factor (relative to the initial one) after `n` excitations.
pub fn coherence_factor(mode: OpticalMode, n: u32, reg: &Register) -> f64 {
    match mode {
        OpticalMode::Er2Direct => {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        }
        OpticalMode::Er1Remote => (-(n as f64) / reg.optical.er1_remote).exp(),
    }
}

/// Nuclear `z'` population-contrast factor after `n` excitations.
pub fn population_factor(mode: OpticalMode, n: u32, reg: &Register) -> f64 {
    match mode {
        OpticalMode::Er2Direct => (-(n as f64) / reg.optical.er2_direct).exp(),
        OpticalMode::Er1Remote => 1.0,
    }
}

fn mix(rho: &M8, p: &M8, keep: f64) -> M8 {
    rho * C::new((1.0 + keep) / 2.0, 0.0) + p * rho * p.adjoint() * C::new((1.0 - keep) / 2.0, 0.0)
}

/// Applies `n` optical excitations. The nucleus dephases in its `z'` basis with
/// [`coherence_factor`] and its populations relax towards the mixed state with
/// [`population_factor`]; electron states are unchanged.
pub fn optical_excite_channel(state: &RegisterState, n: u32, mode: OpticalMode, reg: &Register) -> RegisterState {
    let rho = state.density();
    let zp = embed(crate::circuits::register::Qubit::Nuc, &reg.nuclear_from_primed(&Su2::pauli_z()));
    let xp = embed(crate::circuits::register::Qubit::Nuc, &reg.nuclear_from_primed(&Su2::pauli_x()));
    let rho = mix(&rho, &zp, coherence_factor(mode, n, reg));
    let rho = mix(&rho, &xp, population_factor(mode, n, reg));
    RegisterState::Mixed(rho)
}
