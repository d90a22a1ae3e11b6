// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Circuits of the register experiments and their readout.

use rayon::prelude::*;

use crate::circuits::budget::NoiseBudget;
use crate::circuits::gates::{apply_circuit, simplify, GateKind, GateLibrary, GateOp, Sign};
use crate::circuits::register::{Pauli, Qubit, RegisterState};
use crate::error::Result;
use crate::seqsim::PulsePhase;

/// Measurement basis of a two-qubit correlation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

pub const BASES: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

/// Two-qubit correlations.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Correlations {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
}

impl Correlations {
    /// Fidelity with the closest Bell state, `max (1 + s1 XX + s2 YY + s3 ZZ)/4` over
    /// sign patterns with `s1 s2 s3 = -1`.
    pub fn bell_fidelity(&self) -> f64 {
        [(1.0, 1.0, -1.0), (1.0, -1.0, 1.0), (-1.0, 1.0, 1.0), (-1.0, -1.0, -1.0)]
            .iter()
            .map(|(a, b, c)| (1.0 + a * self.xx + b * self.yy + c * self.zz) / 4.0)
            .fold(f64::MIN, f64::max)
    }
}

/// Basis change on an electron so that a Z readout measures `basis`.
pub fn to_z_basis(q: Qubit, basis: Basis) -> Vec<GateOp> {
    match basis {
        Basis::X => vec![GateOp::half_pi(q, PulsePhase::Y, Sign::Minus)],
        Basis::Y => vec![GateOp::half_pi(q, PulsePhase::X, Sign::Plus)],
        Basis::Z => vec![],
    }
}

fn depolarize(qubits: &[Qubit], contrast: f64) -> GateOp {
    GateOp::Depolarize { qubits: qubits.to_vec(), contrast }
}

/// Inserts the electron dephasing of the electron-electron CZ after each pulse pair.
fn ee_noise(ops: Vec<GateOp>, noise: Option<&NoiseBudget>) -> Vec<GateOp> {
    let Some(b) = noise else { return ops };
    ops.into_iter()
        .flat_map(|op| {
            if matches!(op, GateOp::EESequencePair(_)) {
                vec![op, depolarize(&[Qubit::Er1], b.p_xy6_er1), depolarize(&[Qubit::Er2], b.p_xy8_er2.abs())]
            } else {
                vec![op]
            }
        })
        .collect()
}

fn z1z2(state: &RegisterState, lib: &GateLibrary) -> f64 {
    state.expect(&lib.register.observable(Pauli::Z, Pauli::Z, Pauli::I))
}

/// Electron-electron Bell state preparation.
pub fn bell_ee_prepare(lib: &GateLibrary, noise: Option<&NoiseBudget>) -> Result<Vec<GateOp>> {
    let mut ops = vec![
        GateOp::half_pi(Qubit::Er1, PulsePhase::Y, Sign::Plus),
        GateOp::half_pi(Qubit::Er2, PulsePhase::Y, Sign::Plus),
    ];
    ops.extend(ee_noise(lib.build(GateKind::CzEe)?, noise));
    ops.push(GateOp::half_pi(Qubit::Er2, PulsePhase::Y, Sign::Minus));
    Ok(ops)
}

/// Correlations of the electron Bell state from separate runs per basis.
pub fn bell_ee_correlations(lib: &GateLibrary, noise: Option<&NoiseBudget>) -> Result<Correlations> {
    let prep = bell_ee_prepare(lib, noise)?;
    let init = RegisterState::mixed_nucleus(0, 0)?;
    let vals: Vec<f64> = BASES
        .par_iter()
        .map(|&b| {
            let mut ops = prep.clone();
            ops.extend(to_z_basis(Qubit::Er1, b));
            ops.extend(to_z_basis(Qubit::Er2, b));
            let s = apply_circuit(&init, &simplify(ops), &lib.register)?;
            Ok(z1z2(&s, lib))
        })
        .collect::<Result<_>>()?;
    Ok(Correlations { xx: vals[0], yy: vals[1], zz: vals[2] })
}

/// Remote readout of Er-2 through Er-1: maps Er-2's Z onto Er-1 and returns the
/// assignment fidelity averaged over both Er-2 inputs. `noise` adds Er-1 dephasing,
/// Er-2 pulse errors and the Er-1 readout contrast.
pub fn remote_readout_fidelity(lib: &GateLibrary, noise: Option<&NoiseBudget>) -> Result<f64> {
    let mut ops = Vec::new();
    if let Some(b) = noise {
        ops.push(depolarize(&[Qubit::Er2], 1.0 - b.p_err / 2.0));
    }
    ops.push(GateOp::half_pi(Qubit::Er1, PulsePhase::Y, Sign::Minus));
    ops.extend(lib.build(GateKind::CzEe)?);
    if let Some(b) = noise {
        ops.push(depolarize(&[Qubit::Er1], b.p_xy6_er1));
    }
    ops.push(GateOp::half_pi(Qubit::Er1, PulsePhase::Y, Sign::Plus));
    if let Some(b) = noise {
        // Readout assignment error as a contrast factor on the read electron.
        ops.push(depolarize(&[Qubit::Er1], b.f_read1));
    }
    let z1 = lib.register.observable(Pauli::Z, Pauli::I, Pauli::I);
    let z2 = lib.register.observable(Pauli::I, Pauli::Z, Pauli::I);
    let mut total = 0.0;
    for e2 in 0..2 {
        let init = RegisterState::mixed_nucleus(0, e2)?;
        let s = apply_circuit(&init, &ops, &lib.register)?;
        // Correct assignment: the Er-1 outcome reproduces the prepared Er-2 state, up to
        // the sign fixed by the noiseless map.
        let target = init.expect(&z2);
        total += 0.5 * (1.0 + (s.expect(&z1) * target).abs());
    }
    Ok(total / 2.0)
}

/// Stores `|state>` of Er-2 in the nucleus and retrieves it: two full SWAPs with
/// two-qubit depolarization after each conditional gate. Returns the retrieval
/// fidelity averaged over the `Z` and `X` eigenstates.
pub fn swap_squared_fidelity(lib: &GateLibrary, noise: Option<&NoiseBudget>) -> Result<f64> {
    let swap = lib.build(GateKind::SwapEn)?;
    let cz = lib.build(GateKind::CzEn)?;
    let cu = lib.build(GateKind::CuEn)?;
    let pair = [Qubit::Er2, Qubit::Nuc];
    // Recognize conditional-gate blocks inside the SWAP by their leading operation.
    let mut ops = Vec::new();
    for _ in 0..2 {
        for op in &swap {
            ops.push(op.clone());
            if let Some(b) = noise {
                if *op == cz[0] {
                    ops.push(depolarize(&pair, b.p_cz));
                } else if *op == cu[0] {
                    ops.push(depolarize(&pair, b.p_cx));
                }
            }
        }
    }
    let reg = &lib.register;
    let mut total = 0.0;
    let inputs: [(Vec<GateOp>, Pauli); 2] = [
        (vec![], Pauli::Z),
        (vec![GateOp::half_pi(Qubit::Er2, PulsePhase::Y, Sign::Plus)], Pauli::X),
    ];
    for (prep, p) in inputs {
        let init = apply_circuit(&RegisterState::basis(reg, 0, 0, 0)?, &prep, reg)?;
        let s = apply_circuit(&init, &ops, reg)?;
        let o = reg.observable(Pauli::I, p, Pauli::I);
        total += 0.5 * (1.0 + s.expect(&o) * init.expect(&o));
    }
    Ok(total / 2.0)
}

/// Nuclear Ramsey: CX_en, wait `t`, CX_en on Er-2 starting in `|0>` with the nucleus
/// mixed.
pub fn ramsey_circuit(lib: &GateLibrary, t: f64) -> Result<Vec<GateOp>> {
    let cx = lib.build(GateKind::CxEn)?;
    let mut ops = cx.clone();
    ops.push(GateOp::Wait(t));
    ops.extend(cx);
    Ok(simplify(ops))
}

/// `<Z>` of Er-2 after the Ramsey circuit.
pub fn ramsey_signal(lib: &GateLibrary, t: f64) -> Result<f64> {
    let init = RegisterState::mixed_nucleus(0, 0)?;
    let s = apply_circuit(&init, &ramsey_circuit(lib, t)?, &lib.register)?;
    Ok(s.expect(&lib.register.observable(Pauli::I, Pauli::Z, Pauli::I)))
}

/// Er-2 / nucleus Bell state prepared through Er-1 and the nuclear memory.
pub fn bell_en_prepare(lib: &GateLibrary) -> Result<Vec<GateOp>> {
    let mut ops = lib.build(GateKind::SwapEnZonly { to_nucleus: true })?;
    ops.extend(lib.build(GateKind::SwapEeZonly { from: Qubit::Er1 })?);
    ops.push(GateOp::half_pi(Qubit::Er2, PulsePhase::Y, Sign::Plus));
    ops.extend(lib.build(GateKind::CuEn)?);
    Ok(ops)
}

/// Readout of the Er-2 / nucleus correlation in `basis` onto `Z1 Z2`.
pub fn bell_en_readout(lib: &GateLibrary, basis: Basis) -> Result<Vec<GateOp>> {
    let mut ops = to_z_basis(Qubit::Er2, basis);
    ops.extend(lib.build(GateKind::SwapEeZonly { from: Qubit::Er2 })?);
    match basis {
        Basis::Z => ops.extend(lib.build(GateKind::SwapEnZonly { to_nucleus: false })?),
        b => {
            ops.extend(lib.build(GateKind::SwapEn)?);
            ops.extend(to_z_basis(Qubit::Er2, b));
        }
    }
    Ok(ops)
}

/// Er-2 / nucleus Bell correlations measured through both electron readouts.
pub fn bell_en_correlations(lib: &GateLibrary) -> Result<Correlations> {
    let prep = bell_en_prepare(lib)?;
    let init = RegisterState::mixed_nucleus(0, 0)?;
    let vals: Vec<f64> = BASES
        .par_iter()
        .map(|&b| {
            let mut ops = prep.clone();
            ops.extend(bell_en_readout(lib, b)?);
            let s = apply_circuit(&init, &simplify(ops), &lib.register)?;
            Ok(z1z2(&s, lib))
        })
        .collect::<Result<_>>()?;
    Ok(Correlations { xx: vals[0], yy: vals[1], zz: vals[2] })
}
