// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Three-spin register (Er-1, Er-2, nucleus) states and operator embedding.
//!
//! Basis index = `e1 * 4 + e2 * 2 + n`. Electron `|0>` is the `+` branch of the
//! nuclear precession. The nucleus is stored in the lab basis; nuclear observables
//! and conditional targets are expressed in the `z'` frame.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64 as C;

use crate::error::{invalid, Error, Result};
use crate::seqsim::ZPrimeFrame;
use crate::spinsys::{free_propagator, Branch, PrecessionFrame};
use crate::Su2;

pub type M2 = SMatrix<C, 2, 2>;
pub type M8 = SMatrix<C, 8, 8>;
pub type V8 = SVector<C, 8>;

/// Tolerance on norm/trace drift after a circuit.
pub const DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Qubit {
    Er1,
    Er2,
    Nuc,
}

impl Qubit {
    pub fn position(self) -> usize {
        match self {
            Qubit::Er1 => 0,
            Qubit::Er2 => 1,
            Qubit::Nuc => 2,
        }
    }

    pub fn is_electron(self) -> bool {
        self != Qubit::Nuc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn su2(self) -> Su2 {
        match self {
            Pauli::I => Su2::identity(),
            Pauli::X => Su2::pauli_x(),
            Pauli::Y => Su2::pauli_y(),
            Pauli::Z => Su2::pauli_z(),
        }
    }
}

pub fn m2(u: &Su2) -> M2 {
    M2::new(u.m[0][0], u.m[0][1], u.m[1][0], u.m[1][1])
}

pub fn kron3(a: &M2, b: &M2, c: &M2) -> M8 {
    a.kronecker(b).kronecker(c)
}

/// Embeds a single-qubit operator.
pub fn embed(q: Qubit, u: &M2) -> M8 {
    let id = M2::identity();
    match q {
        Qubit::Er1 => kron3(u, &id, &id),
        Qubit::Er2 => kron3(&id, u, &id),
        Qubit::Nuc => kron3(&id, &id, u),
    }
}

/// Calibration constants of the optical-excitation channels, in pulses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpticalConstants {
    /// Nuclear z'-population relaxation constant under direct Er-2 excitation.
    pub er2_direct: f64,
    /// Nuclear dephasing constant under Er-1 excitation.
    pub er1_remote: f64,
}

impl Default for OpticalConstants {
    fn default() -> Self {
        Self { er2_direct: 20.0, er1_remote: 307.0 }
    }
}

/// Physical parameters needed to run circuits.
#[derive(Clone, Debug, PartialEq)]
pub struct Register {
    /// Ising coupling in kHz, `H/h = (J/2) Z1 Z2`; zero disables it.
    pub j_khz: f64,
    /// Nuclear precession frame; `None` freezes the nucleus between gates.
    pub nuc: Option<PrecessionFrame<f64>>,
    pub zprime: ZPrimeFrame<f64>,
    pub optical: OpticalConstants,
}

impl Register {
    pub fn new(j_khz: f64, nuc: Option<PrecessionFrame<f64>>, zprime: ZPrimeFrame<f64>) -> Self {
        Self { j_khz, nuc, zprime, optical: OpticalConstants::default() }
    }

    /// Nuclear operator given in the `z'` frame, converted to the lab basis.
    pub fn nuclear_from_primed(&self, u: &Su2) -> M2 {
        m2(&u.conjugate_by(&self.zprime.rotation))
    }

    /// `p1 (x) p2 (x) pn'`, with the nuclear Pauli taken in the `z'` frame.
    pub fn observable(&self, p1: Pauli, p2: Pauli, pn: Pauli) -> M8 {
        kron3(&m2(&p1.su2()), &m2(&p2.su2()), &self.nuclear_from_primed(&pn.su2()))
    }

    /// Nuclear `z'` eigenstate `|bit'>` in the lab basis.
    pub fn nuclear_state(&self, bit: usize) -> [C; 2] {
        let r = &self.zprime.rotation.m;
        [r[0][bit], r[1][bit]]
    }

    /// Free evolution for `dt` us: Ising phase on the electrons and nuclear precession
    /// conditioned on Er-2.
    pub fn free_evolution(&self, dt: f64) -> Result<M8> {
        if dt < 0.0 {
            return Err(Error::NegativeDuration(dt));
        }
        let phase = std::f64::consts::PI * self.j_khz * dt / 1000.0;
        let (up, um) = match &self.nuc {
            Some(f) => (
                m2(&free_propagator(f, Branch::Plus, dt)?),
                m2(&free_propagator(f, Branch::Minus, dt)?),
            ),
            None => (M2::identity(), M2::identity()),
        };
        let mut out = M8::zeros();
        for e1 in 0..2 {
            for e2 in 0..2 {
                let z1 = if e1 == 0 { 1.0 } else { -1.0 };
                let z2 = if e2 == 0 { 1.0 } else { -1.0 };
                let ph = C::from_polar(1.0, -phase * z1 * z2);
                let u = if e2 == 0 { &up } else { &um };
                let base = e1 * 4 + e2 * 2;
                for i in 0..2 {
                    for j in 0..2 {
                        out[(base + i, base + j)] = ph * u[(i, j)];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Pure or mixed state of the register.
#[derive(Clone, Debug, PartialEq)]
pub enum RegisterState {
    Pure(V8),
    Mixed(M8),
}

impl RegisterState {
    /// Product of three single-qubit pure states (nucleus in the lab basis).
    pub fn product(e1: [C; 2], e2: [C; 2], n: [C; 2]) -> Result<Self> {
        let mut v = V8::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    v[a * 4 + b * 2 + c] = e1[a] * e2[b] * n[c];
                }
            }
        }
        let s = RegisterState::Pure(v);
        s.validate()?;
        Ok(s)
    }

    /// Electrons in computational states, nucleus in `|bit'>`.
    pub fn basis(reg: &Register, e1: usize, e2: usize, n: usize) -> Result<Self> {
        Self::product(ket(e1)?, ket(e2)?, reg.nuclear_state(n.min(1)))
    }

    /// Electrons in computational states, nucleus maximally mixed.
    pub fn mixed_nucleus(e1: usize, e2: usize) -> Result<Self> {
        let a = Self::product(ket(e1)?, ket(e2)?, ket(0)?)?.density();
        let b = Self::product(ket(e1)?, ket(e2)?, ket(1)?)?.density();
        Ok(RegisterState::Mixed((a + b) * C::new(0.5, 0.0)))
    }

    pub fn density(&self) -> M8 {
        match self {
            RegisterState::Pure(v) => v * v.adjoint(),
            RegisterState::Mixed(m) => *m,
        }
    }

    pub fn into_mixed(self) -> Self {
        RegisterState::Mixed(self.density())
    }

    pub fn trace_deviation(&self) -> f64 {
        match self {
            RegisterState::Pure(v) => (v.norm_squared() - 1.0).abs(),
            RegisterState::Mixed(m) => (m.trace() - C::new(1.0, 0.0)).norm(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.trace_deviation();
        if d > 1e-9 || d.is_nan() {
            return Err(invalid("state", format!("norm/trace deviates by {d:.3e}")));
        }
        if let RegisterState::Mixed(m) = self {
            let herm = (m - m.adjoint()).norm();
            if herm > 1e-9 {
                return Err(invalid("state", "density matrix is not Hermitian"));
            }
            let eig = nalgebra::SymmetricEigen::new(hermitian_real_embedding(m)).eigenvalues;
            if eig.iter().any(|&e| e < -1e-9) {
                return Err(invalid("state", "density matrix is not positive semidefinite"));
            }
        }
        Ok(())
    }

    pub fn apply_unitary(&self, u: &M8) -> Self {
        match self {
            RegisterState::Pure(v) => RegisterState::Pure(u * v),
            RegisterState::Mixed(m) => RegisterState::Mixed(u * m * u.adjoint()),
        }
    }

    /// `Tr[rho O]` (real part; `O` Hermitian).
    pub fn expect(&self, o: &M8) -> f64 {
        match self {
            RegisterState::Pure(v) => (v.adjoint() * o * v)[(0, 0)].re,
            RegisterState::Mixed(m) => (m * o).trace().re,
        }
    }
}

/// Real symmetric 16x16 embedding of a Hermitian 8x8 matrix (same spectrum, doubled).
fn hermitian_real_embedding(m: &M8) -> SMatrix<f64, 16, 16> {
    let mut r = SMatrix::<f64, 16, 16>::zeros();
    for i in 0..8 {
        for j in 0..8 {
            let z = m[(i, j)];
            r[(i, j)] = z.re;
            r[(i + 8, j + 8)] = z.re;
            r[(i, j + 8)] = -z.im;
            r[(i + 8, j)] = z.im;
        }
    }
    r
}

pub fn ket(bit: usize) -> Result<[C; 2]> {
    match bit {
        0 => Ok([C::new(1.0, 0.0), C::new(0.0, 0.0)]),
        1 => Ok([C::new(0.0, 0.0), C::new(1.0, 0.0)]),
        _ => Err(invalid("bit", format!("{bit} is not 0 or 1"))),
    }
}
