// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex;

use crate::scalar::{lit, Real};
use crate::seqsim::{conditional_propagators, PulseSequence, ZPrimeFrame};
use crate::spinsys::PrecessionFrame;
use crate::su2::Su2;
use crate::error::Result;

/// Largest per-branch trace infidelity accepted as a CU gate.
pub const CU_MAX_INFIDELITY: f64 = 0.01;

/// Branch targets of the CU gate in the `z'` frame: `H exp(+i Y pi/4)` for the `+`
/// branch and `H exp(-i Y pi/4)` for the `-` branch, with `H` the Hadamard.
/// These equal `X'` and `Z'` up to sign.
pub fn cu_targets<T: Real>(zprime: &ZPrimeFrame<T>) -> (Su2<T>, Su2<T>) {
    let r = T::FRAC_1_SQRT_2();
    let h = Su2::pauli_dot([r, T::zero(), r]);
    let y = [T::zero(), T::one(), T::zero()];
    let q = T::FRAC_PI_2();
    // exp(+i Y pi/4) = rotation about y by -pi/2.
    let plus = h * Su2::rotation(y, -q);
    let minus = h * Su2::rotation(y, q);
    (plus.conjugate_by(&zprime.rotation), minus.conjugate_by(&zprime.rotation))
}

/// Result of comparing a sequence against the CU gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuReport<T> {
    pub is_cu: bool,
    /// `1 - |Tr[V T^dagger]|^2 / 4` per branch.
    pub infidelity_plus: T,
    pub infidelity_minus: T,
    /// `arg Tr[V T^dagger]` per branch, rad.
    pub phase_plus: T,
    pub phase_minus: T,
}

fn compare<T: Real>(v: &Su2<T>, t: &Su2<T>) -> (T, T) {
    let tr: Complex<T> = v.inner(t);
    (T::one() - tr.norm_sqr() / lit(4.0), tr.arg())
}

pub fn cu_report<T: Real>(v_plus: &Su2<T>, v_minus: &Su2<T>, zprime: &ZPrimeFrame<T>) -> CuReport<T> {
    let (tp, tm) = cu_targets(zprime);
    let (ip, pp) = compare(v_plus, &tp);
    let (im, pm) = compare(v_minus, &tm);
    let lim = lit(CU_MAX_INFIDELITY);
    CuReport {
        is_cu: ip <= lim && im <= lim,
        infidelity_plus: ip,
        infidelity_minus: im,
        phase_plus: pp,
        phase_minus: pm,
    }
}

/// Checks whether `spacings` realize the CU gate on a nucleus with the given frame.
pub fn cu_gate_check<T: Real>(
    spacings: &[T],
    frame: &PrecessionFrame<T>,
    zprime: &ZPrimeFrame<T>,
) -> Result<CuReport<T>> {
    let seq = PulseSequence::new(spacings.to_vec())?;
    let cp = conditional_propagators(&seq, frame);
    Ok(cu_report(&cp.v_plus, &cp.v_minus, zprime))
}
