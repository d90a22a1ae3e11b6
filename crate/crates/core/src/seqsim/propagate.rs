// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use crate::scalar::{lit, Real};
use crate::seqsim::sequence::PulseSequence;
use crate::spinsys::{free_propagator, Branch, PrecessionFrame};
use crate::su2::{vec3, Su2};

/// Reunitarize accumulated products after this many factors.
pub(crate) const REUNITARIZE_EVERY: usize = 256;

/// Net nuclear rotations for the two initial electron states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalPropagator<T: Real> {
    pub v_plus: Su2<T>,
    pub v_minus: Su2<T>,
}

impl<T: Real> ConditionalPropagator<T> {
    /// Composition: `later` applied after `self`.
    pub fn then(&self, later: &Self, n_pulses_self: usize) -> Self {
        // After an odd number of pulses the electron is on the other branch.
        if n_pulses_self % 2 == 0 {
            Self {
                v_plus: later.v_plus * self.v_plus,
                v_minus: later.v_minus * self.v_minus,
            }
        } else {
            Self {
                v_plus: later.v_minus * self.v_plus,
                v_minus: later.v_plus * self.v_minus,
            }
        }
    }
}

/// `U_b(tau_{N+1}) ... U_{-b}(tau_2) U_b(tau_1)`, flipping branch at every pulse.
pub fn branch_propagator<T: Real>(
    seq: &PulseSequence<T>,
    frame: &PrecessionFrame<T>,
    initial: Branch,
) -> Su2<T> {
    let mut v = Su2::identity();
    let mut b = initial;
    for (k, &tau) in seq.spacings().iter().enumerate() {
        let u = free_propagator(frame, b, tau).expect("sequence spacings are non-negative");
        v = u * v;
        if (k + 1) % REUNITARIZE_EVERY == 0 {
            v = v.reunitarize();
        }
        b = b.flip();
    }
    v
}

pub fn conditional_propagators<T: Real>(
    seq: &PulseSequence<T>,
    frame: &PrecessionFrame<T>,
) -> ConditionalPropagator<T> {
    ConditionalPropagator {
        v_plus: branch_propagator(seq, frame, Branch::Plus),
        v_minus: branch_propagator(seq, frame, Branch::Minus),
    }
}

/// Axis-angle view of a conditional propagator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition<T: Real> {
    pub alpha_plus: T,
    pub alpha_minus: T,
    pub q_plus: [T; 3],
    pub q_minus: [T; 3],
    /// Angle between `q_plus` and `-q_minus`, degrees.
    pub antiparallelity_deg: T,
    /// Set when either rotation angle is below 1e-9 rad; its axis is reported as `z`.
    pub degenerate: bool,
}

pub fn conditional_decompose<T: Real>(cp: &ConditionalPropagator<T>) -> Decomposition<T> {
    let p = cp.v_plus.axis_angle_unchecked();
    let m = cp.v_minus.axis_angle_unchecked();
    let eps = lit(1e-9);
    let degenerate = p.angle < eps || m.angle < eps;
    let neg = vec3::scale(m.axis, -T::one());
    let anti = vec3::angle(p.axis, neg).to_degrees();
    Decomposition {
        alpha_plus: p.angle,
        alpha_minus: m.angle,
        q_plus: p.axis,
        q_minus: m.axis,
        antiparallelity_deg: anti,
        degenerate,
    }
}
