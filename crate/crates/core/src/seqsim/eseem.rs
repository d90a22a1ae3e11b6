// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::Result;
use crate::scalar::{lit, Real};
use crate::seqsim::propagate::{conditional_propagators, ConditionalPropagator};
use crate::seqsim::sequence::{NamedSequence, PulseSequence};
use crate::spinsys::{precession_frame, HyperfineParams, PrecessionFrame};

/// Electron coherence factor from one nucleus in a maximally mixed state,
/// `Tr[V+ V-^dagger] / 2`.
pub fn nuclear_coherence<T: Real>(cp: &ConditionalPropagator<T>) -> Complex<T> {
    cp.v_plus.inner(&cp.v_minus) / lit::<T>(2.0)
}

/// Electron echo contrast after `seq`, including every nucleus and an optional
/// stretched-exponential envelope `exp(-(T/T2)^n)`.
pub fn eseem_contrast<T: Real>(
    seq: &PulseSequence<T>,
    nuclei: &[HyperfineParams<T>],
    envelope: Option<(T, T)>,
) -> Result<T> {
    let mut total = Complex::new(T::one(), T::zero());
    for p in nuclei {
        let frame = precession_frame(p)?;
        total = total * nuclear_coherence(&conditional_propagators(seq, &frame));
    }
    let env = match envelope {
        Some((t2, n)) => (-(seq.total_duration() / t2).powf(n)).exp(),
        None => T::one(),
    };
    Ok(total.re * env)
}

/// Conditional nuclear flip probability `(1 - Re L) / 2` seen through the electron
/// coherence `L`, for evenly spaced XY-type sequences. For antiparallel conditional
/// rotations by `+-phi` this equals the flip probability `sin^2(phi/2)` of a nucleus
/// prepared perpendicular to the rotation axis. Rows follow `n_pulses_grid`, columns
/// follow `tau_grid`; zero pulses means free precession for `2 tau`.
pub fn chevron_map<T: Real>(
    frame: &PrecessionFrame<T>,
    tau_grid: &[T],
    n_pulses_grid: &[usize],
) -> Result<Vec<Vec<T>>> {
    n_pulses_grid
        .par_iter()
        .map(|&n| {
            tau_grid
                .iter()
                .map(|&tau| {
                    let seq = NamedSequence::xy(n, tau).to_sequence()?;
                    let l = nuclear_coherence(&conditional_propagators(&seq, frame));
                    Ok((T::one() - l.re) / lit(2.0))
                })
                .collect()
        })
        .collect()
}
