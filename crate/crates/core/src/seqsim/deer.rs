// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{invalid, Result};
use crate::scalar::{lit, Real};

/// DEER contrast `cos(2 pi J T) exp(-T / T_damp)` with `J` in kHz and `T` in us.
/// `t_damp = None` disables damping.
pub fn deer_trace<T: Real>(j_khz: T, t_int_grid: &[T], t_damp: Option<T>) -> Result<Vec<T>> {
    if !(j_khz > T::zero()) {
        return Err(invalid("j_khz", "must be > 0"));
    }
    let w = T::TAU() * j_khz / lit(1000.0);
    Ok(t_int_grid
        .iter()
        .map(|&t| {
            let damp = t_damp.map_or(T::one(), |td| (-t / td).exp());
            (w * t).cos() * damp
        })
        .collect())
}
