// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction shared by the generic simulation core.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar usable by the spin-dynamics core. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Converts `T` into `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Converts a frequency in kHz to angular frequency in rad/us.
#[inline]
pub fn khz_to_rad_per_us<T: Real>(f_khz: T) -> T {
    f_khz * T::TAU() / lit(1000.0)
}

/// Converts angular frequency in rad/us to a frequency in kHz.
#[inline]
pub fn rad_per_us_to_khz<T: Real>(w: T) -> T {
    w * lit(1000.0) / T::TAU()
}
