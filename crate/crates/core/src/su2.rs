// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! 2x2 unitary matrices for single-spin propagators.

use std::ops::Mul;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// A 2x2 complex matrix, used for elements of U(2).
///
/// Stored row-major. Products of many factors should be passed through
/// [`Su2::reunitarize`] periodically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2<T: Real> {
    pub m: [[Complex<T>; 2]; 2],
}

/// Rotation angle and unit axis of an element of SU(2), `U = exp(-i angle n.sigma / 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisAngle<T: Real> {
    pub angle: T,
    pub axis: [T; 3],
}

#[inline]
fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

impl<T: Real> Su2<T> {
    pub fn new(m: [[Complex<T>; 2]; 2]) -> Self {
        Self { m }
    }

    /// Builds a matrix and rejects it unless `U U^dagger = I` to `tol` (max-abs).
    pub fn try_unitary(m: [[Complex<T>; 2]; 2], tol: T) -> Result<Self> {
        let u = Self { m };
        let dev = u.unitarity_deviation();
        if dev > tol || dev.is_nan() {
            return Err(Error::NotUnitary(to_f64(dev)));
        }
        Ok(u)
    }

    pub fn identity() -> Self {
        let o = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        Self { m: [[o, z], [z, o]] }
    }

    pub fn pauli_x() -> Self {
        let o = c(T::one(), T::zero());
        let z = c(T::zero(), T::zero());
        Self { m: [[z, o], [o, z]] }
    }

    pub fn pauli_y() -> Self {
        let z = c(T::zero(), T::zero());
        Self {
            m: [[z, c(T::zero(), -T::one())], [c(T::zero(), T::one()), z]],
        }
    }

    pub fn pauli_z() -> Self {
        let z = c(T::zero(), T::zero());
        Self {
            m: [[c(T::one(), T::zero()), z], [z, c(-T::one(), T::zero())]],
        }
    }

    /// `n.sigma` for an arbitrary (not necessarily unit) vector.
    pub fn pauli_dot(n: [T; 3]) -> Self {
        Self {
            m: [
                [c(n[2], T::zero()), c(n[0], -n[1])],
                [c(n[0], n[1]), c(-n[2], T::zero())],
            ],
        }
    }

    /// `exp(-i angle n.sigma / 2)` for a unit axis `n`.
    pub fn rotation(axis: [T; 3], angle: T) -> Self {
        let h = angle / lit(2.0);
        let (s, co) = h.sin_cos();
        let [x, y, z] = axis;
        Self {
            m: [
                [c(co, -s * z), c(-s * y, -s * x)],
                [c(s * y, -s * x), c(co, s * z)],
            ],
        }
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for e in row.iter_mut() {
                *e = *e * k;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    /// `Tr(self other^dagger)`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        let a = &self.m;
        let b = &other.m;
        a[0][0] * b[0][0].conj() + a[0][1] * b[0][1].conj() + a[1][0] * b[1][0].conj()
            + a[1][1] * b[1][1].conj()
    }

    /// `|Tr(self other^dagger)|^2`, equal to 4 when the two agree up to a global phase.
    pub fn overlap(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    /// Max-abs entry of `U U^dagger - I`.
    pub fn unitarity_deviation(&self) -> T {
        let p = *self * self.adjoint();
        let mut dev = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { T::one() } else { T::zero() };
                dev = dev.max((p.m[i][j] - c(target, T::zero())).norm());
            }
        }
        dev
    }

    /// Max-abs entry of `self - other`.
    pub fn distance(&self, other: &Self) -> T {
        let mut d = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    /// Projects back onto U(2), keeping the current determinant phase.
    ///
    /// Writes the matrix as `e^{i phi} [[a, b], [-b*, a*]]` and renormalizes `(a, b)`.
    pub fn reunitarize(&self) -> Self {
        let d = self.det();
        let half = Complex::from_polar(T::one(), d.arg() / lit(2.0));
        let s = self.scale(half.conj());
        let a = (s.m[0][0] + s.m[1][1].conj()) / lit::<T>(2.0);
        let b = (s.m[0][1] - s.m[1][0].conj()) / lit::<T>(2.0);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / norm, b / norm);
        Self {
            m: [[a, b], [-b.conj(), a.conj()]],
        }
        .scale(half)
    }

    /// Removes the global phase so that `det = 1` and `Re Tr >= 0`.
    pub fn to_special(&self) -> Self {
        let d = self.det();
        let half = Complex::from_polar(T::one(), d.arg() / lit(2.0));
        let s = self.scale(half.conj());
        if s.trace().re < T::zero() {
            s.scale(c(-T::one(), T::zero()))
        } else {
            s
        }
    }

    /// Canonical rotation angle in `[0, pi]` and unit axis.
    ///
    /// The global phase is removed first. At angle `pi` the axis sign is fixed by
    /// making its first nonzero component positive. Below `1e-9` rad the axis is `z`.
    pub fn axis_angle(&self) -> Result<AxisAngle<T>> {
        let dev = self.unitarity_deviation();
        if dev > lit(1e-6) || dev.is_nan() {
            return Err(Error::NotUnitary(to_f64(dev)));
        }
        Ok(self.axis_angle_unchecked())
    }

    pub(crate) fn axis_angle_unchecked(&self) -> AxisAngle<T> {
        let (cos_h, mut v) = self.half_angle_vector();
        let (mut cos_h, s) = (cos_h, (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
        if cos_h < T::zero() {
            cos_h = -cos_h;
            v = [-v[0], -v[1], -v[2]];
        }
        let angle = lit::<T>(2.0) * s.atan2(cos_h);
        if angle < lit(1e-9) || s == T::zero() {
            return AxisAngle {
                angle: T::zero(),
                axis: [T::zero(), T::zero(), T::one()],
            };
        }
        let mut axis = [v[0] / s, v[1] / s, v[2] / s];
        if cos_h.abs() < lit(1e-12) {
            let eps = lit(1e-12);
            let first = axis.iter().copied().find(|x| x.abs() > eps).unwrap_or(T::one());
            if first < T::zero() {
                axis = [-axis[0], -axis[1], -axis[2]];
            }
        }
        AxisAngle { angle, axis }
    }

    /// Returns `(cos(angle/2), sin(angle/2) n)` of the det-1 representative,
    /// without any sign canonicalization. Continuous along smooth paths that
    /// keep the determinant phase continuous.
    pub fn half_angle_vector(&self) -> (T, [T; 3]) {
        let d = self.det();
        let half = Complex::from_polar(T::one(), d.arg() / lit(2.0));
        let s = self.scale(half.conj());
        let a = (s.m[0][0] + s.m[1][1].conj()) / lit::<T>(2.0);
        let b = (s.m[0][1] - s.m[1][0].conj()) / lit::<T>(2.0);
        (a.re, [-b.im, -b.re, -a.im])
    }

    /// Matrix exponential `exp(-i H t)` of a Hermitian 2x2 `H = h0 I + h.sigma`.
    pub fn exp_hermitian(h0: T, h: [T; 3], t: T) -> Self {
        let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        let phase = Complex::from_polar(T::one(), -h0 * t);
        if norm == T::zero() {
            return Self::identity().scale(phase);
        }
        let axis = [h[0] / norm, h[1] / norm, h[2] / norm];
        Self::rotation(axis, lit::<T>(2.0) * norm * t).scale(phase)
    }

    /// Conjugation `R self R^dagger`.
    pub fn conjugate_by(&self, r: &Self) -> Self {
        *r * *self * r.adjoint()
    }
}

impl<T: Real> Mul for Su2<T> {
    type Output = Su2<T>;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        Su2 {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }
}

/// Minimal 3-vector helpers on `[T; 3]`.
pub mod vec3 {
    use crate::scalar::Real;

    pub fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn norm<T: Real>(a: [T; 3]) -> T {
        dot(a, a).sqrt()
    }

    pub fn scale<T: Real>(a: [T; 3], k: T) -> [T; 3] {
        [a[0] * k, a[1] * k, a[2] * k]
    }

    pub fn normalize<T: Real>(a: [T; 3]) -> [T; 3] {
        scale(a, T::one() / norm(a))
    }

    /// Angle between two vectors in radians.
    pub fn angle<T: Real>(a: [T; 3], b: [T; 3]) -> T {
        let cr = norm(cross(a, b));
        cr.atan2(dot(a, b))
    }
}
