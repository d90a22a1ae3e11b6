// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Inter-pulse spacings at which XY-2 produces antiparallel conditional rotations.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::seqsim::propagate::{conditional_decompose, conditional_propagators, Decomposition};
use crate::seqsim::sequence::PulseSequence;
use crate::spinsys::PrecessionFrame;
use crate::su2::{vec3, Su2};

/// Default search window for the resonance solver, us.
pub const DEFAULT_WINDOW: (f64, f64) = (0.5, 20.0);

const SCAN_POINTS: usize = 2000;
const BISECT_TOL_US: f64 = 1e-9;
const MAX_ANTIPARALLELITY_DEG: f64 = 0.5;

/// The nuclear quantization axis `z'` and the rotation taking `z` onto it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZPrimeFrame<T: Real> {
    pub axis: [T; 3],
    /// `R` with `R Z R^dagger = z'.sigma`.
    pub rotation: Su2<T>,
}

impl<T: Real> ZPrimeFrame<T> {
    /// Frame for a given axis; the sign is fixed so that `axis.z >= 0`, then `axis.x >= 0`.
    pub fn from_axis(axis: [T; 3]) -> Self {
        let mut a = vec3::normalize(axis);
        let flip = a[2] < T::zero() || (a[2] == T::zero() && a[0] < T::zero());
        if flip {
            a = vec3::scale(a, -T::one());
        }
        let z = [T::zero(), T::zero(), T::one()];
        let c = vec3::cross(z, a);
        let s = vec3::norm(c);
        let rotation = if s < lit(1e-15) {
            Su2::identity()
        } else {
            Su2::rotation(vec3::scale(c, T::one() / s), s.atan2(a[2]))
        };
        Self { axis: a, rotation }
    }

    pub fn lab() -> Self {
        Self::from_axis([T::zero(), T::zero(), T::one()])
    }

    pub fn pauli_x(&self) -> Su2<T> {
        Su2::pauli_x().conjugate_by(&self.rotation)
    }

    pub fn pauli_y(&self) -> Su2<T> {
        Su2::pauli_y().conjugate_by(&self.rotation)
    }

    pub fn pauli_z(&self) -> Su2<T> {
        Su2::pauli_z().conjugate_by(&self.rotation)
    }

    /// Expresses a lab-frame operator in the primed basis, `R^dagger U R`.
    pub fn to_primed(&self, u: &Su2<T>) -> Su2<T> {
        self.rotation.adjoint() * *u * self.rotation
    }
}

/// A validated CZ resonance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resonance<T: Real> {
    pub tau0: T,
    /// Rotation angle per XY-2 block, rad.
    pub alpha0: T,
    pub antiparallelity_deg: T,
    pub zprime: ZPrimeFrame<T>,
}

fn xy2<T: Real>(tau: T) -> PulseSequence<T> {
    PulseSequence::new(vec![tau, lit::<T>(2.0) * tau, tau]).expect("positive spacing")
}

/// Signed antiparallelity function: component of `n+ x n-` normal to the plane of `m+`, `m-`,
/// with `n = sin(alpha/2) q` taken without sign canonicalization.
fn signed_cross<T: Real>(frame: &PrecessionFrame<T>, normal: [T; 3], tau: T) -> T {
    let cp = conditional_propagators(&xy2(tau), frame);
    let (_, np) = cp.v_plus.half_angle_vector();
    let (_, nm) = cp.v_minus.half_angle_vector();
    vec3::dot(vec3::cross(np, nm), normal)
}

/// Closed-form bracketing seed: `cot(w+ tau/2) cot(w- tau/2) - m+.m-`.
fn closed_form_seed<T: Real>(frame: &PrecessionFrame<T>, tau: T) -> T {
    let h = lit::<T>(0.5);
    let a = (frame.omega_plus * tau * h).tan();
    let b = (frame.omega_minus * tau * h).tan();
    T::one() / (a * b) - vec3::dot(frame.m_plus, frame.m_minus)
}

fn decompose_at<T: Real>(frame: &PrecessionFrame<T>, tau: T) -> Decomposition<T> {
    conditional_decompose(&conditional_propagators(&xy2(tau), frame))
}

fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let mut flo = f(lo);
    for _ in 0..200 {
        if hi - lo < lit(BISECT_TOL_US) {
            break;
        }
        let mid = (lo + hi) * lit(0.5);
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * lit(0.5)
}

/// Every validated resonance in the window, in increasing order.
pub fn cz_resonance_roots<T: Real>(
    frame: &PrecessionFrame<T>,
    window: (T, T),
) -> Result<Vec<Resonance<T>>> {
    let (lo, hi) = window;
    if !(lo > T::zero() && hi > lo) {
        return Err(Error::InvalidParameter {
            field: "search_window",
            reason: format!("need 0 < lo < hi, got ({lo}, {hi})"),
        });
    }
    let normal = vec3::cross(frame.m_plus, frame.m_minus);
    if vec3::norm(normal) < lit(1e-12) {
        return Err(Error::NoEntanglingAxis);
    }
    let normal = vec3::normalize(normal);
    let g = |t: T| signed_cross(frame, normal, t);

    let step = (hi - lo) / lit((SCAN_POINTS - 1) as f64);
    let grid: Vec<T> = (0..SCAN_POINTS).map(|i| lo + step * lit(i as f64)).collect();
    let mut brackets: Vec<(T, T)> = Vec::new();
    let mut prev = g(grid[0]);
    for w in grid.windows(2) {
        let cur = g(w[1]);
        if (prev < T::zero()) != (cur < T::zero()) || cur == T::zero() {
            brackets.push((w[0], w[1]));
        }
        prev = cur;
    }
    // Closed-form seeds catch pairs of roots closer than the grid step.
    let fine = step / lit(8.0);
    let mut prev_seed = closed_form_seed(frame, grid[0]);
    for w in grid.windows(2) {
        let cur = closed_form_seed(frame, w[1]);
        if prev_seed.is_finite() && cur.is_finite() && (prev_seed < T::zero()) != (cur < T::zero()) {
            let mut t = w[0];
            while t < w[1] {
                let t2 = (t + fine).min(w[1]);
                if (g(t) < T::zero()) != (g(t2) < T::zero()) {
                    brackets.push((t, t2));
                }
                t = t2;
            }
        }
        prev_seed = cur;
    }

    let mut roots: Vec<Resonance<T>> = Vec::new();
    for (a, b) in brackets {
        let tau = bisect(g, a, b);
        if roots.iter().any(|r| (r.tau0 - tau).abs() < lit(1e-6)) {
            continue;
        }
        let d = decompose_at(frame, tau);
        if d.degenerate || d.antiparallelity_deg >= lit(MAX_ANTIPARALLELITY_DEG) {
            continue;
        }
        roots.push(Resonance {
            tau0: tau,
            alpha0: d.alpha_plus,
            antiparallelity_deg: d.antiparallelity_deg,
            zprime: ZPrimeFrame::from_axis(d.q_plus),
        });
    }
    roots.sort_by(|x, y| x.tau0.partial_cmp(&y.tau0).expect("finite roots"));
    Ok(roots)
}

/// Smallest validated resonance in the window.
pub fn cz_resonance_tau<T: Real>(frame: &PrecessionFrame<T>, window: (T, T)) -> Result<Resonance<T>> {
    cz_resonance_roots(frame, window)?
        .into_iter()
        .next()
        .ok_or(Error::NoRootInWindow { lo: to_f64(window.0), hi: to_f64(window.1) })
}

/// Resonance whose per-XY-2 angle is closest to `pi/4`, so that XY-4 gives a
/// conditional `pi/2` rotation (the CZ operating point).
pub fn quarter_turn_resonance<T: Real>(
    frame: &PrecessionFrame<T>,
    window: (T, T),
) -> Result<Resonance<T>> {
    let quarter = T::FRAC_PI_4();
    cz_resonance_roots(frame, window)?
        .into_iter()
        .min_by(|a, b| {
            let da = (a.alpha0 - quarter).abs();
            let db = (b.alpha0 - quarter).abs();
            da.partial_cmp(&db).expect("finite angles")
        })
        .ok_or(Error::NoRootInWindow { lo: to_f64(window.0), hi: to_f64(window.1) })
}
