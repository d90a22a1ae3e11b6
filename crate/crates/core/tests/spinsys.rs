// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use approx::assert_abs_diff_eq;
use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use spinreg::spinsys::{axis_angle, free_propagator, known_nucleus, precession_frame, Branch};
use spinreg::{HyperfineParams, Su2};

/// Eigen-splitting of `(wL + s A_par) Iz + s A_perp Ix`, kHz.
fn splitting(p: &HyperfineParams, s: f64) -> f64 {
    let z = p.larmor_scale * p.omega_l + s * p.a_par;
    let x = s * p.a_perp;
    let h = Matrix2::new(z / 2.0, x / 2.0, x / 2.0, -z / 2.0);
    let e = SymmetricEigen::new(h).eigenvalues;
    (e[0] - e[1]).abs()
}

#[test]
fn tabulated_nuclei_precess_at_measured_rates() {
    let (owner, p) = known_nucleus::<f64>("Nuc-1").unwrap();
    assert_eq!(owner, 1);
    let (wp, wm) = precession_frame(&p).unwrap().frequencies_khz();
    assert_abs_diff_eq!(wp, 458.0, epsilon = 2.0);
    assert_abs_diff_eq!(wm, 219.0, epsilon = 2.0);
    assert!(known_nucleus::<f64>("Nuc-7").is_none());
}

fn params() -> impl Strategy<Value = HyperfineParams> {
    (-400.0f64..400.0, 1.0f64..300.0, 50.0f64..300.0, 0.9f64..1.1).prop_map(|(a, b, l, s)| {
        HyperfineParams::with_scale(a, b, l, s).unwrap()
    })
}

/// `exp(-i omega t m.sigma / 2)` by matrix exponential.
fn expm(axis: [f64; 3], omega: f64, t: f64) -> Matrix2<C> {
    let i = C::i();
    let sigma = Matrix2::new(
        C::from(axis[2]),
        C::new(axis[0], -axis[1]),
        C::new(axis[0], axis[1]),
        C::from(-axis[2]),
    );
    (sigma * (-i * omega * t / 2.0)).exp()
}

proptest! {
    #[test]
    fn frequencies_match_eigen_splitting(p in params()) {
        prop_assume!(splitting(&p, 1.0) > 1e-3 && splitting(&p, -1.0) > 1e-3);
        let (wp, wm) = precession_frame(&p).unwrap().frequencies_khz();
        prop_assert!((wp - splitting(&p, 1.0)).abs() < 1e-9 * wp.max(1.0));
        prop_assert!((wm - splitting(&p, -1.0)).abs() < 1e-9 * wm.max(1.0));
    }

    #[test]
    fn free_propagator_matches_matrix_exponential(p in params(), t in 0.0f64..20.0) {
        let f = precession_frame(&p).unwrap();
        for b in [Branch::Plus, Branch::Minus] {
            let u = free_propagator(&f, b, t).unwrap();
            let m = expm(f.axis(b), f.omega(b), t);
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((u.m[r][c] - m[(r, c)]).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn free_propagator_is_a_semigroup(p in params(), t1 in 0.0f64..10.0, t2 in 0.0f64..10.0) {
        let f = precession_frame(&p).unwrap();
        for b in [Branch::Plus, Branch::Minus] {
            let lhs = free_propagator(&f, b, t2).unwrap() * free_propagator(&f, b, t1).unwrap();
            let rhs = free_propagator(&f, b, t1 + t2).unwrap();
            prop_assert!(lhs.distance(&rhs) < 1e-10);
        }
        prop_assert!(free_propagator(&f, Branch::Plus, -1.0).is_err());
    }

    #[test]
    fn axis_angle_round_trips(theta in 0.01f64..3.13, polar in 0.0f64..3.14, azim in -3.14f64..3.14) {
        let n = [polar.sin() * azim.cos(), polar.sin() * azim.sin(), polar.cos()];
        let aa = axis_angle(&Su2::rotation(n, theta)).unwrap();
        prop_assert!((aa.angle - theta).abs() < 1e-9);
        let rebuilt = Su2::rotation(aa.axis, aa.angle);
        prop_assert!(rebuilt.distance(&Su2::rotation(n, theta)) < 1e-9);
    }
}
