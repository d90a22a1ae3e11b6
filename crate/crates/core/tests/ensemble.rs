// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinreg::ensemble::*;
use spinreg::spinsys::known_nucleus;
use spinreg::Error;

const Z: [f64; 3] = [0.0, 0.0, 1.0];

#[test]
fn g_factor_from_splitting() {
    assert_abs_diff_eq!(DEFAULT_G_EFF, 7.78, epsilon = 0.01);
}

#[test]
fn magic_angle_vanishes() {
    let c = (1.0f64 / 3.0).sqrt();
    let s = (2.0f64 / 3.0).sqrt();
    let j = dipolar_j([30.0 * s, 0.0, 30.0 * c], DEFAULT_G_EFF, Z).unwrap();
    assert_abs_diff_eq!(j, 0.0, epsilon = 1e-12);
}

#[test]
fn inverse_cube_law_and_sign() {
    let a = dipolar_j([3.0, 4.0, 12.0], DEFAULT_G_EFF, Z).unwrap();
    let b = dipolar_j([6.0, 8.0, 24.0], DEFAULT_G_EFF, Z).unwrap();
    assert_relative_eq!(b, a / 8.0, max_relative = 1e-14);
    let on_axis = dipolar_j([0.0, 0.0, 40.0], DEFAULT_G_EFF, Z).unwrap();
    let in_plane = dipolar_j([40.0, 0.0, 0.0], DEFAULT_G_EFF, Z).unwrap();
    assert!(on_axis < 0.0 && in_plane > 0.0);
    assert_relative_eq!(on_axis, -2.0 * in_plane, max_relative = 1e-14);
}

#[test]
fn coupling_prefactor_by_hand() {
    // mu0/4pi g^2 muB^2 / h for the free electron is 52.04 MHz nm^3; J = prefactor (1 - 3cos^2)/2.
    let j = dipolar_j([10.0, 0.0, 0.0], 2.0023, Z).unwrap();
    assert_relative_eq!(j, 52.04e3 / 1000.0 / 2.0, max_relative = 1e-3);
}

#[test]
fn zero_separation_rejected() {
    assert!(matches!(dipolar_j([0.0; 3], DEFAULT_G_EFF, Z), Err(Error::ZeroSeparation)));
}

proptest! {
    #[test]
    fn dipolar_symmetries(x in -50.0f64..50.0, y in -50.0f64..50.0, z in -50.0f64..50.0, phi in 0.0f64..6.3) {
        prop_assume!(x * x + y * y + z * z > 1.0);
        let j = dipolar_j([x, y, z], DEFAULT_G_EFF, Z).unwrap();
        let jm = dipolar_j([-x, -y, -z], DEFAULT_G_EFF, Z).unwrap();
        let (c, s) = (phi.cos(), phi.sin());
        let jr = dipolar_j([c * x - s * y, s * x + c * y, z], DEFAULT_G_EFF, Z).unwrap();
        prop_assert!((j - jm).abs() <= 1e-12 * j.abs().max(1e-9));
        prop_assert!((j - jr).abs() <= 1e-10 * j.abs().max(1e-9));
    }
}

#[test]
fn distance_bound_scaling() {
    let a = distance_bounds(5.40, DEFAULT_G_EFF, DEFAULT_R_MIN_NM).unwrap();
    let b = distance_bounds(8.0 * 5.40, DEFAULT_G_EFF, DEFAULT_R_MIN_NM).unwrap();
    let c = distance_bounds(0.675, DEFAULT_G_EFF, DEFAULT_R_MIN_NM).unwrap();
    assert_relative_eq!(b.r_max, a.r_max / 2.0, max_relative = 1e-12);
    assert_relative_eq!(c.r_max, 2.0 * a.r_max, max_relative = 1e-12);
    assert_eq!(a.r_min, DEFAULT_R_MIN_NM);
    let j = dipolar_j([0.0, 0.0, a.r_max], DEFAULT_G_EFF, Z).unwrap();
    assert_relative_eq!(j.abs(), 5.40, max_relative = 1e-12);
    assert!(distance_bounds(0.0, DEFAULT_G_EFF, 10.0).is_err());
}

#[test]
fn isolated_ion_has_no_partner() {
    let m = ImplantModel { areal_density_cm2: 1.0, ..ImplantModel::default() };
    let (p, stats) = pair_statistics(&m, 1e-6, 1).unwrap();
    assert_eq!(p, 0.0);
    assert_eq!(stats.max_j_khz, vec![0.0]);
}

#[test]
fn box_must_hold_the_cutoff() {
    let m = ImplantModel::default();
    assert!(matches!(pair_statistics(&m, 5.4, 3), Err(Error::BoxTooSmall { .. })));
}

#[test]
fn deterministic_under_seed() {
    let m = ImplantModel::default();
    let a = pair_statistics(&m, 5.4, 5000).unwrap();
    let b = pair_statistics(&m, 5.4, 5000).unwrap();
    assert_eq!(a, b);
    let c = pair_statistics(&ImplantModel { seed: 7, ..m }, 5.4, 5000).unwrap();
    assert_ne!(a.1, c.1);
}

/// All-pairs minimum-image search with the same sampling stream.
fn brute_force(m: &ImplantModel, n: usize) -> Vec<f64> {
    let side = m.box_side(n);
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    let pos: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            [
                rng.random::<f64>() * side,
                rng.random::<f64>() * side,
                rng.random::<f64>() * m.layer_thickness_nm,
            ]
        })
        .collect();
    let mut out: Vec<f64> = pos
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut best = 0.0f64;
            for (k, q) in pos.iter().enumerate() {
                if k == i {
                    continue;
                }
                let mut r = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                for d in r.iter_mut().take(2) {
                    if *d > side / 2.0 {
                        *d -= side;
                    } else if *d < -side / 2.0 {
                        *d += side;
                    }
                }
                if (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt() <= m.cutoff_nm {
                    best = best.max(dipolar_j(r, m.g_eff, m.field_axis).unwrap().abs());
                }
            }
            best
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

#[test]
fn cell_list_matches_all_pairs() {
    for (n, seed) in [(1500usize, 3u64), (40, 4)] {
        let m = ImplantModel { seed, ..ImplantModel::default() };
        let (_, stats) = pair_statistics(&m, 5.4, n).unwrap();
        let oracle = brute_force(&m, n);
        assert_eq!(stats.max_j_khz.len(), oracle.len());
        for (a, b) in stats.max_j_khz.iter().zip(&oracle) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }
}

#[test]
fn statistics_are_monotone() {
    let n = 20_000;
    let sigma = |p: f64| (p * (1.0 - p) / n as f64).sqrt();
    let base = ImplantModel::default();
    let (_, stats) = pair_statistics(&base, 5.4, n).unwrap();
    let p: Vec<f64> = [1.0, 5.4, 20.0].iter().map(|&t| stats.fraction_above(t)).collect();
    assert!(p[0] >= p[1] && p[1] >= p[2]);
    let q: Vec<f64> = [2e9, 5e9, 1.2e10]
        .iter()
        .map(|&d| pair_statistics(&ImplantModel { areal_density_cm2: d, ..base }, 5.4, n).unwrap().0)
        .collect();
    assert!(q[1] >= q[0] - 3.0 * sigma(q[0]) && q[2] >= q[1] - 3.0 * sigma(q[1]), "{q:?}");
}

#[test]
fn cdf_and_quantiles() {
    let (_, stats) = pair_statistics(&ImplantModel::default(), 5.4, 5000).unwrap();
    let mut last = 0.0;
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 50.0, 1e9] {
        let c = stats.cdf(t);
        assert!((0.0..=1.0).contains(&c) && c >= last);
        last = c;
    }
    let med = stats.quantile(0.5).unwrap();
    assert_abs_diff_eq!(stats.cdf(med), 0.5, epsilon = 1e-3);
    assert!(stats.quantile(1.5).is_none());
}

#[test]
fn dephasing_ratios() {
    let (_, n1) = known_nucleus::<f64>("Nuc-1").unwrap();
    let (_, n3) = known_nucleus::<f64>("Nuc-3").unwrap();
    assert_relative_eq!(dephasing_ratio(&n1, 8600.0).unwrap(), 8.6e6 / 287f64.hypot(163.0), max_relative = 1e-14);
    assert_relative_eq!(dephasing_ratio(&n1, 8600.0).unwrap(), 2.6e4, max_relative = 0.1);
    assert_relative_eq!(dephasing_ratio(&n3, 8600.0).unwrap(), 5.95e4, max_relative = 0.01);
    let unit = spinreg::HyperfineParams::new(600.0, 800.0, 142.0).unwrap();
    assert_relative_eq!(dephasing_ratio(&unit, 1.0).unwrap(), 1.0, max_relative = 1e-14);
}
