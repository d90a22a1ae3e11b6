// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use spinreg::circuits::*;
use spinreg::Error;

#[test]
fn budgets_at_measured_contrasts() {
    let b = NoiseBudget::default();
    let v = |k| fidelity_budget(&b, k).unwrap();
    // Direct products of the contrast factors.
    let c = 0.87 * 0.86;
    assert_abs_diff_eq!(v(CircuitKind::BellEe).fidelity, (1.0 + 3.0 * c) / 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(v(CircuitKind::BellEe).fidelity, 0.81, epsilon = 0.005);
    assert_abs_diff_eq!(v(CircuitKind::RemoteReadout).fidelity, 0.89, epsilon = 0.005);
    assert_abs_diff_eq!(v(CircuitKind::SwapSquared).fidelity, 0.830, epsilon = 0.005);
    let en = v(CircuitKind::BellEn);
    assert_abs_diff_eq!(en.zz.unwrap(), 0.455, epsilon = 0.005);
    assert_abs_diff_eq!(en.xx.unwrap(), 0.398, epsilon = 0.005);
    assert_abs_diff_eq!(en.fidelity, 0.56, epsilon = 0.005);
}

#[test]
fn ideal_budget_is_perfect() {
    let b = NoiseBudget::ideal();
    for k in [CircuitKind::BellEe, CircuitKind::RemoteReadout, CircuitKind::SwapSquared, CircuitKind::BellEn] {
        assert_abs_diff_eq!(fidelity_budget(&b, k).unwrap().fidelity, 1.0, epsilon = 1e-15);
    }
}

#[test]
fn budget_rejects_bad_contrast() {
    let b = NoiseBudget { p_cz: 1.2, ..NoiseBudget::default() };
    assert!(matches!(fidelity_budget(&b, CircuitKind::BellEn), Err(Error::InvalidParameter { .. })));
}

proptest! {
    #[test]
    fn budget_is_monotone(
        p in proptest::array::uniform4(0.0f64..1.0),
        bump in 0.0f64..0.2,
        which in 0usize..4,
    ) {
        let base = NoiseBudget { p_xy6_er1: p[0], p_xy8_er2: p[1], p_cz: p[2], p_cx: p[3], ..NoiseBudget::default() };
        let mut up = base;
        let slot = match which { 0 => &mut up.p_xy6_er1, 1 => &mut up.p_xy8_er2, 2 => &mut up.p_cz, _ => &mut up.p_cx };
        *slot = (*slot + bump).min(1.0);
        for k in [CircuitKind::BellEe, CircuitKind::RemoteReadout, CircuitKind::SwapSquared, CircuitKind::BellEn] {
            let a = fidelity_budget(&base, k).unwrap().fidelity;
            let b = fidelity_budget(&up, k).unwrap().fidelity;
            prop_assert!(b >= a - 1e-15);
        }
    }
}

#[test]
fn readout_correction() {
    let c = readout_correct(0.3, &[1.0]).unwrap();
    assert_eq!(c, Corrected { value: 0.3, clamped: false });
    let c = readout_correct(0.9, &[0.9, 0.9]).unwrap();
    assert_eq!(c, Corrected { value: 1.0, clamped: true });
    assert!(matches!(readout_correct(0.1, &[0.5]), Err(Error::FidelityTooLow { .. })));
    let f = readout_correct_bell(0.66, &[0.95, 0.94]).unwrap();
    assert_abs_diff_eq!(f.value, 0.76, epsilon = 0.01);
}

fn model(p_err: f64, f_read: f64) -> QndModel {
    QndModel { p_err, f_read, gate_contrast: None }
}

#[test]
fn qnd_trivial_limit() {
    for policy in [QndPolicy::PerRound(2), QndPolicy::PostSelect, QndPolicy::Majority] {
        let r = qnd_analysis(4, &model(0.0, 1.0), policy).unwrap();
        assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.acceptance, 1.0, epsilon = 1e-15);
    }
}

#[test]
fn qnd_post_selection_with_gate_contrast() {
    let m = QndModel { p_err: 0.08, f_read: 0.94, gate_contrast: Some(0.87) };
    let r = qnd_analysis(3, &m, QndPolicy::PostSelect).unwrap();
    assert_abs_diff_eq!(r.fidelity, 0.98, epsilon = 0.02);
    assert_abs_diff_eq!(r.acceptance, 0.66, epsilon = 0.05);
    let first = qnd_analysis(3, &m, QndPolicy::PerRound(1)).unwrap();
    assert!((0.88..=0.895).contains(&first.fidelity), "{first:?}");
}

#[test]
fn qnd_post_selection_small_case_by_hand() {
    // Two rounds: P(00) = f (1-p) f + f p (1-f); P(11) = (1-f)(1-p)(1-f) + (1-f) p f.
    let (p, f) = (0.1, 0.9);
    let p00 = f * ((1.0 - p) * f + p * (1.0 - f));
    let p11 = (1.0 - f) * ((1.0 - p) * (1.0 - f) + p * f);
    let r = qnd_analysis(2, &model(p, f), QndPolicy::PostSelect).unwrap();
    assert_abs_diff_eq!(r.acceptance, p00 + p11, epsilon = 1e-15);
    assert_abs_diff_eq!(r.fidelity, p00 / (p00 + p11), epsilon = 1e-15);
}

#[test]
fn qnd_majority_ties_are_half() {
    let r = qnd_analysis(2, &model(0.0, 0.8), QndPolicy::Majority).unwrap();
    assert_abs_diff_eq!(r.fidelity, 0.64 + 0.5 * 0.32, epsilon = 1e-15);
}

#[test]
fn qnd_rejects_large_rounds() {
    assert!(matches!(qnd_analysis(21, &model(0.1, 0.9), QndPolicy::Majority), Err(Error::RoundsTooLarge(21))));
    assert!(qnd_analysis(0, &model(0.1, 0.9), QndPolicy::Majority).is_err());
    assert!(qnd_analysis(3, &model(0.1, 0.9), QndPolicy::PerRound(4)).is_err());
}

proptest! {
    #[test]
    fn per_round_decays_geometrically(p in 0.0f64..0.5, rounds in 2usize..8) {
        let m = model(p, 1.0);
        let c = |k| 2.0 * qnd_analysis(rounds, &m, QndPolicy::PerRound(k)).unwrap().fidelity - 1.0;
        for k in 1..rounds {
            prop_assert!((c(k + 1) - c(k) * (1.0 - 2.0 * p)).abs() < 1e-12);
        }
    }
}

#[test]
fn t1_limit() {
    assert_abs_diff_eq!(t1_limited_fidelity(1, 0.01, 2.5).unwrap(), 1.0);
    assert_abs_diff_eq!(t1_limited_fidelity(11, 0.25, 2.5).unwrap(), 0.5 * (1.0 + (-1.0f64).exp()), epsilon = 1e-15);
    assert!(t1_limited_fidelity(2, 0.1, 0.0).is_err());
}
