// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use spinreg::seqsim::*;
use spinreg::spinsys::{known_nucleus, precession_frame};
use spinreg::{HyperfineParams, PrecessionFrame, PulseSequence};

fn nucleus(name: &str) -> HyperfineParams {
    known_nucleus(name).unwrap().1
}

fn frame(name: &str) -> PrecessionFrame {
    precession_frame(&nucleus(name)).unwrap()
}

fn spacings() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..8.0, 2..12)
}

fn phased(sp: Vec<f64>, bits: u32) -> PulseSequence {
    let phases = (0..sp.len() - 1)
        .map(|k| if bits >> (k % 32) & 1 == 1 { PulsePhase::Y } else { PulsePhase::X })
        .collect();
    PulseSequence::with_phases(sp, phases).unwrap()
}

/// Midpoint-rule integral of `s1(t) s2(t)` on a fine grid; a sign is zero outside
/// its `(start, end)` span.
fn riemann_t_int(spans: [(f64, f64, &[f64], bool); 2], window: f64) -> f64 {
    let n = 200_000;
    let dt = window / n as f64;
    let sign = |(start, end, pulses, inv): (f64, f64, &[f64], bool), t: f64| {
        if t < start || t > end {
            return 0.0;
        }
        let s = if pulses.iter().filter(|&&p| p <= t).count() % 2 == 0 { 1.0 } else { -1.0 };
        if inv { -s } else { s }
    };
    (0..n).map(|k| (k as f64 + 0.5) * dt).map(|t| sign(spans[0], t) * sign(spans[1], t) * dt).sum()
}

#[test]
fn chevron_accumulates_the_per_block_angle() {
    let f = frame("Nuc-1");
    let res = quarter_turn_resonance(&f, DEFAULT_WINDOW).unwrap();
    let grid = [2, 4, 6, 8];
    let map = chevron_map(&f, &[res.tau0], &grid).unwrap();
    let mut prev = 0.0;
    for (row, &n) in map.iter().zip(&grid) {
        // n/2 XY-2 blocks, each a rotation by +-alpha0 about antiparallel axes.
        let k = (n / 2) as f64;
        let oracle = (k * res.alpha0 / 2.0).sin().powi(2);
        assert_abs_diff_eq!(row[0], oracle, epsilon = 1e-3);
        assert!(row[0] > prev);
        prev = row[0];
    }
    assert!(prev > 0.99);
}

#[test]
fn resonances_are_antiparallel() {
    for name in ["Nuc-1", "Nuc-2"] {
        let f = frame(name);
        let roots = cz_resonance_roots(&f, DEFAULT_WINDOW).unwrap();
        assert!(!roots.is_empty());
        for r in &roots {
            assert!(r.antiparallelity_deg < 0.5, "{name} {}", r.tau0);
        }
        let first = cz_resonance_tau(&f, DEFAULT_WINDOW).unwrap();
        assert_eq!(first.tau0, roots[0].tau0);
    }
}

#[test]
fn nuc1_operating_point() {
    let r = quarter_turn_resonance(&frame("Nuc-1"), DEFAULT_WINDOW).unwrap();
    assert_abs_diff_eq!(r.tau0, 6.208, epsilon = 0.02);
    assert_abs_diff_eq!(r.alpha0 / std::f64::consts::PI, 0.248, epsilon = 0.005);
}

#[test]
fn deer_trace_is_a_damped_cosine() {
    let t: Vec<f64> = (0..50).map(|k| 8.0 * k as f64).collect();
    let v = deer_trace(5.40, &t, Some(200.0)).unwrap();
    for (x, y) in t.iter().zip(&v) {
        let oracle = (std::f64::consts::TAU * 5.40e-3 * x).cos() * (-x / 200.0).exp();
        assert_abs_diff_eq!(*y, oracle, epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn propagators_compose_across_a_split(sp in spacings(), cut in 0usize..11) {
        let seq = PulseSequence::new(sp).unwrap();
        let i = cut % seq.n_pulses();
        let f = frame("Nuc-1");
        let (a, b) = seq.split_at_pulse(i).unwrap();
        let joined = conditional_propagators(&a, &f).then(&conditional_propagators(&b, &f), a.n_pulses());
        let whole = conditional_propagators(&seq, &f);
        prop_assert!(joined.v_plus.distance(&whole.v_plus) < 1e-10);
        prop_assert!(joined.v_minus.distance(&whole.v_minus) < 1e-10);
        prop_assert_eq!(a.concat(&b), seq);
    }

    #[test]
    fn contrast_ignores_pulse_phases(sp in spacings(), bits in any::<u32>()) {
        let nuclei = [nucleus("Nuc-1"), nucleus("Nuc-2")];
        let seq = phased(sp, bits);
        let a = eseem_contrast(&seq, &nuclei, None).unwrap();
        let b = eseem_contrast(&seq.with_swapped_phases(), &nuclei, None).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn contrast_is_bounded_by_the_envelope(sp in spacings(), t2 in 5.0f64..200.0, n in 0.5f64..3.0) {
        let nuclei = [nucleus("Nuc-1"), nucleus("Nuc-2"), nucleus("Nuc-3")];
        let seq = PulseSequence::new(sp).unwrap();
        let l = eseem_contrast(&seq, &nuclei, None).unwrap();
        prop_assert!(l.abs() <= 1.0 + 1e-12);
        let env = (-(seq.total_duration() / t2).powf(n)).exp();
        let with = eseem_contrast(&seq, &nuclei, Some((t2, n))).unwrap();
        prop_assert!(with.abs() <= env + 1e-12);
        prop_assert!((with - l * env).abs() < 1e-12);
    }

    #[test]
    fn deer_interaction_time_closed_form(n in 2usize..12, tau in 0.5f64..10.0, frac in 0.0f64..1.0) {
        let dtau = frac * tau;
        let pair = TogglingPair::deer(n, tau, dtau).unwrap();
        let t = effective_interaction_time(&pair).t_int;
        prop_assert!((t - 2.0 * (n as f64 - 1.0) * (tau - dtau)).abs() < 1e-9);
        let inv = effective_interaction_time(&pair.with_inverted_second()).t_int;
        prop_assert!((inv + t).abs() < 1e-12);
    }

    #[test]
    fn interaction_time_matches_brute_force(n1 in 1usize..6, tau1 in 0.5f64..4.0, n2 in 1usize..6, tau2 in 0.5f64..4.0, off in 0.0f64..5.0, invert in any::<bool>()) {
        let mut pair = TogglingPair::cz_ee(n1, tau1, n2, tau2, off).unwrap();
        if invert {
            pair = pair.with_inverted_second();
        }
        let p1: Vec<f64> = pair.first.seq.pulse_times().iter().map(|t| t + off).collect();
        let p2 = pair.second.seq.pulse_times();
        let t = effective_interaction_time(&pair).t_int;
        let oracle = riemann_t_int(
            [
                (pair.first.start, pair.first.end(), &p1, false),
                (pair.second.start, pair.second.end(), &p2, invert),
            ],
            pair.window,
        );
        prop_assert!((t - oracle).abs() < 1e-3, "t = {t}, oracle = {oracle}");
    }
}
