// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Toggling-frame bookkeeping for two electrons under independent pi-pulse trains.

use crate::error::{invalid, Result};
use crate::scalar::{lit, Real};
use crate::seqsim::sequence::{NamedSequence, PulseSequence};

/// Pulses closer than this (us) are reported as overlapping.
const OVERLAP_US: f64 = 1e-3;

/// A pulse sequence placed at an absolute start time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedSequence<T: Real> {
    pub seq: PulseSequence<T>,
    pub start: T,
    /// Starts the toggling sign at -1 instead of +1.
    pub inverted: bool,
}

impl<T: Real> TimedSequence<T> {
    pub fn new(seq: PulseSequence<T>, start: T) -> Self {
        Self { seq, start, inverted: false }
    }

    pub fn end(&self) -> T {
        self.start + self.seq.total_duration()
    }

    fn pulse_times(&self) -> Vec<T> {
        self.seq.pulse_times().into_iter().map(|t| t + self.start).collect()
    }

    /// Toggling sign at `t`, zero outside the sequence span.
    fn sign_at(&self, pulses: &[T], t: T) -> T {
        if t < self.start || t > self.end() {
            return T::zero();
        }
        let flips = pulses.partition_point(|&p| p <= t);
        let s = if flips % 2 == 0 { T::one() } else { -T::one() };
        if self.inverted {
            -s
        } else {
            s
        }
    }
}

/// Two electrons' pulse trains within a common window starting at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TogglingPair<T: Real> {
    pub first: TimedSequence<T>,
    pub second: TimedSequence<T>,
    pub window: T,
}

impl<T: Real> TogglingPair<T> {
    /// Window spans from zero to the later of the two sequence ends.
    pub fn new(first: TimedSequence<T>, second: TimedSequence<T>) -> Result<Self> {
        let window = first.end().max(second.end());
        Self::with_window(first, second, window)
    }

    pub fn with_window(first: TimedSequence<T>, second: TimedSequence<T>, window: T) -> Result<Self> {
        for s in [&first, &second] {
            if s.start < T::zero() || s.end() > window + lit(1e-12) {
                return Err(invalid(
                    "window",
                    format!("sequence [{}, {}] not inside [0, {window}]", s.start, s.end()),
                ));
            }
        }
        Ok(Self { first, second, window })
    }

    /// DEER geometry: XY-N on the first electron with pulses at `(2k-1) tau`, and
    /// `N-1` pulses on the second electron, each delayed by `dtau` in `[0, tau]`.
    pub fn deer(n: usize, tau: T, dtau: T) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n_pulses", "DEER geometry needs at least 2 pulses"));
        }
        if !(dtau >= T::zero() && dtau <= tau) {
            return Err(invalid("dtau", format!("must lie in [0, tau], got {dtau}")));
        }
        let two = lit::<T>(2.0);
        let first = NamedSequence::xy(n, tau).to_sequence()?;
        let mut spacings = vec![tau + dtau];
        spacings.extend(std::iter::repeat(two * tau).take(n - 2));
        spacings.push(lit::<T>(3.0) * tau - dtau);
        let second = PulseSequence::new(spacings)?;
        Self::new(TimedSequence::new(first, T::zero()), TimedSequence::new(second, T::zero()))
    }

    /// Electron-electron CZ geometry: XY-`n1` (half-spacing `tau1`) on the first
    /// electron delayed by `offset`, XY-`n2` (half-spacing `tau2`) on the second from zero.
    pub fn cz_ee(n1: usize, tau1: T, n2: usize, tau2: T, offset: T) -> Result<Self> {
        let first = NamedSequence::xy(n1, tau1).to_sequence()?;
        let second = NamedSequence::xy(n2, tau2).to_sequence()?;
        Self::new(TimedSequence::new(first, offset), TimedSequence::new(second, T::zero()))
    }

    pub fn with_inverted_second(&self) -> Self {
        let mut p = self.clone();
        p.second.inverted = !p.second.inverted;
        p
    }
}

/// Integrated toggling-sign product and a flag for near-coincident pulses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractionTime<T> {
    pub t_int: T,
    pub overlapping_pulses: bool,
}

/// `T_int = integral of s1(t) s2(t) dt` over the window, evaluated piecewise.
pub fn effective_interaction_time<T: Real>(pair: &TogglingPair<T>) -> InteractionTime<T> {
    let p1 = pair.first.pulse_times();
    let p2 = pair.second.pulse_times();
    let tol = lit(OVERLAP_US);
    let overlapping_pulses = p1.iter().any(|&a| {
        let i = p2.partition_point(|&b| b < a - tol);
        i < p2.len() && (p2[i] - a).abs() <= tol
    });

    let mut events: Vec<T> = Vec::with_capacity(p1.len() + p2.len() + 6);
    events.extend([T::zero(), pair.window]);
    events.extend([pair.first.start, pair.first.end(), pair.second.start, pair.second.end()]);
    events.extend(p1.iter().copied());
    events.extend(p2.iter().copied());
    events.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    events.dedup();

    let mut t_int = T::zero();
    for w in events.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = (a + b) * lit(0.5);
        let s = pair.first.sign_at(&p1, mid) * pair.second.sign_at(&p2, mid);
        t_int += s * (b - a);
    }
    InteractionTime { t_int, overlapping_pulses }
}

/// Finds the start offset of `first` in `bracket` at which `T_int` equals `target`.
pub fn calibrate_offset<T: Real>(
    first: &PulseSequence<T>,
    second: &TimedSequence<T>,
    target: T,
    bracket: (T, T),
) -> Result<T> {
    let f = |off: T| -> Result<T> {
        let pair = TogglingPair::new(TimedSequence::new(first.clone(), off), second.clone())?;
        Ok(effective_interaction_time(&pair).t_int - target)
    };
    let (mut lo, mut hi) = bracket;
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if (flo < T::zero()) == (fhi < T::zero()) {
        return Err(invalid(
            "offset bracket",
            format!("T_int - target does not change sign on [{lo}, {hi}]"),
        ));
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        let fm = f(mid)?;
        if fm == T::zero() || hi - lo < lit(1e-12) {
            return Ok(mid);
        }
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deer_matches_closed_form() {
        for &(n, tau, dtau) in &[(64usize, 6.2f64, 1.3f64), (8, 3.0, 0.5), (2, 5.0, 0.7), (5, 2.0, 0.0)] {
            let pair = TogglingPair::deer(n, tau, dtau).unwrap();
            let t = effective_interaction_time(&pair).t_int;
            let expect = 2.0 * (n as f64 - 1.0) * (tau - dtau);
            assert!((t - expect).abs() < 1e-9, "{n} {t} {expect}");
        }
    }

    #[test]
    fn deer_with_full_delay_vanishes() {
        let pair = TogglingPair::deer(16, 4.0f64, 4.0).unwrap();
        let r = effective_interaction_time(&pair);
        assert!(r.t_int.abs() < 1e-9);
        assert!(!r.overlapping_pulses);
    }

    #[test]
    fn coincident_pulses_are_flagged() {
        let pair = TogglingPair::deer(8, 4.0f64, 0.0005).unwrap();
        assert!(effective_interaction_time(&pair).overlapping_pulses);
    }

    #[test]
    fn inverting_second_negates() {
        let pair = TogglingPair::cz_ee(6, 6.220, 8, 6.208, 2.3).unwrap();
        let a = effective_interaction_time(&pair).t_int;
        let b = effective_interaction_time(&pair.with_inverted_second()).t_int;
        assert_eq!(a, -b);
    }

    #[test]
    fn cz_ee_geometry_gives_quarter_coupling_period() {
        let pair = TogglingPair::cz_ee(6, 6.220f64, 8, 6.208, 2.3).unwrap();
        let t = effective_interaction_time(&pair).t_int;
        let target = 1000.0 / (4.0 * 5.40);
        assert!(((t - target) / target).abs() < 0.02, "{t}");
    }

    #[test]
    fn calibrated_offset_hits_target() {
        let first = NamedSequence::xy(6, 6.220f64).to_sequence().unwrap();
        let second =
            TimedSequence::new(NamedSequence::xy(8, 6.208).to_sequence().unwrap(), 0.0);
        let target = 1000.0 / (4.0 * 5.40);
        let off = calibrate_offset(&first, &second, target, (1.5, 3.0)).unwrap();
        let pair = TogglingPair::new(TimedSequence::new(first, off), second).unwrap();
        assert!((effective_interaction_time(&pair).t_int - target).abs() < 1e-9);
    }

    #[test]
    fn sequence_outside_window_rejected() {
        let s = PulseSequence::new(vec![1.0, 1.0]).unwrap();
        let r = TogglingPair::with_window(
            TimedSequence::new(s.clone(), 0.0),
            TimedSequence::new(s, 1.0),
            2.5,
        );
        assert!(r.is_err());
    }
}
