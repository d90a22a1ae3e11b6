// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{lit, Real};

/// Phase label of a pi pulse. Nuclear evolution does not depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulsePhase {
    X,
    Y,
}

impl PulsePhase {
    pub fn swapped(self) -> Self {
        match self {
            PulsePhase::X => PulsePhase::Y,
            PulsePhase::Y => PulsePhase::X,
        }
    }
}

/// Spacings `tau_1 .. tau_{N+1}` (us) around `N` instantaneous pi pulses.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence<T: Real> {
    spacings: Vec<T>,
    phases: Vec<PulsePhase>,
}

impl<T: Real> PulseSequence<T> {
    /// Sequence with all pulses labelled `X`.
    pub fn new(spacings: Vec<T>) -> Result<Self> {
        let n = spacings.len().saturating_sub(1);
        Self::with_phases(spacings, vec![PulsePhase::X; n])
    }

    pub fn with_phases(spacings: Vec<T>, phases: Vec<PulsePhase>) -> Result<Self> {
        if spacings.is_empty() {
            return Err(invalid("spacings", "need at least one spacing"));
        }
        if phases.len() + 1 != spacings.len() {
            return Err(invalid(
                "phases",
                format!("{} phases for {} spacings", phases.len(), spacings.len()),
            ));
        }
        if let Some(bad) = spacings.iter().find(|t| !(**t >= T::zero()) || !t.is_finite()) {
            return Err(invalid("spacings", format!("spacing {bad} is negative or not finite")));
        }
        Ok(Self { spacings, phases })
    }

    /// Free evolution for `t` with no pulses.
    pub fn free(t: T) -> Result<Self> {
        Self::new(vec![t])
    }

    pub fn spacings(&self) -> &[T] {
        &self.spacings
    }

    pub fn phases(&self) -> &[PulsePhase] {
        &self.phases
    }

    pub fn n_pulses(&self) -> usize {
        self.phases.len()
    }

    pub fn total_duration(&self) -> T {
        self.spacings.iter().fold(T::zero(), |a, &b| a + b)
    }

    /// `sum_k (-1)^k tau_k` with `k` counted from zero.
    pub fn static_residual(&self) -> T {
        static_residual_of(&self.spacings)
    }

    /// Pulse times measured from the sequence start.
    pub fn pulse_times(&self) -> Vec<T> {
        let mut t = T::zero();
        self.spacings[..self.n_pulses()]
            .iter()
            .map(|&s| {
                t += s;
                t
            })
            .collect()
    }

    /// Splits at pulse `i` (0-based): the first part ends just before that pulse,
    /// the second starts with a zero-length window followed by it.
    pub fn split_at_pulse(&self, i: usize) -> Result<(Self, Self)> {
        if i >= self.n_pulses() {
            return Err(invalid("pulse index", format!("{i} out of range")));
        }
        let first = Self::with_phases(self.spacings[..=i].to_vec(), self.phases[..i].to_vec())?;
        let mut rest = vec![T::zero()];
        rest.extend_from_slice(&self.spacings[i + 1..]);
        let second = Self::with_phases(rest, self.phases[i..].to_vec())?;
        Ok((first, second))
    }

    pub fn with_swapped_phases(&self) -> Self {
        Self {
            spacings: self.spacings.clone(),
            phases: self.phases.iter().map(|p| p.swapped()).collect(),
        }
    }

    /// Concatenates two sequences back-to-back, merging the touching windows.
    pub fn concat(&self, other: &Self) -> Self {
        let mut spacings = self.spacings.clone();
        let last = spacings.len() - 1;
        spacings[last] += other.spacings[0];
        spacings.extend_from_slice(&other.spacings[1..]);
        let mut phases = self.phases.clone();
        phases.extend_from_slice(&other.phases);
        Self { spacings, phases }
    }
}

pub fn static_residual_of<T: Real>(spacings: &[T]) -> T {
    spacings
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, &t)| if k % 2 == 0 { acc + t } else { acc - t })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceFamily {
    Hahn,
    Xy2,
    Xy4,
    Xy8,
    XyN,
    Cpmg,
}

/// An evenly spaced decoupling sequence `tau, 2 tau, ..., 2 tau, tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedSequence<T> {
    pub family: SequenceFamily,
    /// Half-spacing in us.
    pub tau: T,
    pub n_pulses: usize,
}

impl<T: Real> NamedSequence<T> {
    pub fn hahn(tau: T) -> Self {
        Self { family: SequenceFamily::Hahn, tau, n_pulses: 1 }
    }

    pub fn xy(n_pulses: usize, tau: T) -> Self {
        let family = match n_pulses {
            2 => SequenceFamily::Xy2,
            4 => SequenceFamily::Xy4,
            8 => SequenceFamily::Xy8,
            _ => SequenceFamily::XyN,
        };
        Self { family, tau, n_pulses }
    }

    pub fn cpmg(n_pulses: usize, tau: T) -> Self {
        Self { family: SequenceFamily::Cpmg, tau, n_pulses }
    }

    fn expected_pulses(&self) -> Option<usize> {
        match self.family {
            SequenceFamily::Hahn => Some(1),
            SequenceFamily::Xy2 => Some(2),
            SequenceFamily::Xy4 => Some(4),
            SequenceFamily::Xy8 => Some(8),
            SequenceFamily::XyN | SequenceFamily::Cpmg => None,
        }
    }

    /// Pulse phases: XY-8 blocks when the count is a multiple of 8, otherwise
    /// alternating X/Y; CPMG and Hahn use X only.
    pub fn phases(&self) -> Vec<PulsePhase> {
        use PulsePhase::{X, Y};
        let n = self.n_pulses;
        match self.family {
            SequenceFamily::Hahn | SequenceFamily::Cpmg => vec![X; n],
            _ if n % 8 == 0 => {
                let block = [X, Y, X, Y, Y, X, Y, X];
                (0..n).map(|k| block[k % 8]).collect()
            }
            _ => (0..n).map(|k| if k % 2 == 0 { X } else { Y }).collect(),
        }
    }

    pub fn to_sequence(&self) -> Result<PulseSequence<T>> {
        if let Some(n) = self.expected_pulses() {
            if n != self.n_pulses {
                return Err(invalid("n_pulses", format!("{:?} has {n} pulses", self.family)));
            }
        }
        if !(self.tau >= T::zero()) {
            return Err(invalid("tau", format!("must be >= 0, got {}", self.tau)));
        }
        let n = self.n_pulses;
        let spacings = if n == 0 {
            vec![lit::<T>(2.0) * self.tau]
        } else {
            let mut s = vec![lit::<T>(2.0) * self.tau; n + 1];
            s[0] = self.tau;
            s[n] = self.tau;
            s
        };
        PulseSequence::with_phases(spacings, self.phases())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xy8_layout() {
        let s = NamedSequence::xy(8, 6.208f64).to_sequence().unwrap();
        assert_eq!(s.n_pulses(), 8);
        assert!((s.total_duration() - 16.0 * 6.208).abs() < 1e-12);
        assert_eq!(s.static_residual(), 0.0);
        assert_eq!(s.phases()[4], PulsePhase::Y);
    }

    #[test]
    fn hahn_residual_vanishes() {
        let s = NamedSequence::hahn(3.0).to_sequence().unwrap();
        assert_eq!(s.spacings(), &[3.0, 3.0]);
        let s = PulseSequence::new(vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.static_residual(), 0.0);
    }

    #[test]
    fn rejects_bad_spacings() {
        assert!(PulseSequence::new(vec![1.0, -1.0]).is_err());
        assert!(PulseSequence::<f64>::new(vec![]).is_err());
        assert!(NamedSequence { family: SequenceFamily::Xy4, tau: 1.0, n_pulses: 3 }
            .to_sequence()
            .is_err());
    }

    #[test]
    fn split_then_concat_round_trips() {
        let s = PulseSequence::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (a, b) = s.split_at_pulse(1).unwrap();
        assert_eq!(a.n_pulses() + b.n_pulses(), 3);
        assert_eq!(a.concat(&b), s);
    }

    #[test]
    fn pulse_times_are_cumulative() {
        let s = PulseSequence::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.pulse_times(), vec![1.0, 3.0]);
    }
}
