// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grass::cost::{evaluate, grad_total, CostBreakdown, CostSpec};
use crate::scalar::{lit, Real};
use crate::seqsim::{eseem_contrast, PulseSequence};
use crate::spinsys::{HyperfineParams, PrecessionFrame};

const MAX_HALVINGS: usize = 20;

/// Acceptance thresholds for a candidate sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds<T> {
    /// Minimum `|Tr[V T^dagger]|^2` per branch of every target term (max 4).
    pub target: T,
    /// Minimum `|Tr[V+ V-^dagger]|^2` of every decoupling term (max 4).
    pub decouple: T,
    /// Maximum `|sum_k (-1)^k tau_k|`, us.
    pub static_residual: T,
}

impl<T: Real> Default for Thresholds<T> {
    fn default() -> Self {
        Self { target: lit(3.96), decouple: lit(3.35), static_residual: lit(0.05) }
    }
}

/// Post-filter against a seeded synthetic bath of weakly coupled nuclei.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathFilter<T> {
    pub n_nuclei: usize,
    /// Bound on `|A_par|` and `A_perp`, kHz.
    pub max_coupling_khz: T,
    pub larmor_khz: T,
    /// Minimum electron contrast with the bath alone.
    pub min_contrast: T,
    pub seed: u64,
}

impl<T: Real> Default for BathFilter<T> {
    fn default() -> Self {
        Self {
            n_nuclei: 20,
            max_coupling_khz: lit(20.0),
            larmor_khz: lit(142.0),
            min_contrast: lit(0.9),
            seed: 0x5eed,
        }
    }
}

impl<T: Real> BathFilter<T> {
    pub fn bath(&self) -> Vec<HyperfineParams<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let a = self.max_coupling_khz.to_f64().unwrap_or(0.0);
        (0..self.n_nuclei)
            .map(|_| HyperfineParams {
                a_par: lit(rng.random_range(-a..a)),
                a_perp: lit(rng.random_range(0.0..a)),
                omega_l: self.larmor_khz,
                larmor_scale: T::one(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrassConfig<T> {
    pub n_pulses: usize,
    pub learning_rate: T,
    pub max_iters: usize,
    /// Stop when the projected gradient norm falls below this.
    pub grad_tol: T,
    pub n_starts: usize,
    /// Spacing bounds, us.
    pub bounds: (T, T),
    pub seed: u64,
    pub thresholds: Thresholds<T>,
    pub bath: Option<BathFilter<T>>,
}

impl<T: Real> Default for GrassConfig<T> {
    fn default() -> Self {
        Self {
            n_pulses: 8,
            learning_rate: lit(1e-2),
            max_iters: 3000,
            grad_tol: lit(1e-6),
            n_starts: 200,
            bounds: (lit(0.2), lit(8.0)),
            seed: 1,
            thresholds: Thresholds::default(),
            bath: None,
        }
    }
}

impl<T: Real> GrassConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds;
        if !(lo > T::zero() && hi > lo) {
            return Err(invalid("bounds", format!("need 0 < min < max, got ({lo}, {hi})")));
        }
        if self.n_starts == 0 {
            return Err(invalid("n_starts", "must be >= 1"));
        }
        if !(self.learning_rate > T::zero()) {
            return Err(invalid("learning_rate", "must be > 0"));
        }
        Ok(())
    }
}

/// One optimized start.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassResult<T> {
    pub start: usize,
    pub spacings: Vec<T>,
    pub cost: CostBreakdown<T>,
    pub total_duration: T,
    pub iterations: usize,
    pub bath_contrast: Option<T>,
    pub feasible: bool,
}

/// All starts, sorted by (feasible first, duration ascending), and the chosen one.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassOutcome<T> {
    pub results: Vec<GrassResult<T>>,
    pub best: Option<usize>,
}

fn clamp<T: Real>(x: T, (lo, hi): (T, T)) -> T {
    x.max(lo).min(hi)
}

fn projected_norm<T: Real>(x: &[T], g: &[T], (lo, hi): (T, T)) -> T {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| {
            let blocked = (xi <= lo && gi < T::zero()) || (xi >= hi && gi > T::zero());
            if blocked {
                T::zero()
            } else {
                gi * gi
            }
        })
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

/// Gradient ascent from `x0`; returns final spacings and iterations used.
fn ascend<T: Real>(
    mut x: Vec<T>,
    frames: &[PrecessionFrame<T>],
    spec: &CostSpec<T>,
    cfg: &GrassConfig<T>,
) -> (Vec<T>, usize) {
    let mut c = evaluate(&x, frames, spec).total;
    let mut iters = 0;
    while iters < cfg.max_iters {
        let g = grad_total(&x, frames, spec);
        if projected_norm(&x, &g, cfg.bounds) < cfg.grad_tol {
            break;
        }
        iters += 1;
        let mut step = cfg.learning_rate;
        let mut moved = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<T> = x.iter().zip(&g).map(|(&xi, &gi)| clamp(xi + step * gi, cfg.bounds)).collect();
            let ct = evaluate(&trial, frames, spec).total;
            if ct >= c {
                moved = trial != x;
                x = trial;
                c = ct;
                break;
            }
            step = step / lit(2.0);
        }
        if !moved {
            break;
        }
    }
    (x, iters)
}

fn is_feasible<T: Real>(b: &CostBreakdown<T>, bath: Option<T>, cfg: &GrassConfig<T>) -> bool {
    let th = &cfg.thresholds;
    b.target_overlaps.iter().all(|&(p, m)| p >= th.target && m >= th.target)
        && b.decouple_overlaps.iter().all(|&d| d >= th.decouple)
        && b.static_residual.abs() <= th.static_residual
        && match (bath, cfg.bath) {
            (Some(c), Some(f)) => c > f.min_contrast,
            _ => true,
        }
}

/// Scores a fixed spacing list with the same criteria as the search.
pub fn score<T: Real>(
    start: usize,
    spacings: Vec<T>,
    iterations: usize,
    frames: &[PrecessionFrame<T>],
    spec: &CostSpec<T>,
    cfg: &GrassConfig<T>,
) -> Result<GrassResult<T>> {
    let cost = evaluate(&spacings, frames, spec);
    let bath_contrast = match &cfg.bath {
        Some(f) => Some(eseem_contrast(&PulseSequence::new(spacings.clone())?, &f.bath(), None)?),
        None => None,
    };
    let feasible = is_feasible(&cost, bath_contrast, cfg);
    let total_duration = spacings.iter().fold(T::zero(), |a, &b| a + b);
    Ok(GrassResult { start, spacings, cost, total_duration, iterations, bath_contrast, feasible })
}

fn ordering<T: Real>(a: &GrassResult<T>, b: &GrassResult<T>) -> Ordering {
    b.feasible
        .cmp(&a.feasible)
        .then(a.total_duration.partial_cmp(&b.total_duration).unwrap_or(Ordering::Equal))
        .then(b.cost.total.partial_cmp(&a.cost.total).unwrap_or(Ordering::Equal))
        .then(a.start.cmp(&b.start))
}

/// Sorts by (feasible first, total duration ascending, cost descending, start index).
pub fn sort_results<T: Real>(results: &mut [GrassResult<T>]) {
    results.sort_by(ordering);
}

/// Shortest feasible result, independent of input order.
pub fn select_best<T: Real>(results: &[GrassResult<T>]) -> Option<&GrassResult<T>> {
    results.iter().filter(|r| r.feasible).min_by(|a, b| ordering(a, b))
}

/// Multi-start search; never fails for lack of feasible results.
pub fn grass_search<T: Real>(
    frames: &[PrecessionFrame<T>],
    spec: &CostSpec<T>,
    cfg: &GrassConfig<T>,
) -> Result<GrassOutcome<T>> {
    cfg.validate()?;
    spec.validate(frames.len())?;
    let n = cfg.n_pulses + 1;
    let mut results = (0..cfg.n_starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(start as u64);
            let (lo, hi) = cfg.bounds;
            let (lo_f, hi_f) = (lo.to_f64().unwrap_or(0.0), hi.to_f64().unwrap_or(1.0));
            let x0: Vec<T> = (0..n).map(|_| lit(rng.random_range(lo_f..=hi_f))).collect();
            let (x, iters) = if cfg.n_pulses == 0 && spec.targets.is_empty() && spec.decouple.is_empty() {
                (x0, 0)
            } else {
                ascend(x0, frames, spec, cfg)
            };
            score(start, x, iters, frames, spec, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    sort_results(&mut results);
    let best = results.first().filter(|r| r.feasible).map(|_| 0);
    Ok(GrassOutcome { results, best })
}

/// Multi-start search that fails when no start meets the thresholds.
pub fn grass_optimize<T: Real>(
    frames: &[PrecessionFrame<T>],
    spec: &CostSpec<T>,
    cfg: &GrassConfig<T>,
) -> Result<GrassOutcome<T>> {
    let out = grass_search(frames, spec, cfg)?;
    if out.best.is_none() {
        return Err(Error::NoFeasibleSequence { starts: cfg.n_starts });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grass::cost::{DecoupleTerm, TargetTerm};
    use crate::spinsys::{known_nucleus, precession_frame};
    use crate::su2::Su2;

    fn frame(name: &str) -> PrecessionFrame<f64> {
        precession_frame(&known_nucleus(name).unwrap().1).unwrap()
    }

    #[test]
    fn identity_target_with_no_pulses_is_trivially_feasible() {
        // Zero pulses and a zero-length window is the identity on both branches.
        let spec = CostSpec {
            targets: vec![TargetTerm { nucleus: 0, plus: Su2::identity(), minus: Su2::identity(), weight: 1.0 }],
            decouple: vec![],
            static_weight: 0.0,
        };
        let cfg = GrassConfig { n_pulses: 0, n_starts: 4, bounds: (1e-6, 1e-3), ..Default::default() };
        let out = grass_optimize(&[frame("Nuc-1")], &spec, &cfg).unwrap();
        assert!(out.results[0].feasible);
    }

    #[test]
    fn seeded_runs_are_identical_and_order_free() {
        let spec = CostSpec {
            targets: vec![TargetTerm { nucleus: 0, plus: Su2::pauli_x(), minus: Su2::pauli_z(), weight: 1.0 }],
            decouple: vec![DecoupleTerm { nucleus: 1, weight: 1.0 }],
            static_weight: 1.0,
        };
        let cfg = GrassConfig { n_pulses: 4, n_starts: 6, max_iters: 200, ..Default::default() };
        let fr = [frame("Nuc-1"), frame("Nuc-2")];
        let a = grass_search(&fr, &spec, &cfg).unwrap();
        let b = grass_search(&fr, &spec, &cfg).unwrap();
        assert_eq!(a, b);
        let mut rev = a.results.clone();
        rev.reverse();
        assert_eq!(select_best(&rev), select_best(&a.results));
        for r in &a.results {
            assert!(r.spacings.iter().all(|&t| (0.2..=8.0).contains(&t)));
        }
    }

    #[test]
    fn ascent_converges_on_toy_problem() {
        // Four pulses, single nucleus, reachable target pair.
        let f = frame("Nuc-1");
        let x_star = [0.9, 2.1, 1.7, 3.0, 1.2];
        let cp = crate::seqsim::conditional_propagators(&PulseSequence::new(x_star.to_vec()).unwrap(), &f);
        let spec = CostSpec {
            targets: vec![TargetTerm { nucleus: 0, plus: cp.v_plus, minus: cp.v_minus, weight: 1.0 }],
            decouple: vec![],
            static_weight: 0.0,
        };
        let cfg = GrassConfig { n_pulses: 4, max_iters: 20000, grad_tol: 1e-5, ..Default::default() };
        let x0: Vec<f64> = x_star.iter().map(|v| v + 0.05).collect();
        let (x, _) = ascend(x0, &[f], &spec, &cfg);
        let g = grad_total(&x, &[f], &spec);
        assert!(projected_norm(&x, &g, cfg.bounds) < cfg.grad_tol, "{g:?}");
        assert!(evaluate(&x, &[f], &spec).total > 8.0 - 1e-9);
    }
}
