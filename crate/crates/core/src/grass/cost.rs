// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::{lit, Real};
use crate::seqsim::{static_residual_of, ConditionalPropagator};
use crate::spinsys::{free_propagator, Branch, PrecessionFrame};
use crate::su2::Su2;

/// Steer nucleus `nucleus` to `plus` / `minus` depending on the electron state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetTerm<T: Real> {
    pub nucleus: usize,
    pub plus: Su2<T>,
    pub minus: Su2<T>,
    pub weight: T,
}

/// Make nucleus `nucleus` evolve identically for both electron states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoupleTerm<T> {
    pub nucleus: usize,
    pub weight: T,
}

/// Weighted sum of target, decoupling and static-balance terms.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSpec<T: Real> {
    pub targets: Vec<TargetTerm<T>>,
    pub decouple: Vec<DecoupleTerm<T>>,
    pub static_weight: T,
}

impl<T: Real> CostSpec<T> {
    pub fn validate(&self, n_nuclei: usize) -> Result<()> {
        if self.targets.is_empty() && self.decouple.is_empty() && self.static_weight == T::zero() {
            return Err(invalid("cost", "at least one term is required"));
        }
        let ok = |w: T| w >= T::zero() && w.is_finite();
        for t in &self.targets {
            if t.nucleus >= n_nuclei {
                return Err(invalid("target nucleus", format!("index {} out of range", t.nucleus)));
            }
            if !ok(t.weight) {
                return Err(invalid("target weight", "must be finite and >= 0"));
            }
        }
        for d in &self.decouple {
            if d.nucleus >= n_nuclei {
                return Err(invalid("decouple nucleus", format!("index {} out of range", d.nucleus)));
            }
            if !ok(d.weight) {
                return Err(invalid("decouple weight", "must be finite and >= 0"));
            }
        }
        if !ok(self.static_weight) {
            return Err(invalid("static weight", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// `|Tr[V+ T+^dagger]|^2 + |Tr[V- T-^dagger]|^2`; returns `(total, plus, minus)`.
pub fn cost_target<T: Real>(cp: &ConditionalPropagator<T>, targets: (&Su2<T>, &Su2<T>)) -> (T, T, T) {
    let p = cp.v_plus.overlap(targets.0);
    let m = cp.v_minus.overlap(targets.1);
    (p + m, p, m)
}

/// `|Tr[V+ V-^dagger]|^2`.
pub fn cost_decouple<T: Real>(cp: &ConditionalPropagator<T>) -> T {
    cp.v_plus.overlap(&cp.v_minus)
}

/// `-(sum_k (-1)^k tau_k)^2`.
pub fn cost_static<T: Real>(spacings: &[T]) -> T {
    let r = static_residual_of(spacings);
    -r * r
}

/// Per-term values of a cost evaluation. `total` is the weighted sum.
#[derive(Clone, Debug, PartialEq)]
pub struct CostBreakdown<T> {
    pub total: T,
    /// Unweighted `(plus, minus)` overlaps per target term.
    pub target_overlaps: Vec<(T, T)>,
    /// Unweighted overlaps per decoupling term.
    pub decouple_overlaps: Vec<T>,
    /// Unweighted static term `-r^2`.
    pub static_value: T,
    pub static_residual: T,
}

/// Propagators of one nucleus for both branches plus their spacing derivatives.
struct BranchData<T: Real> {
    v: [Su2<T>; 2],
    dv: [Vec<Su2<T>>; 2],
}

fn branch_factors<T: Real>(spacings: &[T], frame: &PrecessionFrame<T>, start: Branch) -> Vec<(Su2<T>, Su2<T>)> {
    // (U_j, G_j) with dU_j/dtau_j = G_j U_j.
    let mut b = start;
    spacings
        .iter()
        .map(|&tau| {
            let u = free_propagator(frame, b, tau.max(T::zero())).expect("non-negative");
            let half = frame.omega(b) / lit(2.0);
            let g = Su2::pauli_dot(frame.axis(b)).scale(Complex::new(T::zero(), -half));
            b = b.flip();
            (u, g)
        })
        .collect()
}

fn propagate_with_derivs<T: Real>(
    spacings: &[T],
    frame: &PrecessionFrame<T>,
    start: Branch,
    derivs: bool,
) -> (Su2<T>, Vec<Su2<T>>) {
    let f = branch_factors(spacings, frame, start);
    let n = f.len();
    // prefix[j] = U_j ... U_0
    let mut prefix = Vec::with_capacity(n);
    let mut acc = Su2::identity();
    for (u, _) in &f {
        acc = *u * acc;
        prefix.push(acc);
    }
    if !derivs {
        return (acc, Vec::new());
    }
    let mut dv = vec![Su2::identity(); n];
    let mut suffix = Su2::identity();
    for j in (0..n).rev() {
        dv[j] = suffix * f[j].1 * prefix[j];
        suffix = suffix * f[j].0;
    }
    (acc, dv)
}

fn branch_data<T: Real>(spacings: &[T], frame: &PrecessionFrame<T>, derivs: bool) -> BranchData<T> {
    let (vp, dp) = propagate_with_derivs(spacings, frame, Branch::Plus, derivs);
    let (vm, dm) = propagate_with_derivs(spacings, frame, Branch::Minus, derivs);
    BranchData { v: [vp, vm], dv: [dp, dm] }
}

/// Evaluates every term of `spec` on `spacings`.
pub fn evaluate<T: Real>(spacings: &[T], frames: &[PrecessionFrame<T>], spec: &CostSpec<T>) -> CostBreakdown<T> {
    let mut total = T::zero();
    let mut target_overlaps = Vec::with_capacity(spec.targets.len());
    let mut cache: Vec<Option<ConditionalPropagator<T>>> = vec![None; frames.len()];
    let mut cp_of = |i: usize| -> ConditionalPropagator<T> {
        *cache[i].get_or_insert_with(|| {
            let d = branch_data(spacings, &frames[i], false);
            ConditionalPropagator { v_plus: d.v[0], v_minus: d.v[1] }
        })
    };
    for t in &spec.targets {
        let (sum, p, m) = cost_target(&cp_of(t.nucleus), (&t.plus, &t.minus));
        total += t.weight * sum;
        target_overlaps.push((p, m));
    }
    let mut decouple_overlaps = Vec::with_capacity(spec.decouple.len());
    for d in &spec.decouple {
        let v = cost_decouple(&cp_of(d.nucleus));
        total += d.weight * v;
        decouple_overlaps.push(v);
    }
    let static_residual = static_residual_of(spacings);
    let static_value = -static_residual * static_residual;
    total += spec.static_weight * static_value;
    CostBreakdown { total, target_overlaps, decouple_overlaps, static_value, static_residual }
}

/// Analytic gradient of the weighted total cost with respect to each spacing (per us),
/// from forward and backward partial products.
pub fn grad_total<T: Real>(spacings: &[T], frames: &[PrecessionFrame<T>], spec: &CostSpec<T>) -> Vec<T> {
    let n = spacings.len();
    let mut grad = vec![T::zero(); n];
    let two = lit::<T>(2.0);
    let mut cache: Vec<Option<BranchData<T>>> = (0..frames.len()).map(|_| None).collect();
    let mut needed = vec![false; frames.len()];
    for t in &spec.targets {
        needed[t.nucleus] |= t.weight != T::zero();
    }
    for d in &spec.decouple {
        needed[d.nucleus] |= d.weight != T::zero();
    }
    for (i, need) in needed.iter().enumerate() {
        if *need {
            cache[i] = Some(branch_data(spacings, &frames[i], true));
        }
    }
    for t in spec.targets.iter().filter(|t| t.weight != T::zero()) {
        let bd = cache[t.nucleus].as_ref().expect("computed");
        for (k, target) in [t.plus, t.minus].iter().enumerate() {
            let tr = bd.v[k].inner(target).conj();
            for j in 0..n {
                let d = bd.dv[k][j].inner(target);
                grad[j] += t.weight * two * (tr * d).re;
            }
        }
    }
    for dterm in spec.decouple.iter().filter(|d| d.weight != T::zero()) {
        let bd = cache[dterm.nucleus].as_ref().expect("computed");
        let tr = bd.v[0].inner(&bd.v[1]).conj();
        for j in 0..n {
            let d = bd.dv[0][j].inner(&bd.v[1]) + bd.dv[1][j].inner(&bd.v[0]).conj();
            grad[j] += dterm.weight * two * (tr * d).re;
        }
    }
    if spec.static_weight != T::zero() {
        let r = static_residual_of(spacings);
        for (j, g) in grad.iter_mut().enumerate() {
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            *g -= spec.static_weight * two * r * sign;
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqsim::{conditional_propagators, PulseSequence};
    use crate::spinsys::{known_nucleus, precession_frame};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frames() -> Vec<PrecessionFrame<f64>> {
        ["Nuc-1", "Nuc-2"]
            .iter()
            .map(|n| precession_frame(&known_nucleus(n).unwrap().1).unwrap())
            .collect()
    }

    fn spec() -> CostSpec<f64> {
        CostSpec {
            targets: vec![TargetTerm {
                nucleus: 0,
                plus: Su2::pauli_x(),
                minus: Su2::pauli_z(),
                weight: 1.0,
            }],
            decouple: vec![DecoupleTerm { nucleus: 1, weight: 1.0 }],
            static_weight: 1.0,
        }
    }

    #[test]
    fn perfect_targets_score_eight() {
        let u = Su2::<f64>::rotation([0.0, 0.6, 0.8], 1.3);
        let w = Su2::<f64>::rotation([1.0, 0.0, 0.0], 0.4);
        let cp = ConditionalPropagator { v_plus: u, v_minus: w };
        assert!((cost_target(&cp, (&u, &w)).0 - 8.0).abs() < 1e-12);
        let phased = ConditionalPropagator { v_plus: u.scale(Complex::from_polar(1.0, 0.3)), v_minus: w };
        assert!((cost_target(&phased, (&u, &w)).0 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn decouple_extremes() {
        let u = Su2::<f64>::rotation([0.0, 0.0, 1.0], 0.7);
        assert!((cost_decouple(&ConditionalPropagator { v_plus: u, v_minus: u }) - 4.0).abs() < 1e-12);
        let xz = ConditionalPropagator { v_plus: Su2::<f64>::pauli_x(), v_minus: Su2::pauli_z() };
        assert!(cost_decouple(&xz).abs() < 1e-15);
    }

    #[test]
    fn static_term() {
        assert_eq!(cost_static(&[1.0, 2.0, 1.0]), 0.0);
        let s = [1.0, 3.0, 2.0, 0.5];
        let doubled: Vec<f64> = s.iter().chain(s.iter()).copied().collect();
        // Appending a copy with inverted parity (odd length offset) cancels.
        let mut inv = s.to_vec();
        inv.insert(0, 0.0);
        let cancel: Vec<f64> = s.iter().chain(inv.iter()).copied().collect();
        assert!(cost_static(&cancel).abs() < 1e-15);
        assert!(cost_static(&doubled) < 0.0);
    }

    #[test]
    fn evaluate_matches_direct_propagators() {
        let f = frames();
        let x = [1.1, 2.3, 0.7, 3.9, 1.4];
        let b = evaluate(&x, &f, &spec());
        let cp = conditional_propagators(&PulseSequence::new(x.to_vec()).unwrap(), &f[0]);
        let (_, p, m) = cost_target(&cp, (&Su2::pauli_x(), &Su2::pauli_z()));
        assert!((b.target_overlaps[0].0 - p).abs() < 1e-12);
        assert!((b.target_overlaps[0].1 - m).abs() < 1e-12);
        let sum = p + m + b.decouple_overlaps[0] + b.static_value;
        assert!((b.total - sum).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = frames();
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x: Vec<f64> = (0..9).map(|_| rng.random_range(0.5..8.0)).collect();
            let g = grad_total(&x, &f, &s);
            for j in 0..x.len() {
                let h = 1e-5;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (evaluate(&xp, &f, &s).total - evaluate(&xm, &f, &s).total) / (2.0 * h);
                let scale = g[j].abs().max(1e-3);
                assert!((g[j] - fd).abs() / scale < 1e-5, "{j}: {} vs {fd}", g[j]);
            }
        }
    }

    #[test]
    fn zero_weight_gives_zero_gradient() {
        let mut s = spec();
        s.targets[0].weight = 0.0;
        s.decouple[0].weight = 0.0;
        s.static_weight = 0.0;
        let g = grad_total(&[1.0, 2.0, 3.0], &frames(), &s);
        assert!(g.iter().all(|v| *v == 0.0));
    }
}
