// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex64, FftPlanner};
use spinreg::circuits::experiments::{bell_ee_correlations, ramsey_signal};
use spinreg::circuits::gates::{en_block, unitary_infidelity};
use spinreg::circuits::*;
use spinreg::ensemble::{dephasing_ratio, distance_bounds, pair_statistics, ImplantModel, DEFAULT_G_EFF, DEFAULT_R_MIN_NM};
use spinreg::grass::*;
use spinreg::seqsim::*;
use spinreg::spinsys::{known_nucleus, precession_frame};
use spinreg::Result;

// Pinned tolerances.
const FREQ_TOL_KHZ: f64 = 2.0;
const TAU0_TOL_US: f64 = 0.02;
const ALPHA0_TOL_PI: f64 = 0.005;
const ANTIPARALLEL_MAX_DEG: f64 = 0.5;
const DURATION_TOL_US: f64 = 0.02;
const RESIDUAL_TOL_US: f64 = 0.005;
const GRAD_REL_TOL: f64 = 1e-5;
/// Components smaller than this (per us) are compared on this absolute scale.
const GRAD_FLOOR: f64 = 1e-3;
const GRAD_STEP_US: f64 = 1e-5;
const GRASS_COST_REL: f64 = 0.01;
const TINT_EXACT_US: f64 = 1e-9;
const TINT_REL: f64 = 0.02;
const BUDGET_TOL: f64 = 0.005;
const QND_FID_TOL: f64 = 0.02;
const QND_ACC_TOL: f64 = 0.05;
const QND_DECAY_TOL: f64 = 1e-9;
const CIRCUIT_TOL: f64 = 1e-6;
const PAIR_PROB_TOL: f64 = 0.05;
const R_MAX_REL: f64 = 0.15;
const RATIO_REL: f64 = 0.10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let t = Instant::now();
    let out = f();
    let dt = t.elapsed();
    let (pass, detail) = match out {
        Ok(o) => (o.pass && dt <= limit, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {verdict} {name}: {detail} [{:.3} s, limit {:.3} s]", dt.as_secs_f64(), limit.as_secs_f64());
    pass
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn c1_frequencies() -> Result<Outcome> {
    let (_, p) = known_nucleus::<f64>("Nuc-1").expect("built-in");
    let (wp, wm) = precession_frame(&p)?.frequencies_khz();
    Ok(Outcome {
        pass: within(wp, 458.0, FREQ_TOL_KHZ) && within(wm, 219.0, FREQ_TOL_KHZ),
        detail: format!("w+ = {wp:.2} kHz, w- = {wm:.2} kHz"),
    })
}

fn c2_resonance() -> Result<Outcome> {
    let (_, p) = known_nucleus::<f64>("Nuc-1").expect("built-in");
    let frame = precession_frame(&p)?;
    let r = quarter_turn_resonance(&frame, DEFAULT_WINDOW)?;
    let seq = NamedSequence::xy(2, r.tau0).to_sequence()?;
    let d = conditional_decompose(&conditional_propagators(&seq, &frame));
    let a = r.alpha0 / PI;
    Ok(Outcome {
        pass: within(r.tau0, 6.208, TAU0_TOL_US)
            && within(a, 0.248, ALPHA0_TOL_PI)
            && d.antiparallelity_deg < ANTIPARALLEL_MAX_DEG,
        detail: format!(
            "tau0 = {:.4} us, alpha0 = {a:.4} pi, antiparallelity = {:.2e} deg",
            r.tau0, d.antiparallelity_deg
        ),
    })
}

fn c3_published_sequence() -> Result<Outcome> {
    let prob = reference_problem()?;
    let seq = PulseSequence::new(REFERENCE_CU_SPACINGS.to_vec())?;
    let dur = seq.total_duration();
    let res = seq.static_residual().abs();
    let cu = cu_gate_check(&REFERENCE_CU_SPACINGS, &prob.frames[0], &prob.zprime)?;
    Ok(Outcome {
        pass: within(dur, 46.58, DURATION_TOL_US)
            && within(res, 0.036, RESIDUAL_TOL_US)
            && cu.is_cu
            && cu.infidelity_plus < CU_MAX_INFIDELITY
            && cu.infidelity_minus < CU_MAX_INFIDELITY,
        detail: format!(
            "duration = {dur:.3} us, |residual| = {res:.4} us, is_cu = {}, infidelity = ({:.2e}, {:.2e})",
            cu.is_cu, cu.infidelity_plus, cu.infidelity_minus
        ),
    })
}

fn c4_gradient() -> Result<Outcome> {
    let prob = reference_problem()?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x: Vec<f64> = (0..9).map(|_| rng.random_range(0.5..8.0)).collect();
        let g = grad_total(&x, &prob.frames, &prob.spec);
        for j in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += GRAD_STEP_US;
            xm[j] -= GRAD_STEP_US;
            let fd = (evaluate(&xp, &prob.frames, &prob.spec).total - evaluate(&xm, &prob.frames, &prob.spec).total)
                / (2.0 * GRAD_STEP_US);
            let rel = (g[j] - fd).abs() / fd.abs().max(g[j].abs()).max(GRAD_FLOOR);
            worst = worst.max(rel);
        }
    }
    Ok(Outcome { pass: worst < GRAD_REL_TOL, detail: format!("worst relative error = {worst:.2e} over 100 x 9") })
}

fn c5_grass() -> Result<Outcome> {
    let prob = reference_problem()?;
    let published = evaluate(&REFERENCE_CU_SPACINGS, &prob.frames, &prob.spec).total;
    let cfg = GrassConfig::default();
    let out = grass_search(&prob.frames, &prob.spec, &cfg)?;
    let feasible: Vec<&GrassResult<f64>> = out.results.iter().filter(|r| r.feasible).collect();
    let best = feasible.iter().map(|r| r.cost.total).fold(f64::NEG_INFINITY, f64::max);
    // The cost is maximized: a feasible sequence must reach at least 99% of the published cost.
    let pass = !feasible.is_empty() && best >= published * (1.0 - GRASS_COST_REL);
    Ok(Outcome {
        pass,
        detail: format!(
            "{} of {} starts feasible, best feasible cost = {best:.4}, published = {published:.4}",
            feasible.len(),
            cfg.n_starts
        ),
    })
}

fn c6_interaction() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &(n, tau, dtau) in &[(64usize, 6.2, 1.3), (16, 4.0, 0.5), (8, 3.0, 3.0), (2, 5.0, 0.0), (32, 6.208, 2.2)] {
        let t = effective_interaction_time(&TogglingPair::deer(n, tau, dtau)?).t_int;
        worst = worst.max((t - 2.0 * (n as f64 - 1.0) * (tau - dtau)).abs());
    }
    let pair = EeTiming::default().pair()?;
    let t_int = effective_interaction_time(&pair).t_int;
    let target = 1000.0 / (4.0 * REFERENCE_J_KHZ);
    Ok(Outcome {
        pass: worst <= TINT_EXACT_US && (t_int / target - 1.0).abs() <= TINT_REL,
        detail: format!("DEER max deviation = {worst:.1e} us, CZ T_int = {t_int:.3} us vs {target:.3} us"),
    })
}

fn c7_budgets() -> Result<Outcome> {
    let b = NoiseBudget::default();
    let v = |k| fidelity_budget(&b, k);
    let bell = v(CircuitKind::BellEe)?.fidelity;
    let rr = v(CircuitKind::RemoteReadout)?.fidelity;
    let sw = v(CircuitKind::SwapSquared)?.fidelity;
    let en = v(CircuitKind::BellEn)?;
    let zz = en.zz.unwrap_or(f64::NAN);
    Ok(Outcome {
        pass: within(bell, 0.81, BUDGET_TOL)
            && within(rr, 0.89, BUDGET_TOL)
            && within(sw, 0.830, BUDGET_TOL)
            && within(en.fidelity, 0.56, BUDGET_TOL)
            && within(zz, 0.455, BUDGET_TOL),
        detail: format!(
            "Bell_ee = {bell:.4}, remote = {rr:.4}, SWAP^2 = {sw:.4}, e-n Bell = {:.4} (ZZ = {zz:.4})",
            en.fidelity
        ),
    })
}

fn c8_qnd() -> Result<Outcome> {
    let b = NoiseBudget::default();
    let m = QndModel { p_err: b.p_err, f_read: b.f_read1, gate_contrast: Some(b.p_xy6_er1) };
    let ps = qnd_analysis(3, &m, QndPolicy::PostSelect)?;
    let c: Vec<f64> = (1..=5)
        .map(|k| qnd_analysis(5, &m, QndPolicy::PerRound(k)).map(|r| 2.0 * r.fidelity - 1.0))
        .collect::<Result<_>>()?;
    let decay_ok = c.windows(2).all(|w| (w[1] / w[0] - (1.0 - 2.0 * b.p_err)).abs() <= QND_DECAY_TOL);
    Ok(Outcome {
        pass: within(ps.fidelity, 0.98, QND_FID_TOL) && within(ps.acceptance, 0.66, QND_ACC_TOL) && decay_ok,
        detail: format!(
            "post-select fidelity = {:.4} at acceptance {:.4}; round-1 fidelity = {:.4}; contrast ratio per round = {:.4}",
            ps.fidelity,
            ps.acceptance,
            (1.0 + c[0]) / 2.0,
            c[1] / c[0]
        ),
    })
}

fn c9_circuits() -> Result<Outcome> {
    let frozen = GateLibrary::reference(Realization::Ideal, false)?;
    let bell = bell_ee_correlations(&frozen, None)?.bell_fidelity();
    let u = circuit_unitary(&frozen.build(GateKind::SwapEn)?, &frozen.register)?;
    let b = en_block(&(u * u), &frozen.register, 0);
    let swap2 = unitary_infidelity(&b, &Matrix4::identity());

    let lib = GateLibrary::reference(Realization::Ideal, true)?;
    let n = 1024;
    let dt = 0.25;
    let sig: Vec<f64> = (0..n).map(|k| ramsey_signal(&lib, dt * k as f64)).collect::<Result<_>>()?;
    let mean = sig.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = sig.iter().map(|s| Complex64::new(s - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin = 1000.0 / (n as f64 * dt);
    let mut mags: Vec<(usize, f64)> = (1..n / 2).map(|k| (k, buf[k].norm())).collect();
    mags.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut peaks = [mags[0].0 as f64 * bin, mags[1].0 as f64 * bin];
    peaks.sort_by(|a, b| b.total_cmp(a));
    Ok(Outcome {
        pass: within(bell, 1.0, CIRCUIT_TOL)
            && swap2 <= CIRCUIT_TOL
            && within(peaks[0], 458.0, bin)
            && within(peaks[1], 219.0, bin),
        detail: format!(
            "Bell F = {bell:.9}, SWAP^2 infidelity = {swap2:.1e}, Ramsey peaks = {:.1} / {:.1} kHz (bin {bin:.2} kHz)",
            peaks[0], peaks[1]
        ),
    })
}

fn c10_pairs() -> Result<Outcome> {
    let m = ImplantModel::default();
    let (p, stats) = pair_statistics(&m, 5.40, 100_000)?;
    let (_, again) = pair_statistics(&m, 5.40, 100_000)?;
    let r = distance_bounds(5.40, DEFAULT_G_EFF, DEFAULT_R_MIN_NM)?.r_max;
    Ok(Outcome {
        pass: within(p, 0.26, PAIR_PROB_TOL) && (r / 42.0 - 1.0).abs() <= R_MAX_REL && stats == again,
        detail: format!("prob(max |J| >= 5.40 kHz) = {p:.4}, r_max = {r:.1} nm (target 42 nm +- 15%), deterministic = {}", stats == again),
    })
}

fn c11_ratio() -> Result<Outcome> {
    let (_, p) = known_nucleus::<f64>("Nuc-1").expect("built-in");
    let r = dephasing_ratio(&p, 8600.0)?;
    Ok(Outcome {
        pass: (r / 2.6e4 - 1.0).abs() <= RATIO_REL && (r / 2.7e4 - 1.0).abs() <= RATIO_REL,
        detail: format!("ratio = {r:.0}"),
    })
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        check(1, "nuclear precession frequencies", Duration::from_millis(1), c1_frequencies),
        check(2, "CZ resonance", s(1), c2_resonance),
        check(3, "published CU sequence", s(1), c3_published_sequence),
        check(4, "analytic gradient", s(10), c4_gradient),
        check(5, "GRASS search", s(300), c5_grass),
        check(6, "interaction time", s(1), c6_interaction),
        check(7, "fidelity budgets", s(1), c7_budgets),
        check(8, "QND enumeration", s(1), c8_qnd),
        check(9, "noiseless circuits", s(30), c9_circuits),
        check(10, "pair statistics", s(120), c10_pairs),
        check(11, "dephasing ratio", s(1), c11_ratio),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
