// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! One function per experiment command.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use spinreg::circuits::experiments::{bell_ee_correlations, bell_en_correlations, ramsey_signal};
use spinreg::circuits::gates::{
    cz_orientation, en_block, nuclear_s_prime, reference_cu, reference_cz, reference_swap, unitary_infidelity,
};
use spinreg::circuits::*;
use spinreg::ensemble::{distance_bounds, pair_statistics};
use spinreg::grass::*;
use spinreg::seqsim::*;
use spinreg::spinsys::{known_nucleus, precession_frame};
use spinreg::{HyperfineParams, PrecessionFrame};

use crate::config::{CircuitName, ConfigError, FitKind, RunConfig, SweepConfig};
use crate::fit::{dominant_frequencies, fit_damped_cosine, fit_stretched_exp, FitError};
use crate::record::{FitRecord, ResultRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Command {
    Eseem,
    Deer,
    Resonance,
    Chevron,
    Grass,
    Ramsey,
    HahnNuc,
    Circuit,
    Qnd,
    Pairstats,
    Budget,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Eseem,
        Command::Deer,
        Command::Resonance,
        Command::Chevron,
        Command::Grass,
        Command::Ramsey,
        Command::HahnNuc,
        Command::Circuit,
        Command::Qnd,
        Command::Pairstats,
        Command::Budget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Eseem => "eseem",
            Command::Deer => "deer",
            Command::Resonance => "resonance",
            Command::Chevron => "chevron",
            Command::Grass => "grass",
            Command::Ramsey => "ramsey",
            Command::HahnNuc => "hahn-nuc",
            Command::Circuit => "circuit",
            Command::Qnd => "qnd",
            Command::Pairstats => "pairstats",
            Command::Budget => "budget",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{command}: {source}")]
    Core { command: &'static str, source: spinreg::Error },
    #[error("{command}: {source}")]
    Fit { command: &'static str, source: FitError },
    #[error("{command}: non-finite value in `{field}`")]
    NonFinite { command: &'static str, field: String },
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 configuration, 3 numerical failure, 4 infeasible optimization, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        use spinreg::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core { source, .. } => match source {
                E::InvalidParameter { .. }
                | E::NegativeDuration(_)
                | E::InvalidTarget(_)
                | E::MissingGrassSequence(_)
                | E::RoundsTooLarge(_)
                | E::BoxTooSmall { .. } => 2,
                E::NoFeasibleSequence { .. } => 4,
                _ => 3,
            },
            CliError::Fit { .. } | CliError::NonFinite { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// No optimized sequence met the thresholds; the record still lists every start.
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub record: ResultRecord,
    pub status: Status,
}

/// Command context for error conversion.
struct Ctx<'a> {
    cmd: Command,
    cfg: &'a RunConfig,
}

type CliResult<T> = Result<T, CliError>;

impl Ctx<'_> {
    fn core<T>(&self, r: spinreg::Result<T>) -> CliResult<T> {
        r.map_err(|source| CliError::Core { command: self.cmd.name(), source })
    }

    fn fit<T>(&self, r: Result<T, FitError>) -> CliResult<T> {
        r.map_err(|source| CliError::Fit { command: self.cmd.name(), source })
    }

    fn record(&self, columns: &[&str]) -> ResultRecord {
        ResultRecord::new(self.cmd.name(), self.cfg.hash(), self.cfg.seed, columns)
    }

    /// Sweep values of `variable`, or the command default.
    fn sweep(&self, variable: &str, default: (f64, f64, usize)) -> CliResult<Vec<f64>> {
        match &self.cfg.sweep {
            Some(s) if s.variable == variable => Ok(s.values()),
            Some(s) => Err(ConfigError::Invalid {
                field: "sweep.variable".into(),
                reason: format!("`{}` sweeps `{variable}`, not `{}`", self.cmd.name(), s.variable),
            }
            .into()),
            None => Ok(SweepConfig::new(variable, default.0, default.1, default.2).values()),
        }
    }

    fn no_sweep(&self) -> CliResult<()> {
        match self.cfg.sweep {
            Some(_) => Err(ConfigError::Invalid {
                field: "sweep".into(),
                reason: format!("`{}` does not take a sweep", self.cmd.name()),
            }
            .into()),
            None => Ok(()),
        }
    }

    fn nucleus(&self, i: usize) -> CliResult<HyperfineParams> {
        self.cfg
            .system
            .nuclei
            .get(i)
            .map(|n| n.params())
            .ok_or_else(|| ConfigError::MissingRequired("system.nuclei".into()).into())
    }

    fn frame(&self, i: usize) -> CliResult<PrecessionFrame> {
        let p = self.nucleus(i)?;
        self.core(precession_frame(&p))
    }

    fn fit_kind(&self, default: FitKind) -> FitKind {
        self.cfg.fit.kind.unwrap_or(default)
    }

    /// Fits `y(t)` and records the parameters; `freq_scale` converts the fitted
    /// frequency to the reported unit.
    fn apply_fit(&self, rec: &mut ResultRecord, kind: FitKind, t: &[f64], y: &[f64], freq_scale: f64) -> CliResult<()> {
        match kind {
            FitKind::None => {}
            FitKind::DampedCosine => {
                let f = self.fit(fit_damped_cosine(t, y))?;
                let mut r = FitRecord { model: "damped_cosine".into(), ..Default::default() };
                r.params.insert("frequency_khz".into(), f.frequency * freq_scale);
                r.params.insert("decay_rate_per_us".into(), f.decay_rate);
                if f.decay_time.is_finite() {
                    r.params.insert("decay_time_us".into(), f.decay_time);
                }
                r.params.insert("amplitude".into(), f.amplitude);
                r.params.insert("phase_rad".into(), f.phase);
                let sig = |k: usize| f.covariance[k][k].max(0.0).sqrt();
                r.sigma.insert("amplitude".into(), sig(0));
                r.sigma.insert("frequency_khz".into(), sig(1) * freq_scale);
                r.sigma.insert("decay_rate_per_us".into(), sig(2));
                r.sigma.insert("phase_rad".into(), sig(3));
                rec.fits.push(r);
            }
            FitKind::StretchedExp => {
                let f = self.fit(fit_stretched_exp(t, y, self.cfg.fit.fixed_n))?;
                let mut r = FitRecord { model: "stretched_exp".into(), ..Default::default() };
                r.params.insert("t2_us".into(), f.t2);
                r.params.insert("n".into(), f.n);
                r.params.insert("amplitude".into(), f.amplitude);
                let sig = |k: usize| f.covariance[k][k].max(0.0).sqrt();
                r.sigma.insert("amplitude".into(), sig(0));
                r.sigma.insert("t2_us".into(), sig(1));
                if self.cfg.fit.fixed_n.is_none() {
                    r.sigma.insert("n".into(), sig(2));
                }
                rec.fits.push(r);
            }
        }
        Ok(())
    }

    /// Gate library for the first nucleus.
    fn library(&self, realization: Realization, precess: bool) -> CliResult<GateLibrary> {
        let params = self.nucleus(0)?;
        let frame = self.core(precession_frame(&params))?;
        let res = self.core(quarter_turn_resonance(&frame, self.cfg.resonance.window_us))?;
        let j = self.cfg.system.j_coupling_khz.unwrap_or(0.0);
        let register = Register::new(j, precess.then_some(frame), res.zprime);
        let mut lib = GateLibrary::new(register, realization, res.tau0);
        lib.cz_orientation = self.core(cz_orientation(&frame, res.tau0, &res.zprime))?;
        let is_reference = known_nucleus::<f64>("Nuc-1").is_some_and(|(_, p)| p == params);
        lib.cu_spacings = self
            .cfg
            .circuit
            .cu_spacings_us
            .clone()
            .or_else(|| is_reference.then(|| REFERENCE_CU_SPACINGS.to_vec()));
        Ok(lib)
    }
}

/// Runs `cmd` and returns its record. Output is deterministic for a fixed config.
pub fn run_command(cfg: &RunConfig, cmd: Command) -> CliResult<Run> {
    let ctx = Ctx { cmd, cfg };
    let mut status = Status::Ok;
    let record = match cmd {
        Command::Eseem => eseem(&ctx)?,
        Command::Deer => deer(&ctx)?,
        Command::Resonance => resonance(&ctx)?,
        Command::Chevron => chevron(&ctx)?,
        Command::Grass => {
            let (rec, feasible) = grass(&ctx)?;
            if !feasible {
                status = Status::Infeasible;
            }
            rec
        }
        Command::Ramsey => ramsey(&ctx)?,
        Command::HahnNuc => hahn_nuc(&ctx)?,
        Command::Circuit => circuit(&ctx)?,
        Command::Qnd => qnd(&ctx)?,
        Command::Pairstats => pairstats(&ctx)?,
        Command::Budget => budget(&ctx)?,
    };
    if let Some(field) = record.first_non_finite() {
        return Err(CliError::NonFinite { command: cmd.name(), field });
    }
    Ok(Run { record, status })
}

fn eseem(ctx: &Ctx) -> CliResult<ResultRecord> {
    let cfg = ctx.cfg;
    let seq_cfg = &cfg.sequence;
    let electron = seq_cfg.electron.unwrap_or(cfg.system.electrons.len() - 1);
    let nuclei: Vec<HyperfineParams> = cfg
        .system
        .nuclei
        .iter()
        .filter(|n| n.owner == Some(electron))
        .map(|n| n.params())
        .collect();
    let e = cfg.system.electrons[electron];
    let envelope = seq_cfg.envelope.then_some((e.t2_us, e.stretch_n));
    let taus = match seq_cfg.family {
        crate::config::Family::Explicit => {
            ctx.no_sweep()?;
            vec![f64::NAN]
        }
        _ => ctx.sweep("tau_us", (0.5, 20.0, 400))?,
    };
    let points: Vec<(f64, f64, f64)> = taus
        .par_iter()
        .map(|&tau| {
            let seq = seq_cfg.build(tau)?;
            let total = seq.total_duration();
            // Explicit spacings report their mean half-spacing.
            let tau = if tau.is_nan() { total / (2.0 * seq.n_pulses().max(1) as f64) } else { tau };
            Ok((tau, total, eseem_contrast(&seq, &nuclei, envelope)?))
        })
        .collect::<spinreg::Result<_>>()
        .map_err(|source| CliError::Core { command: ctx.cmd.name(), source })?;
    let mut rec = ctx.record(&["tau_us", "total_us", "contrast"]);
    for &(tau, total, c) in &points {
        rec.push(vec![tau, total, c]);
    }
    let t: Vec<f64> = points.iter().map(|p| p.1).collect();
    let y: Vec<f64> = points.iter().map(|p| p.2).collect();
    ctx.apply_fit(&mut rec, ctx.fit_kind(FitKind::None), &t, &y, 1000.0)?;
    Ok(rec)
}

fn deer(ctx: &Ctx) -> CliResult<ResultRecord> {
    let cfg = ctx.cfg;
    let j = cfg
        .deer
        .j_khz
        .or(cfg.system.j_coupling_khz)
        .ok_or_else(|| ConfigError::MissingRequired("deer.j_khz".into()))?;
    let t = ctx.sweep("t_int_us", (0.0, 400.0, 64))?;
    let mut y = ctx.core(deer_trace(j, &t, cfg.deer.t_damp_us))?;
    if cfg.deer.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, cfg.deer.noise_sigma).map_err(|e| ConfigError::Invalid {
            field: "deer.noise_sigma".into(),
            reason: e.to_string(),
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for v in &mut y {
            *v += normal.sample(&mut rng);
        }
    }
    let mut rec = ctx.record(&["t_int_us", "contrast"]);
    for (&ti, &yi) in t.iter().zip(&y) {
        rec.push(vec![ti, yi]);
    }
    rec.set("j_khz", j);
    rec.set("pi_phase_time_us", 1000.0 / (4.0 * j));
    ctx.apply_fit(&mut rec, ctx.fit_kind(FitKind::DampedCosine), &t, &y, 1000.0)?;
    Ok(rec)
}

fn resonance(ctx: &Ctx) -> CliResult<ResultRecord> {
    ctx.no_sweep()?;
    let n = ctx.cfg.system.nuclei.len();
    if n == 0 {
        return Err(ConfigError::MissingRequired("system.nuclei".into()).into());
    }
    let mut rec = ctx.record(&[
        "nucleus",
        "omega_plus_khz",
        "omega_minus_khz",
        "tau0_us",
        "alpha0_over_pi",
        "antiparallelity_deg",
        "zprime_x",
        "zprime_y",
        "zprime_z",
        "first_root_us",
    ]);
    let window = ctx.cfg.resonance.window_us;
    for i in 0..n {
        let frame = ctx.frame(i)?;
        let (wp, wm) = frame.frequencies_khz();
        let r = ctx.core(quarter_turn_resonance(&frame, window))?;
        let first = ctx.core(cz_resonance_tau(&frame, window))?;
        let z = r.zprime.axis;
        rec.push(vec![
            i as f64,
            wp,
            wm,
            r.tau0,
            r.alpha0 / std::f64::consts::PI,
            r.antiparallelity_deg,
            z[0],
            z[1],
            z[2],
            first.tau0,
        ]);
    }
    Ok(rec)
}

fn chevron(ctx: &Ctx) -> CliResult<ResultRecord> {
    let frame = ctx.frame(0)?;
    let taus = ctx.sweep("tau_us", (0.5, 12.0, 231))?;
    let counts = &ctx.cfg.chevron.n_pulses;
    let map = ctx.core(chevron_map(&frame, &taus, counts))?;
    let mut rec = ctx.record(&["tau_us", "n_pulses", "flip_probability"]);
    for (n, row) in counts.iter().zip(&map) {
        for (&tau, &p) in taus.iter().zip(row) {
            rec.push(vec![tau, *n as f64, p]);
        }
    }
    Ok(rec)
}

fn grass(ctx: &Ctx) -> CliResult<(ResultRecord, bool)> {
    ctx.no_sweep()?;
    let cfg = ctx.cfg;
    let g = &cfg.grass;
    let n = cfg.system.nuclei.len();
    if n == 0 {
        return Err(ConfigError::MissingRequired("system.nuclei".into()).into());
    }
    let resolve = |name: &str, field: &str| {
        cfg.nucleus_index(name).ok_or_else(|| ConfigError::Invalid {
            field: field.into(),
            reason: format!("no nucleus named `{name}` in system.nuclei"),
        })
    };
    let target = match &g.target {
        Some(name) => resolve(name, "grass.target")?,
        None => 0,
    };
    let decouple: Vec<usize> = match &g.decouple {
        Some(names) => names.iter().map(|s| resolve(s, "grass.decouple")).collect::<Result<_, _>>()?,
        None => (0..n).filter(|&i| i != target).collect(),
    };
    let frames: Vec<PrecessionFrame> = (0..n).map(|i| ctx.frame(i)).collect::<CliResult<_>>()?;
    let zprime = ctx.core(quarter_turn_resonance(&frames[target], cfg.resonance.window_us))?.zprime;
    let (plus, minus) = cu_targets(&zprime);
    let spec = CostSpec {
        targets: vec![TargetTerm { nucleus: target, plus, minus, weight: g.target_weight }],
        decouple: decouple.iter().map(|&i| DecoupleTerm { nucleus: i, weight: g.decouple_weight }).collect(),
        static_weight: g.static_weight,
    };
    let gc = GrassConfig {
        n_pulses: g.n_pulses,
        learning_rate: g.learning_rate,
        max_iters: g.max_iters,
        grad_tol: g.grad_tol,
        n_starts: g.n_starts,
        bounds: (g.min_spacing_us, g.max_spacing_us),
        seed: cfg.seed,
        thresholds: Thresholds {
            target: g.threshold_target,
            decouple: g.threshold_decouple,
            static_residual: g.threshold_static_us,
        },
        bath: g.bath_filter.then(BathFilter::default),
    };
    let out = ctx.core(grass_search(&frames, &spec, &gc))?;

    let mut columns: Vec<String> =
        ["start", "cost", "feasible", "duration_us", "iterations", "static_residual_us"].map(String::from).to_vec();
    columns.extend((0..=g.n_pulses).map(|k| format!("spacing_{k}_us")));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut rec = ctx.record(&cols);
    for r in &out.results {
        let mut row = vec![
            r.start as f64,
            r.cost.total,
            if r.feasible { 1.0 } else { 0.0 },
            r.total_duration,
            r.iterations as f64,
            r.cost.static_residual,
        ];
        row.extend(&r.spacings);
        rec.push(row);
    }
    let n_feasible = out.results.iter().filter(|r| r.feasible).count();
    rec.set("n_feasible", n_feasible as f64);
    rec.set("n_starts", out.results.len() as f64);
    if let Some(best) = out.best.map(|i| &out.results[i]) {
        let check = ctx.core(cu_gate_check(&best.spacings, &frames[target], &zprime))?;
        rec.set("best_cost", best.cost.total);
        rec.set("best_duration_us", best.total_duration);
        rec.set("best_is_cu", if check.is_cu { 1.0 } else { 0.0 });
        rec.set("best_infidelity_plus", check.infidelity_plus);
        rec.set("best_infidelity_minus", check.infidelity_minus);
    }
    Ok((rec, n_feasible > 0))
}

fn ramsey(ctx: &Ctx) -> CliResult<ResultRecord> {
    let lib = ctx.library(Realization::Ideal, true)?;
    let t = ctx.sweep("t_us", (0.0, 255.75, 1024))?;
    let y: Vec<f64> = t
        .par_iter()
        .map(|&ti| ramsey_signal(&lib, ti))
        .collect::<spinreg::Result<_>>()
        .map_err(|source| CliError::Core { command: ctx.cmd.name(), source })?;
    let mut rec = ctx.record(&["t_us", "signal"]);
    for (&ti, &yi) in t.iter().zip(&y) {
        rec.push(vec![ti, yi]);
    }
    let (wp, wm) = ctx.frame(0)?.frequencies_khz();
    rec.set("omega_plus_khz", wp);
    rec.set("omega_minus_khz", wm);
    if t.len() >= 4 {
        for (k, f) in dominant_frequencies(&t, &y, 2).iter().enumerate() {
            rec.set(&format!("peak_{}_khz", k + 1), f * 1000.0);
        }
    }
    ctx.apply_fit(&mut rec, ctx.fit_kind(FitKind::None), &t, &y, 1000.0)?;
    Ok(rec)
}

fn hahn_nuc(ctx: &Ctx) -> CliResult<ResultRecord> {
    let lib = ctx.library(Realization::Ideal, true)?;
    let t = ctx.sweep("t_us", (0.0, 100.0, 401))?;
    let hn = ctx.cfg.hahn_nuc;
    let reg = &lib.register;
    let z = reg.observable(Pauli::I, Pauli::Z, Pauli::I);
    let y: Vec<f64> = t
        .par_iter()
        .map(|&ti| {
            let cx = lib.build(GateKind::CxEn)?;
            let flip = GateOp::PulsePi { target: Qubit::Er2, axis: PulsePhase::X };
            let mut ops = cx.clone();
            ops.extend([GateOp::Wait(ti / 2.0), flip.clone(), GateOp::Wait(ti / 2.0), flip]);
            ops.extend(cx);
            let s = apply_circuit(&RegisterState::mixed_nucleus(0, 0)?, &simplify(ops), reg)?;
            let env = hn.t2_us.map_or(1.0, |t2| (-(ti / t2).powf(hn.stretch_n)).exp());
            Ok(s.expect(&z) * env)
        })
        .collect::<spinreg::Result<_>>()
        .map_err(|source| CliError::Core { command: ctx.cmd.name(), source })?;
    let mut rec = ctx.record(&["t_us", "signal"]);
    for (&ti, &yi) in t.iter().zip(&y) {
        rec.push(vec![ti, yi]);
    }
    ctx.apply_fit(&mut rec, ctx.fit_kind(FitKind::None), &t, &y, 1000.0)?;
    Ok(rec)
}

fn circuit(ctx: &Ctx) -> CliResult<ResultRecord> {
    ctx.no_sweep()?;
    let c = &ctx.cfg.circuit;
    // Pulse sequences act through the nuclear precession, so they always carry the frame.
    let realization: Realization = c.realization.into();
    let lib = ctx.library(realization, c.precess || realization == Realization::Pulse)?;
    let noise = c.noisy.then_some(&ctx.cfg.noise);
    let mut rec;
    match c.name {
        CircuitName::BellEe | CircuitName::BellEn => {
            let corr = if c.name == CircuitName::BellEe {
                ctx.core(bell_ee_correlations(&lib, noise))?
            } else {
                if c.noisy {
                    return Err(ConfigError::Invalid {
                        field: "circuit.noisy".into(),
                        reason: "the electron-nuclear Bell state has a budget model only; use `budget`".into(),
                    }
                    .into());
                }
                ctx.core(bell_en_correlations(&lib))?
            };
            rec = ctx.record(&["xx", "yy", "zz", "fidelity"]);
            rec.push(vec![corr.xx, corr.yy, corr.zz, corr.bell_fidelity()]);
        }
        CircuitName::RemoteReadout => {
            rec = ctx.record(&["fidelity"]);
            rec.push(vec![ctx.core(remote_readout_fidelity(&lib, noise))?]);
        }
        CircuitName::SwapSquared => {
            rec = ctx.record(&["fidelity"]);
            rec.push(vec![ctx.core(swap_squared_fidelity(&lib, noise))?]);
        }
        CircuitName::Gates => {
            let block = |kind| -> CliResult<_> {
                let u = ctx.core(circuit_unitary(&ctx.core(lib.build(kind))?, &lib.register))?;
                Ok(en_block(&u, &lib.register, 0))
            };
            let cz = block(GateKind::CzEn)?;
            let cu = block(GateKind::CuEn)?;
            let sw = block(GateKind::SwapEn)?;
            let values = [
                unitary_infidelity(&cz, &(reference_cz() * nuclear_s_prime(lib.cz_orientation))),
                unitary_infidelity(&cu, &reference_cu()),
                unitary_infidelity(&sw, &reference_swap()),
                unitary_infidelity(&(sw * sw), &nalgebra::Matrix4::identity()),
            ];
            rec = ctx.record(&["cz_en", "cu_en", "swap_en", "swap_en_squared"]);
            rec.push(values.to_vec());
        }
    }
    Ok(rec)
}

fn qnd(ctx: &Ctx) -> CliResult<ResultRecord> {
    ctx.no_sweep()?;
    let cfg = ctx.cfg;
    let q = cfg.qnd;
    let model = QndModel {
        p_err: cfg.noise.p_err,
        f_read: cfg.noise.f_read2,
        gate_contrast: (q.gate_contrast != 1.0).then_some(q.gate_contrast),
    };
    let t1 = q.t1_s.zip(q.shot_duration_s);
    let mut rec = if t1.is_some() {
        ctx.record(&["round", "fidelity", "t1_limit"])
    } else {
        ctx.record(&["round", "fidelity"])
    };
    for k in 1..=q.rounds {
        let f = ctx.core(qnd_analysis(q.rounds, &model, QndPolicy::PerRound(k)))?.fidelity;
        let mut row = vec![k as f64, f];
        if let Some((t1, shot)) = t1 {
            row.push(ctx.core(t1_limited_fidelity(k, shot, t1))?);
        }
        rec.push(row);
    }
    let ps = ctx.core(qnd_analysis(q.rounds, &model, QndPolicy::PostSelect))?;
    let maj = ctx.core(qnd_analysis(q.rounds, &model, QndPolicy::Majority))?;
    rec.set("post_select_fidelity", ps.fidelity);
    rec.set("post_select_acceptance", ps.acceptance);
    rec.set("majority_fidelity", maj.fidelity);
    rec.set("round_fidelity", model.round_fidelity());
    Ok(rec)
}

fn pairstats(ctx: &Ctx) -> CliResult<ResultRecord> {
    let p = ctx.cfg.pairstats;
    let model = spinreg::ensemble::ImplantModel { seed: ctx.cfg.seed, ..p.implant };
    let thresholds = ctx.sweep("threshold_khz", (0.5, 20.0, 40))?;
    let (prob, stats) = ctx.core(pair_statistics(&model, p.threshold_khz, p.n_ions))?;
    let bounds = ctx.core(distance_bounds(p.threshold_khz, model.g_eff, p.r_min_nm))?;
    let mut rec = ctx.record(&["threshold_khz", "fraction_above"]);
    for &t in &thresholds {
        rec.push(vec![t, stats.fraction_above(t)]);
    }
    rec.set("probability", prob);
    rec.set("threshold_khz", p.threshold_khz);
    rec.set("r_max_nm", bounds.r_max);
    rec.set("r_min_nm", bounds.r_min);
    rec.set("n_ions", p.n_ions as f64);
    if let Some(m) = stats.quantile(0.5) {
        rec.set("median_max_j_khz", m);
    }
    Ok(rec)
}

fn set_noise_field(b: &mut NoiseBudget, name: &str, v: f64) -> Option<()> {
    let slot = match name {
        "p_xy6_er1" => &mut b.p_xy6_er1,
        "p_xy8_er2" => &mut b.p_xy8_er2,
        "p_cz" => &mut b.p_cz,
        "p_cx" => &mut b.p_cx,
        "f_read1" => &mut b.f_read1,
        "f_read2" => &mut b.f_read2,
        "p_err" => &mut b.p_err,
        _ => return None,
    };
    *slot = v;
    Some(())
}

fn budget(ctx: &Ctx) -> CliResult<ResultRecord> {
    let outputs = ["bell_ee", "remote_readout", "swap_squared", "bell_en", "bell_en_xx", "bell_en_yy", "bell_en_zz"];
    let (variable, values) = match &ctx.cfg.sweep {
        Some(s) => (Some(s.variable.as_str()), s.values()),
        None => (None, vec![f64::NAN]),
    };
    let mut columns: Vec<&str> = variable.into_iter().collect();
    columns.extend(outputs);
    let mut rec = ctx.record(&columns);
    for v in values {
        let mut b = ctx.cfg.noise;
        if let Some(name) = variable {
            set_noise_field(&mut b, name, v).ok_or_else(|| ConfigError::Invalid {
                field: "sweep.variable".into(),
                reason: format!("`{name}` is not a noise-budget field"),
            })?;
        }
        let f = |k| ctx.core(fidelity_budget(&b, k));
        let en = f(CircuitKind::BellEn)?;
        let mut row: Vec<f64> = variable.map(|_| v).into_iter().collect();
        row.extend([
            f(CircuitKind::BellEe)?.fidelity,
            f(CircuitKind::RemoteReadout)?.fidelity,
            f(CircuitKind::SwapSquared)?.fidelity,
            en.fidelity,
            en.xx.unwrap_or(f64::NAN),
            en.yy.unwrap_or(f64::NAN),
            en.zz.unwrap_or(f64::NAN),
        ]);
        rec.push(row);
    }
    Ok(rec)
}
