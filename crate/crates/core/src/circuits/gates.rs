// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate operations, circuit application and gate constructions.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix4;
use num_complex::Complex64 as C;

use crate::circuits::optical::{optical_excite_channel, OpticalMode};
use crate::circuits::register::{embed, m2, Pauli, Qubit, Register, RegisterState, DRIFT_TOL, M2, M8};
use crate::error::{Error, Result};
use crate::grass::REFERENCE_CU_SPACINGS;
use crate::spinsys::{known_nucleus, precession_frame, PrecessionFrame};
use crate::su2::vec3;
use crate::seqsim::{
    calibrate_offset, conditional_decompose, effective_interaction_time, conditional_propagators, quarter_turn_resonance, ZPrimeFrame, NamedSequence, DEFAULT_WINDOW, PulsePhase, PulseSequence,
    TimedSequence, TogglingPair,
};
use crate::Su2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// One element of a register circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum GateOp {
    /// `exp(-i sign pi/4 sigma_axis)` on an electron.
    PulseHalfPi { target: Qubit, axis: PulsePhase, sign: Sign },
    /// `exp(-i pi/2 sigma_axis)` on an electron.
    PulsePi { target: Qubit, axis: PulsePhase },
    /// Frame update `exp(-i angle Z / 2)` on an electron.
    PhaseShift { target: Qubit, angle: f64 },
    /// Simultaneous pulse trains on Er-1 (`first`) and Er-2 (`second`).
    EESequencePair(TogglingPair<f64>),
    /// Pulse train on Er-2 with the nucleus precessing conditionally.
    ENSequence(PulseSequence<f64>),
    /// Instantaneous Er-2-controlled nuclear operation; the operators are in the `z'` frame.
    Conditional { on_zero: Su2, on_one: Su2 },
    /// Free evolution, us.
    Wait(f64),
    /// Non-selective Z measurement of an electron.
    MeasureZ(Qubit),
    /// Optical excitation of an electron, `n_pulses` times.
    OpticalExcite { target: Qubit, n_pulses: u32 },
    /// Depolarizing channel with contrast `contrast` on the listed qubits.
    Depolarize { qubits: Vec<Qubit>, contrast: f64 },
}

impl GateOp {
    pub fn half_pi(target: Qubit, axis: PulsePhase, sign: Sign) -> Self {
        GateOp::PulseHalfPi { target, axis, sign }
    }

    /// Duration in us; instantaneous operations take zero time.
    pub fn duration(&self) -> f64 {
        match self {
            GateOp::EESequencePair(p) => p.window,
            GateOp::ENSequence(s) => s.total_duration(),
            GateOp::Wait(t) => *t,
            _ => 0.0,
        }
    }
}

pub fn circuit_duration(ops: &[GateOp]) -> f64 {
    ops.iter().map(GateOp::duration).sum()
}

fn axis_vec(a: PulsePhase) -> [f64; 3] {
    match a {
        PulsePhase::X => [1.0, 0.0, 0.0],
        PulsePhase::Y => [0.0, 1.0, 0.0],
    }
}

fn electron(target: Qubit) -> Result<Qubit> {
    if target.is_electron() {
        Ok(target)
    } else {
        Err(Error::InvalidTarget("the nucleus has no direct drive or readout".into()))
    }
}

fn pulse_m2(axis: PulsePhase, angle: f64) -> M2 {
    m2(&Su2::rotation(axis_vec(axis), angle))
}

/// Timed pulses `(time, qubit, phase)` sorted by time.
fn pulse_events(trains: &[(&PulseSequence<f64>, f64, Qubit)]) -> Vec<(f64, Qubit, PulsePhase)> {
    let mut ev: Vec<(f64, Qubit, PulsePhase)> = trains
        .iter()
        .flat_map(|(seq, start, q)| {
            seq.pulse_times()
                .into_iter()
                .zip(seq.phases().iter().copied())
                .map(move |(t, p)| (t + start, *q, p))
        })
        .collect();
    ev.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times"));
    ev
}

fn timed_unitary(reg: &Register, events: &[(f64, Qubit, PulsePhase)], window: f64) -> Result<M8> {
    let mut u = M8::identity();
    let mut t = 0.0;
    for &(tp, q, ph) in events {
        u = reg.free_evolution(tp - t)? * u;
        u = embed(q, &pulse_m2(ph, PI)) * u;
        t = tp;
    }
    Ok(reg.free_evolution(window - t)? * u)
}

/// `exp(-i pi J t Z1 Z2)` with `J` in kHz and `t` in us.
fn ising(j_khz: f64, t: f64) -> M8 {
    let phase = PI * j_khz * t / 1000.0;
    M8::from_fn(|i, k| {
        if i != k {
            return C::new(0.0, 0.0);
        }
        let z1 = if i & 4 == 0 { 1.0 } else { -1.0 };
        let z2 = if i & 2 == 0 { 1.0 } else { -1.0 };
        C::from_polar(1.0, -phase * z1 * z2)
    })
}

/// Unitary of a coherent operation, or `None` for channels.
pub fn op_unitary(op: &GateOp, reg: &Register) -> Result<Option<M8>> {
    let u = match op {
        GateOp::PulseHalfPi { target, axis, sign } => {
            embed(electron(*target)?, &pulse_m2(*axis, sign.value() * FRAC_PI_2))
        }
        GateOp::PulsePi { target, axis } => embed(electron(*target)?, &pulse_m2(*axis, PI)),
        GateOp::PhaseShift { target, angle } => {
            embed(electron(*target)?, &m2(&Su2::rotation([0.0, 0.0, 1.0], *angle)))
        }
        GateOp::EESequencePair(pair) => {
            let ev = pulse_events(&[
                (&pair.first.seq, pair.first.start, Qubit::Er1),
                (&pair.second.seq, pair.second.start, Qubit::Er2),
            ]);
            // The Ising term is diagonal and commutes with the branch-conditional nuclear
            // precession, so it factors out as the toggling-frame phase.
            let free = Register { j_khz: 0.0, ..reg.clone() };
            let t_int = effective_interaction_time(pair).t_int;
            timed_unitary(&free, &ev, pair.window)? * ising(reg.j_khz, t_int)
        }
        GateOp::ENSequence(seq) => {
            if reg.nuc.is_none() {
                return Err(Error::InvalidTarget("ENSequence needs a nuclear precession frame".into()));
            }
            let ev = pulse_events(&[(seq, 0.0, Qubit::Er2)]);
            timed_unitary(reg, &ev, seq.total_duration())?
        }
        GateOp::Conditional { on_zero, on_one } => {
            let p0 = M2::new(C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
            let p1 = M2::identity() - p0;
            let id = M2::identity();
            let a = reg.nuclear_from_primed(on_zero);
            let b = reg.nuclear_from_primed(on_one);
            id.kronecker(&p0).kronecker(&a) + id.kronecker(&p1).kronecker(&b)
        }
        GateOp::Wait(t) => reg.free_evolution(*t)?,
        GateOp::MeasureZ(_) | GateOp::OpticalExcite { .. } | GateOp::Depolarize { .. } => return Ok(None),
    };
    Ok(Some(u))
}

fn depolarize(rho: &M8, qubits: &[Qubit], p: f64) -> M8 {
    let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut ops: Vec<M8> = vec![M8::identity()];
    for q in qubits {
        let mut next = Vec::with_capacity(ops.len() * 4);
        for o in &ops {
            for p in paulis {
                next.push(embed(*q, &m2(&p.su2())) * o);
            }
        }
        ops = next;
    }
    let n = ops.len() as f64;
    let twirl = ops.iter().fold(M8::zeros(), |acc, o| acc + o * rho * o.adjoint()) / C::new(n, 0.0);
    rho * C::new(p, 0.0) + twirl * C::new(1.0 - p, 0.0)
}

/// Applies one operation.
pub fn apply_op(state: &RegisterState, op: &GateOp, reg: &Register) -> Result<RegisterState> {
    if let Some(u) = op_unitary(op, reg)? {
        return Ok(state.apply_unitary(&u));
    }
    let rho = state.density();
    let out = match op {
        GateOp::MeasureZ(q) => {
            let z = embed(electron(*q)?, &m2(&Su2::pauli_z()));
            (rho + z * rho * z) * C::new(0.5, 0.0)
        }
        GateOp::OpticalExcite { target, n_pulses } => {
            let mode = match electron(*target)? {
                Qubit::Er2 => OpticalMode::Er2Direct,
                _ => OpticalMode::Er1Remote,
            };
            return Ok(optical_excite_channel(state, *n_pulses, mode, reg));
        }
        GateOp::Depolarize { qubits, contrast } => {
            if !(contrast.abs() <= 1.0) {
                return Err(Error::InvalidParameter { field: "contrast", reason: "must lie in [-1, 1]".into() });
            }
            depolarize(&rho, qubits, *contrast)
        }
        _ => unreachable!("coherent operations handled above"),
    };
    Ok(RegisterState::Mixed(out))
}

/// Applies a circuit in order and checks norm/trace drift.
pub fn apply_circuit(state: &RegisterState, circuit: &[GateOp], reg: &Register) -> Result<RegisterState> {
    state.validate()?;
    let mut s = state.clone();
    for op in circuit {
        s = apply_op(&s, op, reg)?;
    }
    let d = s.trace_deviation();
    if d > DRIFT_TOL {
        return Err(Error::UnitarityDrift(d));
    }
    Ok(s)
}

/// Product of all coherent operations (errors on channels).
pub fn circuit_unitary(circuit: &[GateOp], reg: &Register) -> Result<M8> {
    let mut u = M8::identity();
    for op in circuit {
        match op_unitary(op, reg)? {
            Some(v) => u = v * u,
            None => return Err(Error::InvalidTarget("channel in a unitary circuit".into())),
        }
    }
    Ok(u)
}

/// Merges adjacent phase shifts and half-pi pulses on the same electron.
pub fn simplify(ops: Vec<GateOp>) -> Vec<GateOp> {
    let mut out: Vec<GateOp> = Vec::with_capacity(ops.len());
    for op in ops {
        match (out.last().cloned(), &op) {
            (Some(GateOp::PhaseShift { target: a, angle: x }), GateOp::PhaseShift { target: b, angle: y })
                if a == *b =>
            {
                out.pop();
                let mut s = (x + y) % (4.0 * PI);
                if s.abs() > 2.0 * PI {
                    s -= 4.0 * PI * s.signum();
                }
                if s.abs() > 1e-15 {
                    out.push(GateOp::PhaseShift { target: a, angle: s });
                }
            }
            (
                Some(GateOp::PulseHalfPi { target: a, axis: ax, sign: sa }),
                GateOp::PulseHalfPi { target: b, axis: bx, sign: sb },
            ) if a == *b && ax == *bx => {
                out.pop();
                // Equal signs give a pi pulse up to a global sign; opposite signs cancel.
                if sa == *sb {
                    out.push(GateOp::PulsePi { target: a, axis: ax });
                }
            }
            (Some(GateOp::PhaseShift { angle, .. }), _) if angle.abs() < 1e-15 => {
                out.pop();
                out.push(op);
            }
            _ => out.push(op),
        }
    }
    out
}

/// How conditional gates are realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Realization {
    /// Exact instantaneous conditional unitaries.
    Ideal,
    /// Pulse sequences (XY-4 for CZ, optimized sequence for CU).
    Pulse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum GateKind {
    CzEe,
    CzEn,
    CxEn,
    CuEn,
    SwapEn,
    SwapEe,
    /// Z-basis transfer between Er-2 and the nucleus.
    SwapEnZonly { to_nucleus: bool },
    /// Z-basis transfer between the electrons.
    SwapEeZonly { from: Qubit },
}

/// Electron-electron CZ timing: XY-`n1` on Er-1 delayed by `offset`, XY-`n2` on Er-2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EeTiming {
    pub n1: usize,
    pub tau1: f64,
    pub n2: usize,
    pub tau2: f64,
    pub offset: f64,
}

impl Default for EeTiming {
    fn default() -> Self {
        Self { n1: 6, tau1: 6.220, n2: 8, tau2: 6.208, offset: 2.3 }
    }
}

impl EeTiming {
    pub fn pair(&self) -> Result<TogglingPair<f64>> {
        TogglingPair::cz_ee(self.n1, self.tau1, self.n2, self.tau2, self.offset)
    }

    /// Same timing with the offset solved so that `T_int = 1/(4J)`.
    pub fn calibrated(&self, j_khz: f64) -> Result<Self> {
        let first = NamedSequence::xy(self.n1, self.tau1).to_sequence()?;
        let second = TimedSequence::new(NamedSequence::xy(self.n2, self.tau2).to_sequence()?, 0.0);
        let target = 1000.0 / (4.0 * j_khz);
        let hi = 2.0 * self.tau1.min(self.tau2);
        let offset = calibrate_offset(&first, &second, target, (0.0, hi))?;
        Ok(Self { offset, ..*self })
    }
}

/// Everything needed to build gates for one register.
#[derive(Clone, Debug, PartialEq)]
pub struct GateLibrary {
    pub register: Register,
    pub realization: Realization,
    /// XY-4 half-spacing for CZ_en, us.
    pub tau0: f64,
    /// +1 if the XY-4 `+`-branch rotation is positive about `z'`, -1 otherwise.
    pub cz_orientation: f64,
    /// Optimized CU spacings, us.
    pub cu_spacings: Option<Vec<f64>>,
    pub ee: EeTiming,
}

fn rz(angle: f64) -> Su2 {
    Su2::rotation([0.0, 0.0, 1.0], angle)
}

fn phase(target: Qubit, angle: f64) -> GateOp {
    GateOp::PhaseShift { target, angle }
}

fn xy_phases(n: usize) -> Vec<PulsePhase> {
    NamedSequence::xy(n, 1.0f64).phases()
}

/// Rz(a) Ry(b) Rz(c) decomposition of an electron SU(2) element as frame updates and
/// X half-pi pulses, in time order.
pub fn electron_local_ops(target: Qubit, u: &Su2) -> Vec<GateOp> {
    let s = u.to_special();
    let (u00, u10, u11) = (s.m[0][0], s.m[1][0], s.m[1][1]);
    let b = 2.0 * u10.norm().atan2(u00.norm());
    let (a, c) = if u10.norm() < 1e-12 {
        (2.0 * u11.arg(), 0.0)
    } else if u00.norm() < 1e-12 {
        (2.0 * u10.arg(), 0.0)
    } else {
        let sum = 2.0 * u11.arg();
        let diff = 2.0 * u10.arg();
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    let mut ops = vec![phase(target, c)];
    if b.abs() > 1e-12 {
        ops.push(GateOp::half_pi(target, PulsePhase::X, Sign::Plus));
        ops.push(phase(target, b));
        ops.push(GateOp::half_pi(target, PulsePhase::X, Sign::Minus));
    }
    ops.push(phase(target, a));
    simplify(ops.into_iter().filter(|o| !matches!(o, GateOp::PhaseShift { angle, .. } if angle.abs() < 1e-15)).collect())
}

type M4 = Matrix4<C>;

fn m4_cond(t0: &Su2, t1: &Su2) -> M4 {
    let mut m = M4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = t0.m[i][j];
            m[(2 + i, 2 + j)] = t1.m[i][j];
        }
    }
    m
}

fn m4_electron(u: &Su2) -> M4 {
    m2(u).kronecker(&M2::identity())
}

/// Conditional targets `(on e=0, on e=1)` of CZ_en in the `z'` frame;
/// `orientation` is the sign of the `+`-branch rotation about `z'`.
fn cz_en_targets(orientation: f64) -> (Su2, Su2) {
    (rz(orientation * FRAC_PI_2), rz(-orientation * FRAC_PI_2))
}

fn cu_en_targets() -> (Su2, Su2) {
    (Su2::pauli_x(), Su2::pauli_z())
}

/// Net Pauli Z (if any) left on an electron by a pulse train's phases.
fn net_pulse_z(phases: &[PulsePhase]) -> Result<bool> {
    let u = phases.iter().fold(Su2::identity(), |acc, &p| Su2::rotation(axis_vec(p), PI) * acc);
    if u.overlap(&Su2::identity()) > 4.0 - 1e-9 {
        Ok(false)
    } else if u.overlap(&Su2::pauli_z()) > 4.0 - 1e-9 {
        Ok(true)
    } else {
        Err(Error::InvalidTarget("pulse train leaves a net electron flip".into()))
    }
}

/// Measured electron-electron coupling, kHz.
pub const REFERENCE_J_KHZ: f64 = 5.40;

impl GateLibrary {
    /// Library for the reference register (Nuc-1, measured coupling, published CU
    /// sequence). With `precess` false the nucleus is frozen outside conditional gates.
    pub fn reference(realization: Realization, precess: bool) -> Result<Self> {
        let (_, params) = known_nucleus::<f64>("Nuc-1").expect("built-in nucleus");
        let frame = precession_frame(&params)?;
        let res = quarter_turn_resonance(&frame, DEFAULT_WINDOW)?;
        let register = Register::new(REFERENCE_J_KHZ, precess.then_some(frame), res.zprime);
        let mut lib = Self::new(register, realization, res.tau0);
        lib.cz_orientation = cz_orientation(&frame, res.tau0, &res.zprime)?;
        lib.cu_spacings = Some(REFERENCE_CU_SPACINGS.to_vec());
        Ok(lib)
    }

    pub fn new(register: Register, realization: Realization, tau0: f64) -> Self {
        Self { register, realization, tau0, cz_orientation: 1.0, cu_spacings: None, ee: EeTiming::default() }
    }

    /// Phase fix making an Er-2-conditional pulse sequence match `(t0, t1)` up to a
    /// global phase: returns the sequence op followed by a frame update on Er-2.
    fn conditional_sequence(&self, seq: PulseSequence<f64>, targets: (Su2, Su2)) -> Result<Vec<GateOp>> {
        let op = GateOp::ENSequence(seq);
        let reg = Register { j_khz: 0.0, ..self.register.clone() };
        let u = op_unitary(&op, &reg)?.expect("coherent");
        // Er-1 in |0>: block of (Er-2, nucleus) in the primed basis.
        let r = m2(&reg.zprime.rotation);
        let rr = M2::identity().kronecker(&r);
        let block = rr.adjoint() * u.fixed_view::<4, 4>(0, 0).into_owned() * rr;
        let tr = |e: usize, t: &Su2| -> C {
            let mut s = C::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    s += block[(2 * e + i, 2 * e + j)] * t.m[i][j].conj();
                }
            }
            s
        };
        let off = (block.fixed_view::<2, 2>(0, 2).norm() + block.fixed_view::<2, 2>(2, 0).norm()) / 2.0;
        if off > 0.5 {
            return Err(Error::InvalidTarget("sequence flips the electron".into()));
        }
        let (p0, p1) = (tr(0, &targets.0).arg(), tr(1, &targets.1).arg());
        Ok(vec![op, phase(Qubit::Er2, p0 - p1)])
    }

    fn cz_en(&self) -> Result<Vec<GateOp>> {
        let (t0, t1) = cz_en_targets(self.cz_orientation);
        let mut ops = match self.realization {
            Realization::Ideal => vec![GateOp::Conditional { on_zero: t0, on_one: t1 }],
            Realization::Pulse => {
                let n = NamedSequence::xy(4, self.tau0);
                self.conditional_sequence(n.to_sequence()?, (t0, t1))?
            }
        };
        // exp(-i o pi/4 Z Z') = CZ (S (x) S')^o up to phase; undo the electron part.
        ops.push(phase(Qubit::Er2, -self.cz_orientation * FRAC_PI_2));
        Ok(simplify(ops))
    }

    fn cu_en(&self) -> Result<Vec<GateOp>> {
        let (t0, t1) = cu_en_targets();
        match self.realization {
            Realization::Ideal => Ok(vec![GateOp::Conditional { on_zero: t0, on_one: t1 }]),
            Realization::Pulse => {
                let sp = self.cu_spacings.clone().ok_or_else(|| Error::MissingGrassSequence("CU_en".into()))?;
                let n = sp.len() - 1;
                let seq = PulseSequence::with_phases(sp, xy_phases(n))?;
                self.conditional_sequence(seq, (t0, t1))
            }
        }
    }

    fn hadamard(target: Qubit) -> Vec<GateOp> {
        // X Ry(pi/2) = (X + Z)/sqrt 2.
        vec![GateOp::half_pi(target, PulsePhase::Y, Sign::Plus), GateOp::PulsePi { target, axis: PulsePhase::X }]
    }

    fn cx_en(&self) -> Result<Vec<GateOp>> {
        let mut ops = vec![GateOp::half_pi(Qubit::Er2, PulsePhase::Y, Sign::Minus)];
        ops.extend(self.cz_en()?);
        ops.push(GateOp::half_pi(Qubit::Er2, PulsePhase::Y, Sign::Plus));
        Ok(simplify(ops))
    }

    fn cz_ee(&self) -> Result<Vec<GateOp>> {
        let timing = match self.realization {
            Realization::Ideal => self.ee.calibrated(self.register.j_khz)?,
            Realization::Pulse => self.ee,
        };
        let pair = timing.pair()?;
        let z1 = net_pulse_z(pair.first.seq.phases())?;
        let z2 = net_pulse_z(pair.second.seq.phases())?;
        let fix = |z: bool| if z { PI - FRAC_PI_2 } else { -FRAC_PI_2 };
        Ok(vec![
            GateOp::EESequencePair(pair),
            phase(Qubit::Er1, fix(z1)),
            phase(Qubit::Er2, fix(z2)),
        ])
    }

    fn cnot_ee(&self, control: Qubit) -> Result<Vec<GateOp>> {
        let target = if control == Qubit::Er1 { Qubit::Er2 } else { Qubit::Er1 };
        let mut ops = vec![GateOp::half_pi(target, PulsePhase::Y, Sign::Minus)];
        ops.extend(self.cz_ee()?);
        ops.push(GateOp::half_pi(target, PulsePhase::Y, Sign::Plus));
        Ok(ops)
    }

    /// Full Er-2 / nucleus SWAP: `L3 CZ L2 CU L1 CZ L0` with electron-only locals.
    fn swap_en(&self) -> Result<Vec<GateOp>> {
        let cz = {
            let (t0, t1) = cz_en_targets(self.cz_orientation);
            m4_electron(&rz(-self.cz_orientation * FRAC_PI_2)) * m4_cond(&t0, &t1)
        };
        let cu = {
            let (t0, t1) = cu_en_targets();
            m4_cond(&t0, &t1)
        };
        let mut swap = M4::zeros();
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(i, j)] = C::new(1.0, 0.0);
        }
        let h = FRAC_PI_2;
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        let cands: Vec<(Su2, Vec<GateOp>)> = vec![
            (Su2::identity(), vec![]),
            (Su2::rotation(y, h), vec![GateOp::half_pi(Qubit::Er2, PulsePhase::Y, Sign::Plus)]),
            (Su2::rotation(y, -h), vec![GateOp::half_pi(Qubit::Er2, PulsePhase::Y, Sign::Minus)]),
            (Su2::rotation(x, h), vec![GateOp::half_pi(Qubit::Er2, PulsePhase::X, Sign::Plus)]),
            (Su2::rotation(x, -h), vec![GateOp::half_pi(Qubit::Er2, PulsePhase::X, Sign::Minus)]),
        ];
        for (l0, o0) in &cands {
            for (l1, o1) in &cands {
                for (l2, o2) in &cands {
                    let body = cz * m4_electron(l2) * cu * m4_electron(l1) * cz * m4_electron(l0);
                    let rest = swap * body.adjoint();
                    // rest must be L3 (x) I.
                    let l3 = [
                        [(rest[(0, 0)] + rest[(1, 1)]) / 2.0, (rest[(0, 2)] + rest[(1, 3)]) / 2.0],
                        [(rest[(2, 0)] + rest[(3, 1)]) / 2.0, (rest[(2, 2)] + rest[(3, 3)]) / 2.0],
                    ];
                    let l3 = Su2::new(l3);
                    if (m4_electron(&l3) - rest).norm() < 1e-9 && l3.unitarity_deviation() < 1e-9 {
                        let mut ops = o0.clone();
                        ops.extend(self.cz_en()?);
                        ops.extend(o1.clone());
                        ops.extend(self.cu_en()?);
                        ops.extend(o2.clone());
                        ops.extend(self.cz_en()?);
                        ops.extend(electron_local_ops(Qubit::Er2, &l3));
                        return Ok(simplify(ops));
                    }
                }
            }
        }
        Err(Error::InvalidTarget("no SWAP decomposition with the available locals".into()))
    }

    fn swap_en_zonly(&self, to_nucleus: bool) -> Result<Vec<GateOp>> {
        // CX with the nucleus as control, written as H CZ H on Er-2, then X on Er-2.
        let mut cx = Self::hadamard(Qubit::Er2);
        cx.extend(self.cz_en()?);
        cx.extend(Self::hadamard(Qubit::Er2));
        cx.push(GateOp::PulsePi { target: Qubit::Er2, axis: PulsePhase::X });
        let cu = self.cu_en()?;
        let ops = if to_nucleus { [cx, cu].concat() } else { [cu, cx].concat() };
        Ok(simplify(ops))
    }

    fn swap_ee(&self) -> Result<Vec<GateOp>> {
        let mut ops = self.cnot_ee(Qubit::Er1)?;
        ops.extend(self.cnot_ee(Qubit::Er2)?);
        ops.extend(self.cnot_ee(Qubit::Er1)?);
        Ok(simplify(ops))
    }

    fn swap_ee_zonly(&self, from: Qubit) -> Result<Vec<GateOp>> {
        let other = match from {
            Qubit::Er1 => Qubit::Er2,
            Qubit::Er2 => Qubit::Er1,
            Qubit::Nuc => return Err(Error::InvalidTarget("electron transfer source must be an electron".into())),
        };
        // CNOT(dest -> src) then CNOT(src -> dest) leaves dest = src for any initial dest.
        let mut ops = self.cnot_ee(other)?;
        ops.extend(self.cnot_ee(from)?);
        Ok(simplify(ops))
    }

    pub fn build(&self, kind: GateKind) -> Result<Vec<GateOp>> {
        match kind {
            GateKind::CzEe => self.cz_ee(),
            GateKind::CzEn => self.cz_en(),
            GateKind::CxEn => self.cx_en(),
            GateKind::CuEn => self.cu_en(),
            GateKind::SwapEn => self.swap_en(),
            GateKind::SwapEe => self.swap_ee(),
            GateKind::SwapEnZonly { to_nucleus } => self.swap_en_zonly(to_nucleus),
            GateKind::SwapEeZonly { from } => self.swap_ee_zonly(from),
        }
    }
}

/// Builds the pulse-level (or ideal) operation list for `kind`.
pub fn build_gate(kind: GateKind, lib: &GateLibrary) -> Result<Vec<GateOp>> {
    lib.build(kind)
}

/// Pure-state trace-overlap infidelity `1 - |Tr[U V^dagger]|^2 / d^2` of two unitaries.
pub fn unitary_infidelity<const D: usize>(u: &nalgebra::SMatrix<C, D, D>, v: &nalgebra::SMatrix<C, D, D>) -> f64 {
    let tr = (u * v.adjoint()).trace();
    1.0 - tr.norm_sqr() / (D * D) as f64
}

/// Restriction of an 8x8 unitary to `(Er-2, nucleus)` with Er-1 in `|e1>`, in the primed basis.
pub fn en_block(u: &M8, reg: &Register, e1: usize) -> M4 {
    let r = m2(&reg.zprime.rotation);
    let rr = M2::identity().kronecker(&r);
    rr.adjoint() * u.fixed_view::<4, 4>(4 * e1, 4 * e1).into_owned() * rr
}

/// `CZ (x) I` style reference matrices on `(Er-2, nucleus')`.
pub fn reference_cz() -> M4 {
    let mut m = M4::identity();
    m[(3, 3)] = C::new(-1.0, 0.0);
    m
}

pub fn reference_cu() -> M4 {
    let (t0, t1) = cu_en_targets();
    m4_cond(&t0, &t1)
}

pub fn reference_swap() -> M4 {
    let mut swap = M4::zeros();
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        swap[(i, j)] = C::new(1.0, 0.0);
    }
    swap
}

/// Nuclear `S'^o` byproduct of the CZ construction with orientation `o`.
pub fn nuclear_s_prime(orientation: f64) -> M4 {
    M2::identity().kronecker(&m2(&rz(orientation * FRAC_PI_2)))
}

/// Orientation of the XY-4 conditional rotation at `tau0` relative to `z'`.
pub fn cz_orientation(frame: &PrecessionFrame<f64>, tau0: f64, zprime: &ZPrimeFrame<f64>) -> Result<f64> {
    let seq = NamedSequence::xy(4, tau0).to_sequence()?;
    let d = conditional_decompose(&conditional_propagators(&seq, frame));
    Ok(if vec3::dot(d.q_plus, zprime.axis) >= 0.0 { 1.0 } else { -1.0 })
}
