// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: TOML with unit-bearing keys, defaults and validation.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinreg::circuits::{NoiseBudget, Realization};
use spinreg::ensemble::{ImplantModel, DEFAULT_R_MIN_NM};
use spinreg::seqsim::{NamedSequence, PulseSequence, DEFAULT_WINDOW};
use spinreg::spinsys::{known_nucleus, ElectronParams, OwnedNucleus, SpinSystem};
use spinreg::HyperfineParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown key `{key}` at line {line}, column {column}")]
    UnknownKey { key: String, line: usize, column: usize },
    #[error("missing required key `{0}`")]
    MissingRequired(String),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), reason: reason.into() }
}

pub const DEFAULT_SEED: u64 = 0x5eed;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub system: SystemConfig,
    #[serde(default)]
    pub sequence: SequenceConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub noise: NoiseBudget,
    #[serde(default)]
    pub resonance: ResonanceConfig,
    #[serde(default)]
    pub deer: DeerConfig,
    #[serde(default)]
    pub chevron: ChevronConfig,
    #[serde(default)]
    pub grass: GrassSection,
    #[serde(default)]
    pub circuit: CircuitConfig,
    #[serde(default)]
    pub hahn_nuc: HahnNucConfig,
    #[serde(default)]
    pub qnd: QndConfig,
    #[serde(default)]
    pub pairstats: PairstatsConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "default_electrons")]
    pub electrons: Vec<ElectronConfig>,
    /// Filled with the measured coupling for two electrons when absent.
    #[serde(default)]
    pub j_coupling_khz: Option<f64>,
    #[serde(default)]
    pub nuclei: Vec<NucleusConfig>,
}

fn default_electrons() -> Vec<ElectronConfig> {
    vec![ElectronConfig::default(); 2]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElectronConfig {
    pub mwg_freq_mhz: f64,
    pub t2_us: f64,
    pub stretch_n: f64,
    pub readout_fidelity: f64,
}

impl Default for ElectronConfig {
    fn default() -> Self {
        let e = ElectronParams::default();
        Self {
            mwg_freq_mhz: e.mwg_freq_mhz,
            t2_us: e.t2_envelope.0,
            stretch_n: e.t2_envelope.1,
            readout_fidelity: e.readout_fidelity,
        }
    }
}

/// A nucleus by tabulated name, with optional overrides. Untabulated names need all
/// three couplings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleusConfig {
    pub name: String,
    #[serde(default)]
    pub owner: Option<usize>,
    #[serde(default)]
    pub a_par_khz: Option<f64>,
    #[serde(default)]
    pub a_perp_khz: Option<f64>,
    #[serde(default)]
    pub larmor_khz: Option<f64>,
    #[serde(default)]
    pub larmor_scale: Option<f64>,
}

impl NucleusConfig {
    /// Resolved parameters; valid after [`RunConfig::resolve`].
    pub fn params(&self) -> HyperfineParams {
        HyperfineParams {
            a_par: self.a_par_khz.unwrap_or(f64::NAN),
            a_perp: self.a_perp_khz.unwrap_or(f64::NAN),
            omega_l: self.larmor_khz.unwrap_or(f64::NAN),
            larmor_scale: self.larmor_scale.unwrap_or(1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Hahn,
    Xy,
    Cpmg,
    /// Spacings listed in `spacings_us`.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceConfig {
    pub family: Family,
    pub n_pulses: usize,
    /// Half-spacing when `tau_us` is not swept.
    pub tau_us: f64,
    pub spacings_us: Option<Vec<f64>>,
    /// Probed electron; defaults to the last one. Only its nuclei contribute.
    pub electron: Option<usize>,
    /// Multiply by the probed electron's stretched-exponential envelope.
    pub envelope: bool,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self { family: Family::Xy, n_pulses: 8, tau_us: 6.208, spacings_us: None, electron: None, envelope: false }
    }
}

impl SequenceConfig {
    /// Sequence at half-spacing `tau` (ignored for explicit spacings).
    pub fn build(&self, tau: f64) -> spinreg::Result<PulseSequence<f64>> {
        match self.family {
            Family::Hahn => NamedSequence::hahn(tau).to_sequence(),
            Family::Xy => NamedSequence::xy(self.n_pulses, tau).to_sequence(),
            Family::Cpmg => NamedSequence::cpmg(self.n_pulses, tau).to_sequence(),
            Family::Explicit => PulseSequence::new(self.spacings_us.clone().unwrap_or_default()),
        }
    }
}

/// Evenly spaced sweep, endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepConfig {
    pub fn new(variable: &str, start: f64, stop: f64, points: usize) -> Self {
        Self { variable: variable.into(), start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.start + step * k as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceConfig {
    pub window_us: (f64, f64),
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self { window_us: DEFAULT_WINDOW }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeerConfig {
    /// Defaults to the system coupling.
    pub j_khz: Option<f64>,
    pub t_damp_us: Option<f64>,
    /// Standard deviation of seeded additive Gaussian noise.
    pub noise_sigma: f64,
}

impl Default for DeerConfig {
    fn default() -> Self {
        Self { j_khz: None, t_damp_us: Some(200.0), noise_sigma: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChevronConfig {
    pub n_pulses: Vec<usize>,
}

impl Default for ChevronConfig {
    fn default() -> Self {
        Self { n_pulses: vec![0, 2, 4, 8, 16, 32] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrassSection {
    /// Defaults to the first nucleus.
    pub target: Option<String>,
    /// Defaults to every other nucleus.
    pub decouple: Option<Vec<String>>,
    pub target_weight: f64,
    pub decouple_weight: f64,
    pub static_weight: f64,
    pub n_pulses: usize,
    pub n_starts: usize,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub min_spacing_us: f64,
    pub max_spacing_us: f64,
    pub threshold_target: f64,
    pub threshold_decouple: f64,
    pub threshold_static_us: f64,
    /// Discard sequences that dephase a seeded weakly coupled bath.
    pub bath_filter: bool,
}

impl Default for GrassSection {
    fn default() -> Self {
        let g = spinreg::grass::GrassConfig::<f64>::default();
        Self {
            target: None,
            decouple: None,
            target_weight: 1.0,
            decouple_weight: 1.0,
            static_weight: 1.0,
            n_pulses: g.n_pulses,
            n_starts: g.n_starts,
            learning_rate: g.learning_rate,
            max_iters: g.max_iters,
            grad_tol: g.grad_tol,
            min_spacing_us: g.bounds.0,
            max_spacing_us: g.bounds.1,
            threshold_target: g.thresholds.target,
            threshold_decouple: g.thresholds.decouple,
            threshold_static_us: g.thresholds.static_residual,
            bath_filter: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitName {
    BellEe,
    RemoteReadout,
    SwapSquared,
    BellEn,
    /// Electron-nuclear gate infidelities.
    Gates,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizationConfig {
    Ideal,
    Pulse,
}

impl From<RealizationConfig> for Realization {
    fn from(r: RealizationConfig) -> Self {
        match r {
            RealizationConfig::Ideal => Realization::Ideal,
            RealizationConfig::Pulse => Realization::Pulse,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitConfig {
    pub name: CircuitName,
    pub realization: RealizationConfig,
    /// Let the nucleus precess between conditional gates.
    pub precess: bool,
    /// Apply the contrast channels of the noise block.
    pub noisy: bool,
    /// CU spacings for the pulse realization; the published sequence is used for Nuc-1.
    pub cu_spacings_us: Option<Vec<f64>>,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            name: CircuitName::BellEe,
            realization: RealizationConfig::Ideal,
            precess: false,
            noisy: false,
            cu_spacings_us: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HahnNucConfig {
    /// Nuclear coherence envelope `exp(-(t/T2)^n)`; none when absent.
    pub t2_us: Option<f64>,
    pub stretch_n: f64,
}

impl Default for HahnNucConfig {
    fn default() -> Self {
        Self { t2_us: None, stretch_n: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QndConfig {
    pub rounds: usize,
    /// Contrast of the conditional gate preceding each readout (1 disables it).
    pub gate_contrast: f64,
    pub t1_s: Option<f64>,
    pub shot_duration_s: Option<f64>,
}

impl Default for QndConfig {
    fn default() -> Self {
        Self { rounds: 3, gate_contrast: NoiseBudget::default().p_xy6_er1, t1_s: None, shot_duration_s: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairstatsConfig {
    pub threshold_khz: f64,
    pub n_ions: usize,
    pub r_min_nm: f64,
    /// The run seed replaces `implant.seed`.
    pub implant: ImplantModel,
}

impl Default for PairstatsConfig {
    fn default() -> Self {
        Self { threshold_khz: 5.40, n_ions: 100_000, r_min_nm: DEFAULT_R_MIN_NM, implant: ImplantModel::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    None,
    DampedCosine,
    StretchedExp,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Per-command default when absent.
    pub kind: Option<FitKind>,
    pub fixed_n: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<Format>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

/// Parses, applies defaults and validates.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        let msg = e.message().to_string();
        if msg.starts_with("unknown field") {
            ConfigError::UnknownKey { key: backticked(&msg).unwrap_or(msg), line, column }
        } else if msg.starts_with("missing field") {
            ConfigError::MissingRequired(backticked(&msg).unwrap_or(msg))
        } else {
            ConfigError::Parse { line, column, message: msg }
        }
    })?;
    cfg.resolve()?;
    Ok(cfg)
}

pub fn load_config(path: &str) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    parse_config(&text)
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Fills tabulated nuclear parameters and the default coupling, then validates.
    pub fn resolve(&mut self) -> Result<(), ConfigError> {
        let sys = &mut self.system;
        if sys.electrons.len() == 2 && sys.j_coupling_khz.is_none() {
            sys.j_coupling_khz = Some(spinreg::circuits::REFERENCE_J_KHZ);
        }
        for (i, n) in sys.nuclei.iter_mut().enumerate() {
            match known_nucleus::<f64>(&n.name) {
                Some((owner, p)) => {
                    n.owner.get_or_insert(owner);
                    n.a_par_khz.get_or_insert(p.a_par);
                    n.a_perp_khz.get_or_insert(p.a_perp);
                    n.larmor_khz.get_or_insert(p.omega_l);
                    n.larmor_scale.get_or_insert(p.larmor_scale);
                }
                None => {
                    for (key, v) in [("a_par_khz", n.a_par_khz), ("a_perp_khz", n.a_perp_khz), ("larmor_khz", n.larmor_khz)] {
                        if v.is_none() {
                            return Err(invalid(
                                format!("system.nuclei[{i}].{key}"),
                                format!("required because `{}` is not a tabulated nucleus", n.name),
                            ));
                        }
                    }
                    n.owner.get_or_insert(sys.electrons.len().saturating_sub(1));
                    n.larmor_scale.get_or_insert(1.0);
                }
            }
        }
        self.validate()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let core = |field: &str, e: spinreg::Error| invalid(field, e.to_string());
        self.spin_system().map_err(|e| core("system", e))?;
        for (i, n) in self.system.nuclei.iter().enumerate() {
            n.params().validate().map_err(|e| core(&format!("system.nuclei[{i}]"), e))?;
        }

        let seq = &self.sequence;
        positive("sequence.tau_us", seq.tau_us)?;
        if let Some(sp) = &seq.spacings_us {
            for (i, &s) in sp.iter().enumerate() {
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(invalid(format!("sequence.spacings_us[{i}]"), format!("spacing must be >= 0, got {s}")));
                }
            }
        }
        match seq.family {
            Family::Explicit if seq.spacings_us.as_ref().is_none_or(|s| s.is_empty()) => {
                return Err(ConfigError::MissingRequired("sequence.spacings_us".into()));
            }
            Family::Hahn | Family::Explicit => {}
            Family::Xy | Family::Cpmg => {
                seq.build(seq.tau_us).map_err(|e| core("sequence.n_pulses", e))?;
            }
        }

        if let Some(e) = seq.electron {
            if e >= self.system.electrons.len() {
                return Err(invalid("sequence.electron", format!("electron {e} does not exist")));
            }
        }
        if let Some(s) = &self.sweep {
            if s.points == 0 {
                return Err(invalid("sweep.points", "sweep must have at least one point"));
            }
            if !(s.start.is_finite() && s.stop.is_finite()) {
                return Err(invalid("sweep", "range must be finite"));
            }
        }
        self.noise.validate().map_err(|e| core("noise", e))?;
        let (lo, hi) = self.resonance.window_us;
        if !(lo > 0.0 && hi > lo) {
            return Err(invalid("resonance.window_us", format!("need 0 < lo < hi, got ({lo}, {hi})")));
        }
        if let Some(j) = self.deer.j_khz {
            positive("deer.j_khz", j)?;
        }
        if let Some(t) = self.deer.t_damp_us {
            positive("deer.t_damp_us", t)?;
        }
        if !(self.deer.noise_sigma >= 0.0) {
            return Err(invalid("deer.noise_sigma", "must be >= 0"));
        }
        if self.chevron.n_pulses.is_empty() {
            return Err(invalid("chevron.n_pulses", "must be nonempty"));
        }
        let g = &self.grass;
        for (f, v) in [("grass.target_weight", g.target_weight), ("grass.decouple_weight", g.decouple_weight), ("grass.static_weight", g.static_weight)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(f, format!("weight must be >= 0, got {v}")));
            }
        }
        if g.n_starts == 0 {
            return Err(invalid("grass.n_starts", "must be >= 1"));
        }
        positive("grass.learning_rate", g.learning_rate)?;
        positive("grass.min_spacing_us", g.min_spacing_us)?;
        if !(g.max_spacing_us > g.min_spacing_us) {
            return Err(invalid("grass.max_spacing_us", "must exceed min_spacing_us"));
        }
        if let Some(sp) = &self.circuit.cu_spacings_us {
            PulseSequence::new(sp.clone()).map_err(|e| core("circuit.cu_spacings_us", e))?;
        }
        if let Some(t2) = self.hahn_nuc.t2_us {
            positive("hahn_nuc.t2_us", t2)?;
        }
        positive("hahn_nuc.stretch_n", self.hahn_nuc.stretch_n)?;
        let q = &self.qnd;
        if !(1..=spinreg::circuits::qnd::MAX_ROUNDS).contains(&q.rounds) {
            return Err(invalid("qnd.rounds", format!("must lie in 1..={}", spinreg::circuits::qnd::MAX_ROUNDS)));
        }
        if !(q.gate_contrast.abs() <= 1.0) {
            return Err(invalid("qnd.gate_contrast", "must lie in [-1, 1]"));
        }
        if q.t1_s.is_some() != q.shot_duration_s.is_some() {
            return Err(invalid("qnd.t1_s", "t1_s and shot_duration_s must be given together"));
        }
        let p = &self.pairstats;
        positive("pairstats.threshold_khz", p.threshold_khz)?;
        positive("pairstats.r_min_nm", p.r_min_nm)?;
        if p.n_ions == 0 {
            return Err(invalid("pairstats.n_ions", "must be >= 1"));
        }
        p.implant.validate().map_err(|e| core("pairstats.implant", e))?;
        if let Some(n) = self.fit.fixed_n {
            positive("fit.fixed_n", n)?;
        }
        Ok(())
    }

    pub fn spin_system(&self) -> spinreg::Result<SpinSystem> {
        let electrons = self
            .system
            .electrons
            .iter()
            .map(|e| ElectronParams {
                mwg_freq_mhz: e.mwg_freq_mhz,
                t2_envelope: (e.t2_us, e.stretch_n),
                readout_fidelity: e.readout_fidelity,
            })
            .collect();
        let nuclei = self
            .system
            .nuclei
            .iter()
            .map(|n| OwnedNucleus { owner: n.owner.unwrap_or(0), params: n.params() })
            .collect();
        SpinSystem::new(electrons, self.system.j_coupling_khz, nuclei)
    }

    /// Index of the nucleus called `name` (case-insensitive).
    pub fn nucleus_index(&self, name: &str) -> Option<usize> {
        self.system.nuclei.iter().position(|n| n.name.eq_ignore_ascii_case(name))
    }

    /// SHA-256 of the canonical JSON form, excluding the output block.
    pub fn hash(&self) -> String {
        let view = RunConfig { output: OutputConfig::default(), ..self.clone() };
        let bytes = serde_json::to_vec(&view).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
