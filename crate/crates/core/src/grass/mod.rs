// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Gradient ascent over inter-pulse spacings (GRASS) for conditional nuclear gates.

use crate::error::Result;
use crate::seqsim::{quarter_turn_resonance, ZPrimeFrame, DEFAULT_WINDOW};
use crate::spinsys::{known_nucleus, precession_frame, PrecessionFrame};

mod cost;
mod cu;
mod optimize;

pub use cost::{
    cost_decouple, cost_static, cost_target, evaluate, grad_total, CostBreakdown, CostSpec,
    DecoupleTerm, TargetTerm,
};
pub use cu::{cu_gate_check, cu_targets, CuReport, CU_MAX_INFIDELITY};
pub use optimize::{
    grass_optimize, grass_search, select_best, sort_results, BathFilter, GrassConfig,
    GrassOutcome, GrassResult, Thresholds,
};

/// Eight-pulse CU sequence for Nuc-1 that also decouples Nuc-2 (us).
pub const REFERENCE_CU_SPACINGS: [f64; 9] =
    [1.928, 5.392, 7.056, 7.874, 7.380, 2.926, 4.822, 7.116, 2.086];

/// CU design problem for the reference register: targets `X'`/`Z'` on Nuc-1 with Nuc-2
/// decoupled and unit weights.
#[derive(Clone, Debug)]
pub struct ReferenceProblem {
    /// Nuc-1, Nuc-2.
    pub frames: Vec<PrecessionFrame<f64>>,
    pub spec: CostSpec<f64>,
    pub zprime: ZPrimeFrame<f64>,
}

pub fn reference_problem() -> Result<ReferenceProblem> {
    let frame = |name: &str| precession_frame(&known_nucleus::<f64>(name).expect("built-in nucleus").1);
    let frames = vec![frame("Nuc-1")?, frame("Nuc-2")?];
    let zprime = quarter_turn_resonance(&frames[0], DEFAULT_WINDOW)?.zprime;
    let (plus, minus) = cu_targets(&zprime);
    let spec = CostSpec {
        targets: vec![TargetTerm { nucleus: 0, plus, minus, weight: 1.0 }],
        decouple: vec![DecoupleTerm { nucleus: 1, weight: 1.0 }],
        static_weight: 1.0,
    };
    Ok(ReferenceProblem { frames, spec, zprime })
}
