// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form fidelity budgets and readout correction.

use crate::error::{invalid, Error, Result};

/// Contrast factors and readout parameters entering the fidelity budgets.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseBudget {
    /// Er-1 contrast after its XY-6 train.
    pub p_xy6_er1: f64,
    /// Er-2 contrast after its XY-8 train (sign ignored).
    pub p_xy8_er2: f64,
    /// Electron contrast over one electron-nuclear CZ.
    pub p_cz: f64,
    /// Electron contrast over one electron-nuclear CX/CU.
    pub p_cx: f64,
    pub f_read1: f64,
    pub f_read2: f64,
    /// Per-round flip probability of Er-2 under readout.
    pub p_err: f64,
}

impl Default for NoiseBudget {
    fn default() -> Self {
        Self { p_xy6_er1: 0.87, p_xy8_er2: -0.86, p_cz: 0.93, p_cx: 0.94, f_read1: 0.94, f_read2: 0.94, p_err: 0.08 }
    }
}

impl NoiseBudget {
    /// Every contrast, fidelity and probability equal to its noiseless value.
    pub fn ideal() -> Self {
        Self { p_xy6_er1: 1.0, p_xy8_er2: 1.0, p_cz: 1.0, p_cx: 1.0, f_read1: 1.0, f_read2: 1.0, p_err: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("p_xy6_er1", self.p_xy6_er1),
            ("p_xy8_er2", self.p_xy8_er2),
            ("p_cz", self.p_cz),
            ("p_cx", self.p_cx),
        ] {
            if !(v.abs() <= 1.0) {
                return Err(invalid(field, format!("contrast {v} outside [-1, 1]")));
            }
        }
        for (field, v) in [("f_read1", self.f_read1), ("f_read2", self.f_read2), ("p_err", self.p_err)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(field, format!("probability {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Circuits with a closed-form budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    BellEe,
    RemoteReadout,
    SwapSquared,
    BellEn,
}

/// Predicted fidelity and, for Bell circuits, the correlation magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BudgetValue {
    pub fidelity: f64,
    pub xx: Option<f64>,
    pub yy: Option<f64>,
    pub zz: Option<f64>,
}

impl BudgetValue {
    fn scalar(fidelity: f64) -> Self {
        Self { fidelity, xx: None, yy: None, zz: None }
    }

    fn bell(xx: f64, yy: f64, zz: f64) -> Self {
        Self { fidelity: (1.0 + xx + yy + zz) / 4.0, xx: Some(xx), yy: Some(yy), zz: Some(zz) }
    }
}

pub fn fidelity_budget(b: &NoiseBudget, kind: CircuitKind) -> Result<BudgetValue> {
    b.validate()?;
    let p1 = b.p_xy6_er1;
    let p2 = b.p_xy8_er2.abs();
    Ok(match kind {
        CircuitKind::BellEe => {
            let c = p1 * p2;
            BudgetValue::bell(c, c, c)
        }
        CircuitKind::RemoteReadout => BudgetValue::scalar((1.0 + p1 * b.f_read1 * (1.0 - b.p_err / 2.0)) / 2.0),
        CircuitKind::SwapSquared => BudgetValue::scalar((1.0 + b.p_cx.powi(2) * b.p_cz.powi(4)) / 2.0),
        CircuitKind::BellEn => {
            let e = p1.powi(2) * p2.powi(2);
            let zz = b.p_cz.powi(2) * b.p_cx * e;
            let xx = b.p_cz.powi(3) * b.p_cx.powi(2) * e;
            BudgetValue::bell(xx, xx, zz)
        }
    })
}

/// Readout-corrected expectation value.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Corrected {
    pub value: f64,
    /// The raw correction exceeded the physical range and was clamped.
    pub clamped: bool,
}

fn correction_factor(fidelities: &[f64]) -> Result<f64> {
    fidelities.iter().try_fold(1.0, |acc, &f| {
        if !(f > 0.5 && f <= 1.0) {
            return Err(Error::FidelityTooLow { what: "readout", fidelity: f });
        }
        Ok(acc / (2.0 * f - 1.0))
    })
}

/// Scales `raw` by `prod (2 F_i - 1)^-1`, clamping to `[-1, 1]`.
pub fn readout_correct(raw: f64, fidelities: &[f64]) -> Result<Corrected> {
    let v = raw * correction_factor(fidelities)?;
    Ok(Corrected { value: v.clamp(-1.0, 1.0), clamped: v.abs() > 1.0 })
}

/// Corrects a two-qubit Bell fidelity `(1 + XX + YY + ZZ)/4` whose correlations share
/// the same readout error.
pub fn readout_correct_bell(raw_fidelity: f64, fidelities: &[f64]) -> Result<Corrected> {
    let sum = 4.0 * raw_fidelity - 1.0;
    let c = readout_correct(sum / 3.0, fidelities)?;
    Ok(Corrected { value: (1.0 + 3.0 * c.value) / 4.0, clamped: c.clamped })
}
