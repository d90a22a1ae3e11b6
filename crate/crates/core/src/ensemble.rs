// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Dipolar pair statistics of an implanted ion layer and the optical dephasing ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::spinsys::HyperfineParams;
use crate::su2::vec3;

/// Vacuum permeability over 4 pi, T m / A.
const MU0_OVER_4PI: f64 = 1e-7;
/// Bohr magneton, J / T.
const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Planck constant, J s.
const PLANCK: f64 = 6.626_070_15e-34;

/// Effective g-factor giving an 8.6 GHz splitting at 790 G.
pub const DEFAULT_G_EFF: f64 = 8.6e9 * PLANCK / (BOHR_MAGNETON * 0.079);

/// Ising coefficient `J` (kHz, `H/h = (J/2) Z1 Z2`) of two point dipoles separated by
/// `r` (nm), with `theta` the angle between `r` and the field axis.
pub fn dipolar_j(r: [f64; 3], g_eff: f64, field_axis: [f64; 3]) -> Result<f64> {
    let d = vec3::norm(r);
    if !(d > 0.0) {
        return Err(Error::ZeroSeparation);
    }
    if !(vec3::norm(field_axis) > 0.0) {
        return Err(invalid("field_axis", "must be nonzero"));
    }
    let axis = vec3::normalize(field_axis);
    let cos = vec3::dot(r, axis) / d;
    Ok(coupling_prefactor_khz_nm3(g_eff) * (1.0 - 3.0 * cos * cos) / (2.0 * d.powi(3)))
}

/// `mu0 g^2 muB^2 / (4 pi h)` in kHz nm^3.
fn coupling_prefactor_khz_nm3(g_eff: f64) -> f64 {
    // Hz m^3 -> kHz nm^3.
    MU0_OVER_4PI * (g_eff * BOHR_MAGNETON).powi(2) / PLANCK * 1e27 / 1e3
}

/// Separation bounds for a measured coupling.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DistanceBounds {
    /// Configured exclusion radius, nm.
    pub r_min: f64,
    /// Separation at which the on-axis coupling equals the measured one, nm.
    pub r_max: f64,
}

/// Default exclusion radius, nm.
pub const DEFAULT_R_MIN_NM: f64 = 10.0;

pub fn distance_bounds(j_measured_khz: f64, g_eff: f64, r_min: f64) -> Result<DistanceBounds> {
    if !(j_measured_khz > 0.0) {
        return Err(invalid("j_measured", "must be positive"));
    }
    // On axis |1 - 3 cos^2| / 2 = 1.
    let r_max = (coupling_prefactor_khz_nm3(g_eff) / j_measured_khz).cbrt();
    Ok(DistanceBounds { r_min, r_max })
}

/// Static field direction in sample coordinates (`z` = surface normal = crystal c-axis),
/// polar 100 deg and azimuth 95 deg.
pub fn default_field_axis() -> [f64; 3] {
    let (t, p) = (100f64.to_radians(), 95f64.to_radians());
    [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
}

/// Implanted ion layer.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImplantModel {
    /// Ions per cm^2.
    pub areal_density_cm2: f64,
    pub layer_thickness_nm: f64,
    pub g_eff: f64,
    pub field_axis: [f64; 3],
    /// Neighbors beyond this distance are ignored, nm.
    pub cutoff_nm: f64,
    pub seed: u64,
}

impl Default for ImplantModel {
    fn default() -> Self {
        Self {
            areal_density_cm2: 5e9,
            layer_thickness_nm: 20.0,
            g_eff: DEFAULT_G_EFF,
            field_axis: default_field_axis(),
            cutoff_nm: 150.0,
            seed: 0x5eed,
        }
    }
}

impl ImplantModel {
    /// Ions per nm^2.
    pub fn density_nm2(&self) -> f64 {
        self.areal_density_cm2 * 1e-14
    }

    /// Side of the square periodic box holding `n_ions` at the model density, nm.
    pub fn box_side(&self, n_ions: usize) -> f64 {
        (n_ions as f64 / self.density_nm2()).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.areal_density_cm2 > 0.0) {
            return Err(invalid("areal_density", "must be positive"));
        }
        if !(self.layer_thickness_nm > 0.0) {
            return Err(invalid("layer_thickness", "must be positive"));
        }
        if !(self.cutoff_nm > 0.0) {
            return Err(invalid("cutoff", "must be positive"));
        }
        if !(self.g_eff > 0.0) {
            return Err(invalid("g_eff", "must be positive"));
        }
        if !(vec3::norm(self.field_axis) > 0.0) {
            return Err(invalid("field_axis", "must be nonzero"));
        }
        Ok(())
    }
}

/// Largest `|J|` to any neighbor, per ion.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PairStats {
    /// Sorted ascending, kHz.
    pub max_j_khz: Vec<f64>,
}

impl PairStats {
    /// Fraction of ions whose strongest coupling is at least `j_khz`.
    pub fn fraction_above(&self, j_khz: f64) -> f64 {
        if self.max_j_khz.is_empty() {
            return 0.0;
        }
        let below = self.max_j_khz.partition_point(|&j| j < j_khz);
        (self.max_j_khz.len() - below) as f64 / self.max_j_khz.len() as f64
    }

    /// Empirical CDF at `j_khz`.
    pub fn cdf(&self, j_khz: f64) -> f64 {
        1.0 - self.fraction_above(j_khz)
    }

    /// `q`-quantile (nearest rank), `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        if self.max_j_khz.is_empty() || !(0.0..=1.0).contains(&q) {
            return None;
        }
        let i = ((q * self.max_j_khz.len() as f64).ceil() as usize).clamp(1, self.max_j_khz.len()) - 1;
        Some(self.max_j_khz[i])
    }
}

/// Samples `n_ions` in a periodic box at the model density and returns the fraction
/// whose strongest neighbor coupling reaches `j_threshold_khz`.
pub fn pair_statistics(model: &ImplantModel, j_threshold_khz: f64, n_ions: usize) -> Result<(f64, PairStats)> {
    model.validate()?;
    if n_ions == 0 {
        return Err(invalid("n_ions", "must be at least 1"));
    }
    let side = model.box_side(n_ions);
    let min = 2.0 * model.cutoff_nm;
    if side < min {
        return Err(Error::BoxTooSmall { side_nm: side, min_nm: min });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let pos: Vec<[f64; 3]> = (0..n_ions)
        .map(|_| {
            [
                rng.random::<f64>() * side,
                rng.random::<f64>() * side,
                rng.random::<f64>() * model.layer_thickness_nm,
            ]
        })
        .collect();

    // Cell list with cells no smaller than the cutoff, and not many more cells than ions.
    let n_cells = ((side / model.cutoff_nm).floor() as usize).min((n_ions as f64).sqrt().ceil() as usize).max(1);
    let cell = side / n_cells as f64;
    let index = |x: f64| ((x / cell) as usize).min(n_cells - 1);
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); n_cells * n_cells];
    for (i, p) in pos.iter().enumerate() {
        cells[index(p[0]) * n_cells + index(p[1])].push(i);
    }
    let wrap = |d: f64| d - side * (d / side).round();
    let cut2 = model.cutoff_nm * model.cutoff_nm;
    let span: Vec<isize> = if n_cells >= 3 { vec![-1, 0, 1] } else { (0..n_cells as isize).collect() };

    let mut max_j: Vec<f64> = pos
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (cx, cy) = (index(p[0]) as isize, index(p[1]) as isize);
            let mut best = 0.0f64;
            for &dx in &span {
                for &dy in &span {
                    let (x, y) = if n_cells >= 3 {
                        ((cx + dx).rem_euclid(n_cells as isize), (cy + dy).rem_euclid(n_cells as isize))
                    } else {
                        (dx, dy)
                    };
                    for &k in &cells[x as usize * n_cells + y as usize] {
                        if k == i {
                            continue;
                        }
                        let q = pos[k];
                        let r = [wrap(q[0] - p[0]), wrap(q[1] - p[1]), q[2] - p[2]];
                        if vec3::dot(r, r) > cut2 {
                            continue;
                        }
                        let j = dipolar_j(r, model.g_eff, model.field_axis).map(f64::abs).unwrap_or(0.0);
                        best = best.max(j);
                    }
                }
            }
            best
        })
        .collect();
    max_j.sort_by(|a, b| a.partial_cmp(b).expect("finite couplings"));
    let stats = PairStats { max_j_khz: max_j };
    Ok((stats.fraction_above(j_threshold_khz), stats))
}

/// `omega_MWg / |A|`: ratio of nuclear to electron dephasing times when both
/// frequencies fluctuate with the same fractional g change.
pub fn dephasing_ratio(hp: &HyperfineParams<f64>, mwg_freq_mhz: f64) -> Result<f64> {
    if !(mwg_freq_mhz > 0.0) {
        return Err(invalid("mwg_freq", "must be positive"));
    }
    let a_khz = hp.a_par.hypot(hp.a_perp);
    if !(a_khz > 0.0) {
        return Err(invalid("hyperfine", "|A| must be positive"));
    }
    Ok(mwg_freq_mhz * 1e3 / a_khz)
}
