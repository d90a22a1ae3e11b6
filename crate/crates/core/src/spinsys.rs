// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Hyperfine-coupled electron-nuclear spin systems and conditional nuclear precession.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{khz_to_rad_per_us, lit, rad_per_us_to_khz, to_f64, Real};
use crate::su2::{AxisAngle, Su2};

/// Electron state conditioning the nuclear precession.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn flip(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

/// Effective hyperfine parameters of one nucleus, in kHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperfineParams<T> {
    pub a_par: T,
    pub a_perp: T,
    pub omega_l: T,
    pub larmor_scale: T,
}

impl<T: Real> HyperfineParams<T> {
    /// Validated constructor with `larmor_scale = 1`.
    pub fn new(a_par: T, a_perp: T, omega_l: T) -> Result<Self> {
        Self::with_scale(a_par, a_perp, omega_l, T::one())
    }

    pub fn with_scale(a_par: T, a_perp: T, omega_l: T, larmor_scale: T) -> Result<Self> {
        let p = Self {
            a_par,
            a_perp,
            omega_l,
            larmor_scale,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a_par.is_finite() {
            return Err(invalid("a_par", "must be finite"));
        }
        if !(self.a_perp >= T::zero()) || !self.a_perp.is_finite() {
            return Err(invalid("a_perp", format!("must be >= 0, got {}", self.a_perp)));
        }
        if !(self.omega_l > T::zero()) || !self.omega_l.is_finite() {
            return Err(invalid("omega_l", format!("must be > 0, got {}", self.omega_l)));
        }
        if !(self.larmor_scale > lit(0.9) && self.larmor_scale < lit(1.1)) {
            return Err(invalid(
                "larmor_scale",
                format!("must lie in (0.9, 1.1), got {}", self.larmor_scale),
            ));
        }
        Ok(())
    }

    /// `|A| = sqrt(A_par^2 + A_perp^2)` in kHz.
    pub fn magnitude(&self) -> T {
        self.a_par.hypot(self.a_perp)
    }
}

/// Larmor correction inferred from the nuclear Ramsey and long XY data.
pub const MEASURED_LARMOR_SCALE: f64 = 0.993;

/// Tabulated nuclei: (name, owning electron index, A_par, A_perp, omega_L) in kHz.
pub const KNOWN_NUCLEI: [(&str, usize, f64, f64, f64); 3] = [
    ("Nuc-1", 1, 287.0, 163.0, 142.0),
    ("Nuc-2", 1, 168.0, 130.0, 144.0),
    ("Nuc-3", 0, 54.0, 134.0, 144.0),
];

/// Looks up a tabulated nucleus by name, applying the measured Larmor correction.
pub fn known_nucleus<T: Real>(name: &str) -> Option<(usize, HyperfineParams<T>)> {
    KNOWN_NUCLEI
        .iter()
        .find(|n| n.0.eq_ignore_ascii_case(name))
        .map(|&(_, owner, a_par, a_perp, wl)| {
            (
                owner,
                HyperfineParams {
                    a_par: lit(a_par),
                    a_perp: lit(a_perp),
                    omega_l: lit(wl),
                    larmor_scale: lit(MEASURED_LARMOR_SCALE),
                },
            )
        })
}

/// Conditional precession rates (rad/us) and unit axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecessionFrame<T: Real> {
    pub omega_plus: T,
    pub omega_minus: T,
    pub m_plus: [T; 3],
    pub m_minus: [T; 3],
}

impl<T: Real> PrecessionFrame<T> {
    pub fn omega(&self, b: Branch) -> T {
        match b {
            Branch::Plus => self.omega_plus,
            Branch::Minus => self.omega_minus,
        }
    }

    pub fn axis(&self, b: Branch) -> [T; 3] {
        match b {
            Branch::Plus => self.m_plus,
            Branch::Minus => self.m_minus,
        }
    }

    /// Precession frequencies in kHz, `(omega_plus, omega_minus) / 2 pi`.
    pub fn frequencies_khz(&self) -> (T, T) {
        (
            rad_per_us_to_khz(self.omega_plus),
            rad_per_us_to_khz(self.omega_minus),
        )
    }
}

/// Builds `omega_pm m_pm = pm A_perp x + (scale omega_L pm A_par) z`, in rad/us.
pub fn precession_frame<T: Real>(p: &HyperfineParams<T>) -> Result<PrecessionFrame<T>> {
    p.validate()?;
    let wl = p.larmor_scale * p.omega_l;
    let build = |b: Branch| -> Result<(T, [T; 3])> {
        let s = b.sign::<T>();
        let vx = khz_to_rad_per_us(s * p.a_perp);
        let vz = khz_to_rad_per_us(wl + s * p.a_par);
        let w = vx.hypot(vz);
        if w == T::zero() {
            return Err(Error::ZeroPrecession { branch: b.name() });
        }
        Ok((w, [vx / w, T::zero(), vz / w]))
    };
    let (omega_plus, m_plus) = build(Branch::Plus)?;
    let (omega_minus, m_minus) = build(Branch::Minus)?;
    Ok(PrecessionFrame {
        omega_plus,
        omega_minus,
        m_plus,
        m_minus,
    })
}

/// `exp(-i omega t m.sigma / 2)` on the requested branch; `t` in us.
pub fn free_propagator<T: Real>(frame: &PrecessionFrame<T>, branch: Branch, t: T) -> Result<Su2<T>> {
    if t < T::zero() {
        return Err(Error::NegativeDuration(to_f64(t)));
    }
    Ok(Su2::rotation(frame.axis(branch), frame.omega(branch) * t))
}

/// Canonical axis and angle of `u`, with the angle in `[0, pi]`.
pub fn axis_angle<T: Real>(u: &Su2<T>) -> Result<AxisAngle<T>> {
    u.axis_angle()
}

/// Electron spin parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectronParams {
    /// Ground-state spin transition frequency, MHz.
    pub mwg_freq_mhz: f64,
    /// Bath envelope `(T2 in us, stretch exponent n)`.
    pub t2_envelope: (f64, f64),
    pub readout_fidelity: f64,
}

impl ElectronParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mwg_freq_mhz > 0.0) {
            return Err(invalid("mwg_freq_mhz", "must be > 0"));
        }
        let (t2, n) = self.t2_envelope;
        if !(t2 > 0.0) {
            return Err(invalid("t2_us", "must be > 0"));
        }
        if !(n > 0.5 && n <= 4.0) {
            return Err(invalid("stretch_n", "must lie in (0.5, 4]"));
        }
        if !(0.5..=1.0).contains(&self.readout_fidelity) {
            return Err(invalid("readout_fidelity", "must lie in [0.5, 1]"));
        }
        Ok(())
    }
}

impl Default for ElectronParams {
    fn default() -> Self {
        Self {
            mwg_freq_mhz: 8600.0,
            t2_envelope: (120.0, 2.0),
            readout_fidelity: 0.94,
        }
    }
}

/// A nucleus coupled to one electron of the register.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OwnedNucleus {
    pub owner: usize,
    pub params: HyperfineParams<f64>,
}

/// One or two electrons, their Ising coupling, and hyperfine-coupled nuclei.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    pub electrons: Vec<ElectronParams>,
    /// Ising coupling J in kHz, `H/h = (J/2) Z1 Z2`.
    pub j_coupling_khz: Option<f64>,
    pub nuclei: Vec<OwnedNucleus>,
}

impl SpinSystem {
    pub fn new(
        electrons: Vec<ElectronParams>,
        j_coupling_khz: Option<f64>,
        nuclei: Vec<OwnedNucleus>,
    ) -> Result<Self> {
        let s = Self {
            electrons,
            j_coupling_khz,
            nuclei,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self.electrons.len() {
            1 | 2 => {}
            n => return Err(invalid("electrons", format!("need 1 or 2 electrons, got {n}"))),
        }
        for e in &self.electrons {
            e.validate()?;
        }
        let two = self.electrons.len() == 2;
        match (two, self.j_coupling_khz) {
            (true, None) => return Err(invalid("j_coupling_khz", "required for two electrons")),
            (false, Some(_)) => {
                return Err(invalid("j_coupling_khz", "only valid with two electrons"))
            }
            (_, Some(j)) if !j.is_finite() => return Err(invalid("j_coupling_khz", "not finite")),
            _ => {}
        }
        for n in &self.nuclei {
            if n.owner >= self.electrons.len() {
                return Err(invalid("owner", format!("electron {} does not exist", n.owner)));
            }
            n.params.validate()?;
        }
        Ok(())
    }

    /// Precession frames of every nucleus, in list order.
    pub fn frames(&self) -> Result<Vec<PrecessionFrame<f64>>> {
        self.nuclei.iter().map(|n| precession_frame(&n.params)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn nuc1() -> HyperfineParams<f64> {
        HyperfineParams::new(287.0, 163.0, 142.0).unwrap()
    }

    #[test]
    fn nuc1_frequencies_at_unit_scale() {
        let (wp, wm) = precession_frame(&nuc1()).unwrap().frequencies_khz();
        assert!((wp - 458.0).abs() < 1.0, "{wp}");
        assert!((wm - 219.0).abs() < 1.0, "{wm}");
    }

    #[test]
    fn nuc1_frequencies_with_measured_scale() {
        let (_, p) = known_nucleus::<f64>("Nuc-1").unwrap();
        let (wp, wm) = precession_frame(&p).unwrap().frequencies_khz();
        assert!((wp - 458.0).abs() < 1.0, "{wp}");
        assert!((wm - 219.0).abs() < 1.0, "{wm}");
    }

    #[test]
    fn frequencies_match_hamiltonian_eigen_splitting() {
        // Nuclear Hamiltonian for electron state s: H = (wl/2) Z + s (A_par Z + A_perp X)/2.
        // Splitting = eigenvalue difference of the 2x2 Hermitian matrix.
        let p = HyperfineParams::<f64>::new(54.0, 134.0, 144.0).unwrap();
        for (s, expect) in [(1.0f64, 239.1f64), (-1.0, 162.0)] {
            let hz = 0.5 * (p.omega_l + s * p.a_par);
            let hx = 0.5 * s * p.a_perp;
            let tr = 0.0;
            let det = -hz * hz - hx * hx;
            let disc = (tr * tr / 4.0 - det).sqrt();
            let split = 2.0 * disc;
            let frame = precession_frame(&p).unwrap();
            let (wp, wm) = frame.frequencies_khz();
            let got = if s > 0.0 { wp } else { wm };
            assert!((got - split).abs() < 1e-9);
            assert!((got - expect).abs() < 1.0, "{got} vs {expect}");
        }
    }

    #[test]
    fn no_hyperfine_gives_larmor_about_z() {
        let p = HyperfineParams::<f64>::new(0.0, 0.0, 142.0).unwrap();
        let f = precession_frame(&p).unwrap();
        let (wp, wm) = f.frequencies_khz();
        assert!((wp - 142.0).abs() < 1e-10 && (wm - 142.0).abs() < 1e-10);
        assert_eq!(f.m_plus, [0.0, 0.0, 1.0]);
        assert_eq!(f.m_minus, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_precession_is_an_error() {
        let p = HyperfineParams::new(142.0, 0.0, 142.0).unwrap();
        assert!(matches!(
            precession_frame(&p),
            Err(Error::ZeroPrecession { branch: "-" })
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(HyperfineParams::new(1.0, -1.0, 142.0).is_err());
        assert!(HyperfineParams::new(1.0, 1.0, 0.0).is_err());
        assert!(HyperfineParams::with_scale(1.0, 1.0, 1.0, 1.2).is_err());
    }

    #[test]
    fn free_propagator_periodicity() {
        let f = precession_frame(&nuc1()).unwrap();
        assert!(free_propagator(&f, Branch::Plus, 0.0).unwrap().distance(&Su2::identity()) < 1e-15);
        let u = free_propagator(&f, Branch::Plus, 2.0 * PI / f.omega_plus).unwrap();
        let minus_id = Su2::identity().scale(num_complex::Complex::new(-1.0, 0.0));
        assert!(u.distance(&minus_id) < 1e-12);
        assert!(matches!(
            free_propagator(&f, Branch::Minus, -1.0),
            Err(Error::NegativeDuration(_))
        ));
    }

    #[test]
    fn spin_system_invariants() {
        let e = ElectronParams::default();
        let n = OwnedNucleus { owner: 1, params: nuc1() };
        assert!(SpinSystem::new(vec![e, e], Some(5.4), vec![n]).is_ok());
        assert!(SpinSystem::new(vec![e, e], None, vec![n]).is_err());
        assert!(SpinSystem::new(vec![e], Some(5.4), vec![]).is_err());
        assert!(SpinSystem::new(vec![e], None, vec![n]).is_err());
    }
}
