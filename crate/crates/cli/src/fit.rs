// Copyright 2026 The spinreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Least-squares fits of damped oscillations and stretched exponentials.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("fit diverged: {0}")]
    FitDiverged(String),
}

pub type FitResult<T> = Result<T, FitError>;

const MAX_ITERS: usize = 500;
/// Zero padding of the seeding spectrum.
const SEED_PADDING: usize = 8;

struct LmOutput {
    p: DVector<f64>,
    cov: DMatrix<f64>,
    rss: f64,
}

/// Levenberg-Marquardt with Marquardt diagonal scaling. `eval` returns residuals
/// (model minus data) and their Jacobian.
fn levenberg_marquardt(
    p0: DVector<f64>,
    eval: impl Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
) -> FitResult<LmOutput> {
    let mut p = p0;
    let (mut r, mut j) = eval(&p);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(FitError::FitDiverged("initial guess gives non-finite residuals".into()));
    }
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERS {
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut a = jtj.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
        }
        let Some(chol) = a.cholesky() else {
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
            continue;
        };
        let delta = chol.solve(&(-&g));
        let trial = &p + &delta;
        let (rt, jt) = eval(&trial);
        let ct = rt.norm_squared();
        if ct.is_finite() && ct < cost {
            let done = delta.norm() <= 1e-13 * (p.norm() + 1e-13) || cost - ct <= 1e-16 * cost;
            p = trial;
            r = rt;
            j = jt;
            cost = ct;
            lambda = (lambda / 10.0).max(1e-15);
            if done {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(FitError::FitDiverged("non-finite parameters".into()));
    }
    let dof = r.len().saturating_sub(p.len());
    let s2 = if dof > 0 { cost / dof as f64 } else { 0.0 };
    let cov = (j.transpose() * &j)
        .try_inverse()
        .ok_or_else(|| FitError::FitDiverged("singular normal matrix".into()))?
        * s2;
    Ok(LmOutput { p, cov, rss: cost })
}

fn rows(cov: &DMatrix<f64>) -> Vec<Vec<f64>> {
    cov.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn check_series(t: &[f64], y: &[f64], min_points: usize) -> FitResult<()> {
    if t.len() != y.len() {
        return Err(FitError::InsufficientData(format!("{} times but {} values", t.len(), y.len())));
    }
    if t.len() < min_points {
        return Err(FitError::InsufficientData(format!("need at least {min_points} points, got {}", t.len())));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FitError::InsufficientData("series contains non-finite values".into()));
    }
    Ok(())
}

/// `|sum_k y_k exp(-2 pi i f t_k)|^2` at each frequency.
pub fn periodogram(t: &[f64], y: &[f64], freqs: &[f64]) -> Vec<f64> {
    freqs
        .iter()
        .map(|&f| {
            let (mut re, mut im) = (0.0, 0.0);
            for (&tk, &yk) in t.iter().zip(y) {
                let (s, c) = (TAU * f * tk).sin_cos();
                re += yk * c;
                im -= yk * s;
            }
            re * re + im * im
        })
        .collect()
}

/// Frequency grid `k / (pad * n * dt)` up to the Nyquist frequency, with `dt` the
/// median sample spacing.
fn frequency_grid(t: &[f64], pad: usize) -> Vec<f64> {
    let mut sorted = t.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dts: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    if dts.is_empty() {
        return Vec::new();
    }
    dts.sort_by(f64::total_cmp);
    let dt = dts[dts.len() / 2];
    let df = 1.0 / (pad as f64 * t.len() as f64 * dt);
    let nyquist = 0.5 / dt;
    (1..).map(|k| k as f64 * df).take_while(|f| *f <= nyquist + 1e-12 * nyquist).collect()
}

/// The `count` strongest local maxima of the mean-subtracted spectrum on the unpadded
/// grid, strongest first.
pub fn dominant_frequencies(t: &[f64], y: &[f64], count: usize) -> Vec<f64> {
    let mean = y.iter().sum::<f64>() / y.len().max(1) as f64;
    let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let freqs = frequency_grid(t, 1);
    let p = periodogram(t, &centered, &freqs);
    let mut peaks: Vec<(f64, f64)> = (0..p.len())
        .filter(|&k| (k == 0 || p[k] > p[k - 1]) && (k + 1 == p.len() || p[k] >= p[k + 1]))
        .map(|k| (freqs[k], p[k]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.into_iter().take(count).map(|(f, _)| f).collect()
}

/// `a cos(2 pi f t + phi) exp(-t / tau)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampedCosineFit {
    /// Cycles per unit of `t`.
    pub frequency: f64,
    /// Infinite when the fitted decay rate is not positive.
    pub decay_time: f64,
    pub decay_rate: f64,
    pub amplitude: f64,
    /// In `(-pi, pi]`.
    pub phase: f64,
    /// Over `(amplitude, frequency, decay_rate, phase)`.
    pub covariance: Vec<Vec<f64>>,
    pub rss: f64,
}

impl DampedCosineFit {
    pub fn frequency_sigma(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (TAU * self.frequency * t + self.phase).cos() * (-self.decay_rate * t).exp()
    }
}

/// Nonlinear least-squares damped cosine, seeded at the peak of the discrete spectrum.
pub fn fit_damped_cosine(t: &[f64], y: &[f64]) -> FitResult<DampedCosineFit> {
    check_series(t, y, 8)?;
    let n = t.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if !(var > 1e-24 * mean.powi(2).max(1.0)) {
        return Err(FitError::FitDiverged("series has no oscillation".into()));
    }
    let freqs = frequency_grid(t, SEED_PADDING);
    if freqs.is_empty() {
        return Err(FitError::InsufficientData("sample times are not distinct".into()));
    }
    let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let power = periodogram(t, &centered, &freqs);
    let k = (0..power.len()).max_by(|&a, &b| power[a].total_cmp(&power[b])).unwrap_or(0);
    let f0 = freqs[k];
    let (mut re, mut im) = (0.0, 0.0);
    for (&tk, &yk) in t.iter().zip(y) {
        let (s, c) = (TAU * f0 * tk).sin_cos();
        re += yk * c;
        im -= yk * s;
    }
    let t0 = t.iter().copied().fold(f64::INFINITY, f64::min);
    let span = t.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t0;
    let a0 = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let p0 = DVector::from_vec(vec![a0, f0, 1.0 / span, im.atan2(re)]);

    let eval = |p: &DVector<f64>| {
        let (a, f, g, phi) = (p[0], p[1], p[2], p[3]);
        let mut r = DVector::zeros(t.len());
        let mut j = DMatrix::zeros(t.len(), 4);
        for (i, (&tk, &yk)) in t.iter().zip(y).enumerate() {
            let (s, c) = (TAU * f * tk + phi).sin_cos();
            let e = (-g * tk).exp();
            r[i] = a * c * e - yk;
            j[(i, 0)] = c * e;
            j[(i, 1)] = -a * s * TAU * tk * e;
            j[(i, 2)] = -tk * a * c * e;
            j[(i, 3)] = -a * s * e;
        }
        (r, j)
    };
    let out = levenberg_marquardt(p0, eval)?;
    let (mut a, f, g, mut phi) = (out.p[0], out.p[1], out.p[2], out.p[3]);
    if a < 0.0 {
        a = -a;
        phi += PI;
    }
    // f < 0 is the same curve with the phase negated.
    let (f, phi) = if f < 0.0 { (-f, -phi) } else { (f, phi) };
    let phi = PI - (PI - phi).rem_euclid(TAU);
    if !(f > 0.0) {
        return Err(FitError::FitDiverged("fitted frequency is zero".into()));
    }
    if span * f < 1.0 {
        return Err(FitError::InsufficientData(format!("series spans {:.2} periods, need at least 1", span * f)));
    }
    Ok(DampedCosineFit {
        frequency: f,
        decay_time: if g > 0.0 { 1.0 / g } else { f64::INFINITY },
        decay_rate: g,
        amplitude: a,
        phase: phi,
        covariance: rows(&out.cov),
        rss: out.rss,
    })
}

/// `a exp(-(t / T2)^n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchedExpFit {
    pub t2: f64,
    pub n: f64,
    pub amplitude: f64,
    /// Over `(amplitude, t2, n)`, or `(amplitude, t2)` when `n` was fixed.
    pub covariance: Vec<Vec<f64>>,
    pub rss: f64,
}

/// Least-squares stretched exponential; `fixed_n` pins the exponent.
pub fn fit_stretched_exp(t: &[f64], y: &[f64], fixed_n: Option<f64>) -> FitResult<StretchedExpFit> {
    check_series(t, y, 6)?;
    if t.iter().any(|v| *v < 0.0) {
        return Err(FitError::InsufficientData("times must be non-negative".into()));
    }
    if let Some(n) = fixed_n {
        if !(n > 0.0) {
            return Err(FitError::InsufficientData(format!("fixed exponent {n} must be positive")));
        }
    }
    let first = (0..t.len()).min_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap_or(0);
    let last = (0..t.len()).max_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap_or(0);
    if !(y[last] < y[first]) || !(y[first] > 0.0) {
        return Err(FitError::FitDiverged("series does not decay".into()));
    }

    // Linearized seed: ln(-ln(y / a)) = n ln t - n ln T2.
    let a0 = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(tk, yk)| **tk > 0.0 && **yk / a0 > 0.02 && **yk / a0 < 0.98)
        .map(|(tk, yk)| (tk.ln(), (-(yk / a0).ln()).ln()))
        .collect();
    let (n0, t20) = match (fixed_n, pts.len()) {
        (Some(n), k) if k >= 1 => (n, (pts.iter().map(|(x, v)| x - v / n).sum::<f64>() / k as f64).exp()),
        (None, k) if k >= 2 => {
            let m = k as f64;
            let (sx, sv) = pts.iter().fold((0.0, 0.0), |(a, b), (x, v)| (a + x, b + v));
            let (mx, mv) = (sx / m, sv / m);
            let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
            let sxv: f64 = pts.iter().map(|(x, v)| (x - mx) * (v - mv)).sum();
            let n = if sxx > 0.0 { (sxv / sxx).clamp(0.2, 6.0) } else { 1.0 };
            (n, (mx - mv / n).exp())
        }
        (n, _) => (n.unwrap_or(1.0), t[last] / 2.0),
    };
    let t20 = if t20.is_finite() && t20 > 0.0 { t20 } else { t[last] / 2.0 };

    let np = if fixed_n.is_some() { 2 } else { 3 };
    let eval = |p: &DVector<f64>| {
        let (a, t2) = (p[0], p[1]);
        let n = fixed_n.unwrap_or_else(|| p[2]);
        let mut r = DVector::zeros(t.len());
        let mut j = DMatrix::zeros(t.len(), np);
        for (i, (&tk, &yk)) in t.iter().zip(y).enumerate() {
            let x = tk / t2;
            let u = if tk == 0.0 { 0.0 } else { x.powf(n) };
            let e = (-u).exp();
            r[i] = a * e - yk;
            j[(i, 0)] = e;
            j[(i, 1)] = a * e * u * n / t2;
            if np == 3 {
                j[(i, 2)] = if tk == 0.0 { 0.0 } else { -a * e * u * x.ln() };
            }
        }
        (r, j)
    };
    let mut p0 = vec![a0, t20];
    if fixed_n.is_none() {
        p0.push(n0);
    }
    let out = levenberg_marquardt(DVector::from_vec(p0), eval)?;
    let n = fixed_n.unwrap_or(out.p.get(2).copied().unwrap_or(n0));
    if !(out.p[1] > 0.0 && n > 0.0) {
        return Err(FitError::FitDiverged("non-positive T2 or exponent".into()));
    }
    Ok(StretchedExpFit { t2: out.p[1], n, amplitude: out.p[0], covariance: rows(&out.cov), rss: out.rss })
}
