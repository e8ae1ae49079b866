//! Windowed Fourier diagnostics of `y(tau)` trajectories.
//!
//! Window `k` covers `tau in [2 pi k, 2 pi (k + 1)]`. Projections use the
//! trapezoid rule on the trajectory's own grid, which must place sample points
//! on the window boundaries.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::integrate::IntegrationConfig;
use crate::model::{SystemParams, Trajectory, YState};
use crate::perturb::{rho1, rho2, PerturbativeAlpha2, SECULAR_COEFFICIENT};

pub const MIN_POINTS_PER_WINDOW: usize = 1000;
pub const MAX_HARMONIC: usize = 8;
pub const MIN_FIT_WINDOWS: usize = 5;
/// Predicted third-harmonic coefficient at `y0 = 1`, in magnitude.
pub const THIRD_HARMONIC_COEFFICIENT: f64 = 7.0 / 864.0;

const ALIGN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicWindow {
    pub k: usize,
    /// `c[0]` is the window mean, `c[n]` the `cos(n tau)` coefficient.
    pub c: Vec<f64>,
    /// `s[n - 1]` is the `sin(n tau)` coefficient.
    pub s: Vec<f64>,
}

impl HarmonicWindow {
    pub fn cos(&self, n: usize) -> f64 {
        self.c[n]
    }

    pub fn sin(&self, n: usize) -> f64 {
        self.s[n - 1]
    }

    pub fn center(&self) -> f64 {
        TAU * self.k as f64 + PI
    }
}

/// Index range `[start, start + m]` of window `k` on the grid `t0 + i h`.
fn window_range(t0: f64, h: f64, len: usize, k: usize) -> Result<(usize, usize)> {
    let m_f = TAU / h;
    let m = m_f.round() as usize;
    if (m_f - m as f64).abs() > ALIGN_TOL {
        return Err(Error::InsufficientSamples(format!(
            "sample spacing {h} does not divide the period 2 pi"
        )));
    }
    if m < MIN_POINTS_PER_WINDOW {
        return Err(Error::InsufficientSamples(format!(
            "{m} intervals per window, need at least {MIN_POINTS_PER_WINDOW}"
        )));
    }
    let start_f = (TAU * k as f64 - t0) / h;
    let start = start_f.round();
    if start < 0.0 || (start_f - start).abs() > ALIGN_TOL * m as f64 {
        return Err(Error::InsufficientSamples(format!("window {k} does not start on a sample")));
    }
    let start = start as usize;
    if start + m >= len {
        return Err(Error::InsufficientSamples(format!(
            "window {k} ends at tau = {} past the trajectory",
            TAU * (k + 1) as f64
        )));
    }
    Ok((start, m))
}

/// Projects `values` (sampled at `t0 + i h`) onto harmonics `0..=n` over window `k`.
pub fn project_values(t0: f64, h: f64, values: &[f64], k: usize, n: usize) -> Result<HarmonicWindow> {
    if n > MAX_HARMONIC {
        return Err(Error::InvalidConfig(format!("at most {MAX_HARMONIC} harmonics, asked for {n}")));
    }
    let (start, m) = window_range(t0, h, values.len(), k)?;
    let mut c = vec![0.0; n + 1];
    let mut s = vec![0.0; n];
    for i in 0..=m {
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        let idx = start + i;
        let tau = t0 + idx as f64 * h;
        let v = w * values[idx];
        c[0] += v;
        for j in 1..=n {
            let (sn, cs) = (j as f64 * tau).sin_cos();
            c[j] += v * cs;
            s[j - 1] += v * sn;
        }
    }
    c[0] *= h / TAU;
    for x in c.iter_mut().skip(1).chain(s.iter_mut()) {
        *x *= h / PI;
    }
    Ok(HarmonicWindow { k, c, s })
}

pub fn project_harmonics(traj: &Trajectory<YState>, window_k: usize, n: usize) -> Result<HarmonicWindow> {
    let y: Vec<f64> = traj.samples().iter().map(|s| s.y).collect();
    project_values(traj.t0(), traj.h(), &y, window_k, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularFit {
    pub harmonic: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Fits the `sin(n tau)` coefficient of `y - y0 - eps y0 rho1` against the
/// window centres of windows `0..windows`.
pub fn secular_slope(
    traj: &Trajectory<YState>,
    params: &SystemParams,
    harmonic: usize,
    windows: usize,
) -> Result<SecularFit> {
    if windows < MIN_FIT_WINDOWS {
        return Err(Error::InsufficientWindows {
            needed: MIN_FIT_WINDOWS,
            got: windows,
        });
    }
    let (eps, y0) = (params.epsilon(), params.y0());
    let resid: Vec<f64> = traj
        .samples()
        .iter()
        .map(|s| s.y - y0 - eps * y0 * rho1(s.tau, y0))
        .collect();
    let mut x = Vec::with_capacity(windows);
    let mut amp = Vec::with_capacity(windows);
    for k in 0..windows {
        let w = project_values(traj.t0(), traj.h(), &resid, k, harmonic)?;
        x.push(w.center());
        amp.push(w.sin(harmonic));
    }
    let (slope, intercept, r2) = linear_fit(&x, &amp);
    Ok(SecularFit {
        harmonic,
        slope,
        intercept,
        r2,
    })
}

/// `(5/96) eps^2 y0^(-6)`.
pub fn predicted_secular_slope(params: &SystemParams) -> f64 {
    SECULAR_COEFFICIENT * params.epsilon().powi(2) * params.y0().powi(-6)
}

pub fn predicted_s1(params: &SystemParams) -> f64 {
    params.epsilon() * params.y0().powf(-2.5) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdHarmonic {
    /// Signed `sin 3tau` coefficient of the detrended residual over window 0.
    pub measured: f64,
    /// `(7/864) eps^3 y0^(-19/2)`.
    pub predicted: f64,
}

impl ThirdHarmonic {
    pub fn relative_error(&self) -> f64 {
        (self.measured.abs() - self.predicted).abs() / self.predicted
    }
}

/// Third harmonic of `y - y0 (1 + eps rho1 + eps^2 (rho2 + rho1^2 / 2))` over
/// the first window.
pub fn third_harmonic_check(params: &SystemParams, traj: &Trajectory<YState>) -> Result<ThirdHarmonic> {
    let (eps, y0) = (params.epsilon(), params.y0());
    let resid: Vec<f64> = traj
        .samples()
        .iter()
        .map(|s| {
            let r1 = rho1(s.tau, y0);
            let r2 = rho2(s.tau, y0);
            s.y - y0 * (1.0 + eps * r1 + eps * eps * (r2 + 0.5 * r1 * r1))
        })
        .collect();
    let w = project_values(traj.t0(), traj.h(), &resid, 0, 3)?;
    Ok(ThirdHarmonic {
        measured: w.sin(3),
        predicted: THIRD_HARMONIC_COEFFICIENT * eps.powi(3) * y0.powf(-9.5),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicityDefect {
    /// Grid of `(tau, max_i |x_i(tau + period) - x_i(tau)|)`.
    pub series: Vec<(f64, f64)>,
    pub max: f64,
    samples_per_period: usize,
}

impl PeriodicityDefect {
    /// Maximum defect within each full period of the series.
    pub fn per_period_max(&self) -> Vec<f64> {
        self.series
            .chunks(self.samples_per_period)
            .filter(|c| c.len() == self.samples_per_period)
            .map(|c| c.iter().map(|&(_, d)| d).fold(0.0, f64::max))
            .collect()
    }

    /// Maximum over samples with `tau` in `[from, to]`.
    pub fn max_between(&self, from: f64, to: f64) -> f64 {
        self.series
            .iter()
            .filter(|&&(t, _)| t >= from && t <= to)
            .map(|&(_, d)| d)
            .fold(0.0, f64::max)
    }

    /// Minimum over samples with `tau` in `[from, to]`.
    pub fn min_between(&self, from: f64, to: f64) -> f64 {
        self.series
            .iter()
            .filter(|&&(t, _)| t >= from && t <= to)
            .map(|&(_, d)| d)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Defect of `(y, y', y'')` under the shift `tau -> tau + period`.
pub fn periodicity_defect(traj: &Trajectory<YState>, period: f64) -> Result<PeriodicityDefect> {
    let h = traj.h();
    let m_f = period / h;
    let m = m_f.round() as usize;
    if m == 0 || (m_f - m as f64).abs() > ALIGN_TOL {
        return Err(Error::InsufficientSamples(format!(
            "sample spacing {h} does not divide the period {period}"
        )));
    }
    let samples = traj.samples();
    if samples.len() < 2 * m + 1 {
        return Err(Error::InsufficientSamples(format!(
            "trajectory covers fewer than two periods ({} samples, {m} per period)",
            samples.len()
        )));
    }
    let series: Vec<(f64, f64)> = (0..samples.len() - m)
        .map(|i| {
            let (a, b) = (&samples[i], &samples[i + m]);
            let d = (b.y - a.y).abs().max((b.dy - a.dy).abs()).max((b.ddy - a.ddy).abs());
            (traj.time(i), d)
        })
        .collect();
    let max = series.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    Ok(PeriodicityDefect {
        series,
        max,
        samples_per_period: m,
    })
}

/// Samples the truncated composite on the grid of `config` (read in `tau`),
/// with exact derivatives of the truncation.
pub fn series_trajectory(params: &SystemParams, order: u8, config: &IntegrationConfig) -> Result<Trajectory<YState>> {
    let n = config.steps()?;
    let alpha = PerturbativeAlpha2::new(params, order)?;
    let every = config.record_every;
    let h = config.h * every as f64;
    let samples = (0..=n / every)
        .map(|k| {
            let tau = (k * every) as f64 * config.h;
            let p = alpha.point(tau);
            YState {
                tau,
                y: p.y,
                dy: p.dy,
                ddy: alpha.ddy_direct(tau),
                volterra: alpha.volterra(tau),
            }
        })
        .collect();
    Trajectory::new(0.0, h, samples)
}
