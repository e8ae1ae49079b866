//! Fixed-step classical Runge-Kutta integration of the `y` subsystem, the
//! driven oscillator and the coupled pipeline.
//!
//! Sample `k` of every run is taken at `t0 + k * h` exactly (no accumulated
//! time), so identical inputs give bit-identical trajectories.

use crate::error::{Error, Result};
use crate::model::{CoupledState, SystemParams, Trajectory, YState, ZState};
use crate::perturb::PerturbativeAlpha2;

/// Right-hand side `x' = f(t, x)` of a first-order system of dimension `N`.
///
/// Implementations must be deterministic and free of side effects; an `Err`
/// aborts the integration at the offending stage.
pub trait Rhs<const N: usize> {
    fn eval(&self, t: f64, x: &[f64; N]) -> Result<[f64; N]>;
}

impl<const N: usize, F> Rhs<N> for F
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    fn eval(&self, t: f64, x: &[f64; N]) -> Result<[f64; N]> {
        self(t, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub h: f64,
    /// Final time; rounded to the nearest multiple of `h`.
    pub t_end: f64,
    /// Blow-up threshold for `|z|`.
    pub escape_z: f64,
    /// Keep every `record_every`-th step.
    pub record_every: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            t_end: 500.0,
            escape_z: 1e6,
            record_every: 1,
        }
    }
}

impl IntegrationConfig {
    pub fn new(h: f64, t_end: f64) -> Self {
        Self {
            h,
            t_end,
            ..Self::default()
        }
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    /// Number of steps, after checking the config.
    pub fn steps(&self) -> Result<usize> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidConfig(format!("step size h = {} must be positive", self.h)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be after the start time 0",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1".into()));
        }
        if !(self.escape_z > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "escape threshold {} must be positive",
                self.escape_z
            )));
        }
        let n = (self.t_end / self.h).round() as usize;
        if n < self.record_every {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} gives {} steps, fewer than record_every = {}",
                self.t_end, n, self.record_every
            )));
        }
        Ok(n)
    }

    fn halved(&self) -> Self {
        Self {
            h: 0.5 * self.h,
            record_every: 2 * self.record_every,
            ..*self
        }
    }
}

/// One classical RK4 step.
pub fn rk4_step<const N: usize, R: Rhs<N>>(rhs: &R, t: f64, x: &[f64; N], h: f64) -> Result<[f64; N]> {
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] {
        let mut out = *a;
        for (o, bi) in out.iter_mut().zip(b) {
            *o += s * bi;
        }
        out
    };
    let half = 0.5 * h;
    let k1 = rhs.eval(t, x)?;
    let k2 = rhs.eval(t + half, &axpy(x, half, &k1))?;
    let k3 = rhs.eval(t + half, &axpy(x, half, &k2))?;
    let k4 = rhs.eval(t + h, &axpy(x, h, &k3))?;
    let mut out = *x;
    let sixth = h / 6.0;
    for i in 0..N {
        out[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Samples collected before a run stopped, and why it stopped (if early).
pub(crate) struct Run<S> {
    pub samples: Vec<S>,
    pub stop: Option<Error>,
}

/// Drives RK4 from `t0` over `config`, recording `sample(t, x)` every
/// `record_every` steps. `guard` is checked after every accepted step.
pub(crate) fn run<const N: usize, R, S>(
    rhs: &R,
    t0: f64,
    x0: [f64; N],
    config: &IntegrationConfig,
    mut sample: impl FnMut(f64, &[f64; N]) -> S,
    mut guard: impl FnMut(f64, &[f64; N]) -> Result<()>,
) -> Result<Run<S>>
where
    R: Rhs<N>,
{
    let n = config.steps()?;
    let h = config.h;
    let mut samples = Vec::with_capacity(n / config.record_every + 1);
    let mut x = x0;
    if let Err(e) = guard(t0, &x) {
        return Ok(Run { samples, stop: Some(e) });
    }
    samples.push(sample(t0, &x));
    for k in 0..n {
        let t = t0 + k as f64 * h;
        let t_next = t0 + (k + 1) as f64 * h;
        let next = match rk4_step(rhs, t, &x, h) {
            Ok(next) => next,
            Err(e) => return Ok(Run { samples, stop: Some(e) }),
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Ok(Run {
                samples,
                stop: Some(Error::NonFinite { time: t_next }),
            });
        }
        if let Err(e) = guard(t_next, &next) {
            return Ok(Run { samples, stop: Some(e) });
        }
        x = next;
        if (k + 1) % config.record_every == 0 {
            samples.push(sample(t_next, &x));
        }
    }
    Ok(Run { samples, stop: None })
}

fn finish<S>(run: Run<S>, t0: f64, config: &IntegrationConfig) -> Result<Trajectory<S>> {
    match run.stop {
        Some(e) => Err(e),
        None => Trajectory::new(t0, config.h * config.record_every as f64, run.samples),
    }
}

/// `y^(-5/2)`, rejecting non-positive `y` at time `time`.
#[inline]
fn inv_pow_five_halves(y: f64, time: f64) -> Result<f64> {
    if y > 0.0 {
        Ok(1.0 / (y * y * y.sqrt()))
    } else {
        Err(Error::PositivityViolation { time, value: y })
    }
}

/// Integrates `(y, y', y'', J)` in rescaled time `tau` from `tau = 0`:
///
/// ```text
/// y''' = -4 y' + F(tau) y^(-5/2),   J' = y^(-5/2) cos tau
/// ```
///
/// `config.h` and `config.t_end` are read as `tau` quantities.
pub fn integrate_y(params: &SystemParams, config: &IntegrationConfig) -> Result<Trajectory<YState>> {
    let p = *params;
    let rhs = move |tau: f64, x: &[f64; 4]| -> Result<[f64; 4]> {
        let g = inv_pow_five_halves(x[0], tau)?;
        Ok([x[1], x[2], -4.0 * x[1] + p.forcing(tau) * g, g * tau.cos()])
    };
    let x0 = [p.y0(), p.yp0(), p.ypp0(), 0.0];
    let run = run(
        &rhs,
        0.0,
        x0,
        config,
        |tau, x| YState {
            tau,
            y: x[0],
            dy: x[1],
            ddy: x[2],
            volterra: x[3],
        },
        |tau, x| {
            if x[0] > 0.0 {
                Ok(())
            } else {
                Err(Error::PositivityViolation { time: tau, value: x[0] })
            }
        },
    )?;
    finish(run, 0.0, config)
}

fn z_run<G: Fn(f64) -> f64>(
    g: G,
    z0: f64,
    p0: f64,
    omega: f64,
    config: &IntegrationConfig,
) -> Result<Run<ZState>> {
    let w2 = omega * omega;
    let rhs = |t: f64, x: &[f64; 2]| -> Result<[f64; 2]> { Ok([x[1], -w2 * x[0] - g(t) * x[0] * x[0]]) };
    let escape = config.escape_z;
    run(
        &rhs,
        0.0,
        [z0, p0],
        config,
        |t, x| ZState { t, z: x[0], p: x[1] },
        |t, x| {
            if x[0].abs() > escape {
                Err(Error::Escape { time: t, z: x[0] })
            } else {
                Ok(())
            }
        },
    )
}

/// Integrates `z'' + omega^2 z + g(t) z^2 = 0` from `t = 0`.
pub fn integrate_z<G: Fn(f64) -> f64>(
    g: G,
    z0: f64,
    p0: f64,
    omega: f64,
    config: &IntegrationConfig,
) -> Result<Trajectory<ZState>> {
    let run = z_run(g, z0, p0, omega, config)?;
    finish(run, 0.0, config)
}

/// Like [`integrate_z`] but returns whatever was integrated before an
/// escape, together with the escape time.
pub fn integrate_z_partial<G: Fn(f64) -> f64>(
    g: G,
    z0: f64,
    p0: f64,
    omega: f64,
    config: &IntegrationConfig,
) -> Result<(Trajectory<ZState>, Option<f64>)> {
    let run = z_run(g, z0, p0, omega, config)?;
    let h = config.h * config.record_every as f64;
    match run.stop {
        None => Ok((Trajectory::new(0.0, h, run.samples)?, None)),
        Some(Error::Escape { time, .. }) => Ok((Trajectory::new(0.0, h, run.samples)?, Some(time))),
        Some(e) => Err(e),
    }
}

/// Lockstep integration of `(y, y', y'', J, z, p)` in physical time, with
/// `g(t) = y(omega t)^(-5/2)` taken from the simultaneous state.
///
/// The `y` components are derivatives with respect to `tau = omega t`.
pub fn integrate_coupled(
    params: &SystemParams,
    z0: f64,
    p0: f64,
    config: &IntegrationConfig,
) -> Result<Trajectory<CoupledState>> {
    let p = *params;
    let w = p.omega();
    let w2 = w * w;
    let rhs = move |t: f64, x: &[f64; 6]| -> Result<[f64; 6]> {
        let tau = w * t;
        let g = inv_pow_five_halves(x[0], t)?;
        Ok([
            w * x[1],
            w * x[2],
            w * (-4.0 * x[1] + p.forcing(tau) * g),
            w * g * tau.cos(),
            x[5],
            -w2 * x[4] - g * x[4] * x[4],
        ])
    };
    let escape = config.escape_z;
    let run = run(
        &rhs,
        0.0,
        [p.y0(), p.yp0(), p.ypp0(), 0.0, z0, p0],
        config,
        |t, x| CoupledState {
            y: YState {
                tau: w * t,
                y: x[0],
                dy: x[1],
                ddy: x[2],
                volterra: x[3],
            },
            z: ZState { t, z: x[4], p: x[5] },
        },
        |t, x| {
            if !(x[0] > 0.0) {
                Err(Error::PositivityViolation { time: t, value: x[0] })
            } else if x[4].abs() > escape {
                Err(Error::Escape { time: t, z: x[4] })
            } else {
                Ok(())
            }
        },
    )?;
    finish(run, 0.0, config)
}

/// Coefficient `g(t)` used when the `z` system is run on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Zero,
    /// `g = y_composite(omega t)^(-5/2)` at the given truncation order.
    Series(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceSystem {
    Y,
    Z { z0: f64, p0: f64, g: Coefficient },
    Coupled { z0: f64, p0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceOrder {
    Estimated(f64),
    /// Step-halving differences are at round-off level; no order can be read off.
    Exact,
}

const EXACT_THRESHOLD: f64 = 1e-13;

fn final_state(system: ConvergenceSystem, params: &SystemParams, config: &IntegrationConfig) -> Result<Vec<f64>> {
    Ok(match system {
        ConvergenceSystem::Y => {
            let s = *integrate_y(params, config)?.last();
            vec![s.y, s.dy, s.ddy, s.volterra]
        }
        ConvergenceSystem::Z { z0, p0, g } => {
            let s = match g {
                Coefficient::Zero => *integrate_z(|_| 0.0, z0, p0, params.omega(), config)?.last(),
                Coefficient::Series(order) => {
                    let alpha = PerturbativeAlpha2::new(params, order)?;
                    let w = params.omega();
                    *integrate_z(|t| alpha.g(w * t), z0, p0, w, config)?.last()
                }
            };
            vec![s.z, s.p]
        }
        ConvergenceSystem::Coupled { z0, p0 } => {
            let s = *integrate_coupled(params, z0, p0, config)?.last();
            vec![s.y.y, s.y.dy, s.y.ddy, s.y.volterra, s.z.z, s.z.p]
        }
    })
}

/// Richardson estimate `log2(|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|)` of the
/// global order at `t_end`, using the max-norm over state components.
pub fn convergence_order(
    system: ConvergenceSystem,
    params: &SystemParams,
    h: f64,
    t_end: f64,
) -> Result<ConvergenceOrder> {
    let c1 = IntegrationConfig {
        record_every: 1,
        ..IntegrationConfig::new(h, t_end)
    };
    let c2 = c1.halved();
    let c4 = c2.halved();
    let x1 = final_state(system, params, &c1)?;
    let x2 = final_state(system, params, &c2)?;
    let x4 = final_state(system, params, &c4)?;
    let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    let d1 = max_diff(&x1, &x2);
    let d2 = max_diff(&x2, &x4);
    if d1 < EXACT_THRESHOLD && d2 < EXACT_THRESHOLD {
        return Ok(ConvergenceOrder::Exact);
    }
    Ok(ConvergenceOrder::Estimated((d1 / d2).log2()))
}
