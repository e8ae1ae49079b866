//! Parameter and state records shared by every other module.
//!
//! The auxiliary function `alpha2(t)` is handled in rescaled time
//! `tau = omega * t`, where it is called `y(tau)` and satisfies
//!
//! ```text
//! y''' + 4 y' = (c1 cos tau + c2 sin tau) / omega^3 * y^(-5/2)
//! ```
//!
//! With `c2 = 0` the forcing is `epsilon cos tau`, `epsilon = c1 / omega^3`.

use crate::error::{Error, Result};

/// Relative tolerance used when both `epsilon` and `(c1, c2)` are supplied.
pub const EPSILON_CONSISTENCY_TOL: f64 = 1e-12;

/// Unvalidated parameter input. Either `epsilon` or `(c1, c2)` (or both)
/// may be given; missing pieces are derived by [`RawParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub omega: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub epsilon: Option<f64>,
    pub y0: f64,
    pub yp0: f64,
    pub ypp0: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            c1: None,
            c2: None,
            epsilon: None,
            y0: 1.0,
            yp0: 0.0,
            ypp0: 0.0,
        }
    }
}

impl RawParams {
    /// Shorthand for the common `omega = 1`, `y'(0) = y''(0) = 0` setup.
    pub fn with_epsilon(epsilon: f64, y0: f64) -> Self {
        Self {
            epsilon: Some(epsilon),
            y0,
            ..Self::default()
        }
    }

    pub fn validate(self) -> Result<SystemParams> {
        validate_params(self)
    }
}

/// Validated model constants. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    omega: f64,
    c1: f64,
    c2: f64,
    epsilon: f64,
    y0: f64,
    yp0: f64,
    ypp0: f64,
}

fn check_finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NotFinite { field, value })
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    check_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { field, value })
    }
}

/// Reduced forcing strength implied by `(c1, c2)`.
///
/// For `c2 = 0` the sign of `c1` is kept so that the forcing reads
/// `epsilon cos tau` without a phase shift; otherwise the amplitude
/// `sqrt(c1^2 + c2^2) / omega^3` is returned.
fn epsilon_from(c1: f64, c2: f64, omega: f64) -> f64 {
    let w3 = omega * omega * omega;
    if c2 == 0.0 {
        c1 / w3
    } else {
        c1.hypot(c2) / w3
    }
}

/// Checks the invariants of a raw record and fills in derived fields.
pub fn validate_params(raw: RawParams) -> Result<SystemParams> {
    check_positive("omega", raw.omega)?;
    check_positive("y0", raw.y0)?;
    check_finite("yp0", raw.yp0)?;
    check_finite("ypp0", raw.ypp0)?;

    let (c1, c2, epsilon) = match (raw.c1, raw.c2, raw.epsilon) {
        (None, None, eps) => {
            let eps = eps.unwrap_or(0.0);
            check_finite("epsilon", eps)?;
            (eps * raw.omega.powi(3), 0.0, eps)
        }
        (c1, c2, eps) => {
            let c1 = c1.unwrap_or(0.0);
            let c2 = c2.unwrap_or(0.0);
            check_finite("c1", c1)?;
            check_finite("c2", c2)?;
            let computed = epsilon_from(c1, c2, raw.omega);
            if let Some(given) = eps {
                check_finite("epsilon", given)?;
                let scale = given.abs().max(computed.abs());
                if (given - computed).abs() > EPSILON_CONSISTENCY_TOL * scale {
                    return Err(Error::InconsistentEpsilon { given, computed });
                }
            }
            (c1, c2, computed)
        }
    };

    Ok(SystemParams {
        omega: raw.omega,
        c1,
        c2,
        epsilon,
        y0: raw.y0,
        yp0: raw.yp0,
        ypp0: raw.ypp0,
    })
}

impl SystemParams {
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn yp0(&self) -> f64 {
        self.yp0
    }
    pub fn ypp0(&self) -> f64 {
        self.ypp0
    }

    /// `sqrt(c1^2 + c2^2)`.
    pub fn forcing_amplitude(&self) -> f64 {
        self.c1.hypot(self.c2)
    }

    /// The closed-form series were derived for `y'(0) = y''(0) = 0`.
    pub fn in_tested_regime(&self) -> bool {
        self.yp0 == 0.0 && self.ypp0 == 0.0
    }

    pub fn to_raw(&self) -> RawParams {
        RawParams {
            omega: self.omega,
            c1: Some(self.c1),
            c2: Some(self.c2),
            epsilon: Some(self.epsilon),
            y0: self.y0,
            yp0: self.yp0,
            ypp0: self.ypp0,
        }
    }

    /// Re-runs validation on an already validated record.
    pub fn validate(&self) -> Result<SystemParams> {
        validate_params(self.to_raw())
    }

    /// Same constants with a different `epsilon` (forcing rebuilt as `epsilon cos tau`).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<SystemParams> {
        RawParams {
            omega: self.omega,
            c1: None,
            c2: None,
            epsilon: Some(epsilon),
            y0: self.y0,
            yp0: self.yp0,
            ypp0: self.ypp0,
        }
        .validate()
    }

    pub fn with_y0(&self, y0: f64) -> Result<SystemParams> {
        let mut raw = self.to_raw();
        raw.y0 = y0;
        raw.validate()
    }

    /// Forcing `(c1 cos tau + c2 sin tau) / omega^3` of the rescaled equation.
    #[inline]
    pub fn forcing(&self, tau: f64) -> f64 {
        let (s, c) = tau.sin_cos();
        (self.c1 * c + self.c2 * s) / self.omega.powi(3)
    }

    /// `alpha1(t) = (c1 cos wt + c2 sin wt) / 2` and its time derivative.
    #[inline]
    pub fn alpha1(&self, t: f64) -> (f64, f64) {
        let (s, c) = (self.omega * t).sin_cos();
        let a1 = 0.5 * (self.c1 * c + self.c2 * s);
        let da1 = 0.5 * self.omega * (self.c2 * c - self.c1 * s);
        (a1, da1)
    }

    #[inline]
    pub fn tau_of_t(&self, t: f64) -> f64 {
        tau_of_t(t, self)
    }

    #[inline]
    pub fn t_of_tau(&self, tau: f64) -> f64 {
        t_of_tau(tau, self)
    }
}

#[inline]
pub fn tau_of_t(t: f64, params: &SystemParams) -> f64 {
    params.omega * t
}

#[inline]
pub fn t_of_tau(tau: f64, params: &SystemParams) -> f64 {
    tau / params.omega
}

/// State of the `alpha2` subsystem at rescaled time `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YState {
    pub tau: f64,
    pub y: f64,
    pub dy: f64,
    pub ddy: f64,
    /// `J(tau) = int_0^tau y(s)^(-5/2) cos s ds`.
    pub volterra: f64,
}

/// Oscillator state at physical time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZState {
    pub t: f64,
    pub z: f64,
    pub p: f64,
}

/// Simultaneous `y` and `z` state from the coupled integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledState {
    pub y: YState,
    pub z: ZState,
}

/// Uniformly spaced samples `samples[k]` at time `t0 + k * h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    t0: f64,
    h: f64,
    samples: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn new(t0: f64, h: f64, samples: Vec<S>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidConfig(format!("sample spacing {h} must be positive")));
        }
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "a trajectory needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        Ok(Self { t0, h, samples })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Spacing between stored samples.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<S> {
        self.samples
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    pub fn first(&self) -> &S {
        &self.samples[0]
    }

    pub fn last(&self) -> &S {
        &self.samples[self.samples.len() - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .map(move |(k, s)| (self.time(k), s))
    }

    /// Applies `f` to every sample, keeping the time grid.
    pub fn map<T>(&self, f: impl FnMut(&S) -> T) -> Trajectory<T> {
        Trajectory {
            t0: self.t0,
            h: self.h,
            samples: self.samples.iter().map(f).collect(),
        }
    }
}
