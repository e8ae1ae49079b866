//! The quadratic-in-`p` invariant of the driven oscillator, evaluated either
//! exactly from a co-integrated `alpha2` or through truncated coefficient
//! series, and drift statistics along trajectories.

use crate::error::{Error, Result};
use crate::integrate::{integrate_coupled, integrate_z, IntegrationConfig};
use crate::model::{SystemParams, Trajectory, YState, ZState};
use crate::perturb::{check_order, PerturbativeAlpha2};
use crate::series::{Basis, SeriesEvaluator, TrigSeries};

/// Below this `|I(0)|` drift is reported in absolute terms.
pub const RELATIVE_DRIFT_FLOOR: f64 = 1e-12;

/// `I = alpha2 p^2 - alpha2' z p + alpha1 p + (omega^2 alpha2 + alpha2''/2) z^2
///  - alpha1' z + (2/3) alpha2^(-3/2) z^3`.
///
/// `alpha2` and its derivatives come from `ystate` (taken in `tau`, converted
/// to `t` by the chain rule), `alpha1` from the forcing constants.
pub fn invariant_exact(ystate: &YState, zstate: &ZState, params: &SystemParams) -> Result<f64> {
    let a2 = ystate.y;
    if !(a2 > 0.0) {
        return Err(Error::NonPositiveY(a2));
    }
    let w = params.omega();
    let da2 = w * ystate.dy;
    let dda2 = w * w * ystate.ddy;
    let (a1, da1) = params.alpha1(zstate.t);
    let (z, p) = (zstate.z, zstate.p);
    Ok(a2 * p * p - da2 * z * p + a1 * p + (w * w * a2 + 0.5 * dda2) * z * z - da1 * z
        + 2.0 / 3.0 / (a2 * a2.sqrt()) * z * z * z)
}

/// `I = a1 z + a2 p + a3 z^2 + a4 z p + a5 p^2 + a6 z^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
}

impl InvariantCoeffs {
    pub fn eval(&self, z: f64, p: f64) -> f64 {
        self.a1 * z + self.a2 * p + self.a3 * z * z + self.a4 * z * p + self.a5 * p * p + self.a6 * z * z * z
    }
}

type Table = &'static [(Basis, f64)];

/// `eps^n` blocks of `A31 = A3 - alpha2`, as (terms, denominator, power of `y0`).
const A31: [(Table, f64, f64); 3] = [
    (&[(Basis::sin(0, 2), 2.0), (Basis::sin(0, 1), -1.0)], 6.0, -2.5),
    (
        &[
            (Basis::cos(0, 1), 5.0),
            (Basis::cos(0, 2), 4.0),
            (Basis::cos(0, 3), -9.0),
            (Basis::sin(1, 2), -15.0),
        ],
        144.0,
        -6.0,
    ),
    (
        &[
            (Basis::sin(0, 5), -25.0),
            (Basis::sin(0, 4), 120.0),
            (Basis::sin(0, 3), -531.0),
            (Basis::sin(0, 2), 644.0),
            (Basis::sin(0, 1), -230.0),
            (Basis::cos(1, 3), 135.0),
            (Basis::cos(1, 2), 120.0),
            (Basis::cos(1, 1), -75.0),
        ],
        6912.0,
        -9.5,
    ),
];

const A4: [(Table, f64, f64); 3] = [
    (&[(Basis::cos(0, 1), 1.0), (Basis::cos(0, 2), -1.0)], -3.0, -2.5),
    (
        &[
            (Basis::sin(0, 3), -12.0),
            (Basis::sin(0, 2), -7.0),
            (Basis::sin(0, 1), 20.0),
            (Basis::cos(1, 2), 30.0),
        ],
        -288.0,
        -6.0,
    ),
    (
        &[
            (Basis::cos(0, 5), 5.0),
            (Basis::cos(0, 4), -30.0),
            (Basis::cos(0, 3), 192.0),
            (Basis::cos(0, 2), -292.0),
            (Basis::cos(0, 1), 155.0),
            (Basis::sin(1, 3), 45.0),
            (Basis::sin(1, 2), 60.0),
            (Basis::sin(1, 1), -75.0),
            (Basis::monomial(0), -30.0),
        ],
        -3456.0,
        -9.5,
    ),
];

fn truncated(blocks: &[(Table, f64, f64); 3], eps: f64, y0: f64, order: u8) -> TrigSeries {
    let mut out = TrigSeries::zero();
    for (n, &(table, denom, power)) in blocks.iter().enumerate().take(order as usize) {
        let scale = eps.powi(n as i32 + 1) * y0.powf(power) / denom;
        out = &out + &TrigSeries::from_terms(table.iter().map(|&(b, c)| (b, c * scale)));
    }
    out
}

/// Truncated coefficient functions prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct PerturbativeInvariant {
    params: SystemParams,
    alpha: PerturbativeAlpha2,
    a31: SeriesEvaluator,
    a4: SeriesEvaluator,
}

impl PerturbativeInvariant {
    /// Requires `omega = 1`, `c2 = 0` and `1 <= order <= 3`.
    pub fn new(params: &SystemParams, order: u8) -> Result<Self> {
        check_order(order)?;
        if params.omega() != 1.0 {
            return Err(Error::UnsupportedOmega(params.omega()));
        }
        let alpha = PerturbativeAlpha2::new(params, order)?;
        let (eps, y0) = (params.epsilon(), params.y0());
        Ok(Self {
            params: *params,
            alpha,
            a31: truncated(&A31, eps, y0, order).evaluator(),
            a4: truncated(&A4, eps, y0, order).evaluator(),
        })
    }

    pub fn alpha2(&self) -> &PerturbativeAlpha2 {
        &self.alpha
    }

    pub fn coeffs(&self, t: f64) -> InvariantCoeffs {
        let (a1, da1) = self.params.alpha1(t);
        let a2 = self.alpha.y(t);
        InvariantCoeffs {
            a1: -da1,
            a2: a1,
            a3: self.a31.eval(t) + a2,
            a4: self.a4.eval(t),
            a5: a2,
            a6: 2.0 / 3.0 / (a2 * a2.sqrt()),
        }
    }
}

pub fn invariant_coeffs(t: f64, params: &SystemParams, order: u8) -> Result<InvariantCoeffs> {
    Ok(PerturbativeInvariant::new(params, order)?.coeffs(t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSample {
    pub t: f64,
    pub value: f64,
    /// `100 |I(t) - I(0)| / |I(0)|`, or `|I(t) - I(0)|` when the report is absolute.
    pub drift_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub samples: Trajectory<InvariantSample>,
    pub initial: f64,
    pub max_drift_pct: f64,
    pub final_drift_pct: f64,
    /// Set when `|I(0)|` was too small to normalise by.
    pub absolute: bool,
}

impl DriftReport {
    /// Builds the report from invariant values on a uniform grid.
    pub fn from_values(t0: f64, h: f64, values: &[f64]) -> Result<Self> {
        let initial = *values
            .first()
            .ok_or_else(|| Error::InsufficientSamples("empty invariant series".into()))?;
        let absolute = initial.abs() < RELATIVE_DRIFT_FLOOR;
        let scale = if absolute { 1.0 } else { 100.0 / initial.abs() };
        let samples: Vec<InvariantSample> = values
            .iter()
            .enumerate()
            .map(|(k, &value)| InvariantSample {
                t: t0 + k as f64 * h,
                value,
                drift_pct: (value - initial).abs() * scale,
            })
            .collect();
        let max_drift_pct = samples.iter().map(|s| s.drift_pct).fold(0.0, f64::max);
        let final_drift_pct = samples.last().map_or(0.0, |s| s.drift_pct);
        Ok(Self {
            samples: Trajectory::new(t0, h, samples)?,
            initial,
            max_drift_pct,
            final_drift_pct,
            absolute,
        })
    }
}

/// Integrates `z` with `g` taken from the order-`order` composite `alpha2`
/// and tracks the truncated invariant along the decimated samples.
pub fn drift_experiment(
    params: &SystemParams,
    z0: f64,
    p0: f64,
    config: &IntegrationConfig,
    order: u8,
) -> Result<DriftReport> {
    let inv = PerturbativeInvariant::new(params, order)?;
    let alpha = inv.alpha2();
    let traj = integrate_z(|t| alpha.g(t), z0, p0, 1.0, config)?;
    let values: Vec<f64> = traj.samples().iter().map(|s| inv.coeffs(s.t).eval(s.z, s.p)).collect();
    DriftReport::from_values(traj.t0(), traj.h(), &values)
}

/// Exact mode: coupled integration of `alpha2` and `z` with the invariant
/// evaluated from the simultaneous state.
pub fn exact_drift(params: &SystemParams, z0: f64, p0: f64, config: &IntegrationConfig) -> Result<DriftReport> {
    let traj = integrate_coupled(params, z0, p0, config)?;
    let values = traj
        .samples()
        .iter()
        .map(|s| invariant_exact(&s.y, &s.z, params))
        .collect::<Result<Vec<_>>>()?;
    DriftReport::from_values(traj.t0(), traj.h(), &values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubePoint {
    pub z: f64,
    pub p: f64,
    pub t: f64,
}

/// One trajectory on the level set `I = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeFilament {
    pub z0: f64,
    pub p0: f64,
    pub k: f64,
    pub max_drift_pct: f64,
    pub points: Vec<TubePoint>,
}

/// Exact-mode trajectories for every `(z0, p0)` in the product of the grids.
pub fn tube_surface_samples(
    params: &SystemParams,
    z0_grid: &[f64],
    p0_grid: &[f64],
    config: &IntegrationConfig,
) -> Result<Vec<TubeFilament>> {
    if z0_grid.is_empty() || p0_grid.is_empty() {
        return Err(Error::InvalidConfig("initial-condition grids must be nonempty".into()));
    }
    let mut out = Vec::with_capacity(z0_grid.len() * p0_grid.len());
    for &z0 in z0_grid {
        for &p0 in p0_grid {
            let traj = integrate_coupled(params, z0, p0, config)?;
            let values = traj
                .samples()
                .iter()
                .map(|s| invariant_exact(&s.y, &s.z, params))
                .collect::<Result<Vec<_>>>()?;
            let report = DriftReport::from_values(traj.t0(), traj.h(), &values)?;
            out.push(TubeFilament {
                z0,
                p0,
                k: report.initial,
                max_drift_pct: report.max_drift_pct,
                points: traj
                    .samples()
                    .iter()
                    .map(|s| TubePoint {
                        z: s.z.z,
                        p: s.z.p,
                        t: s.z.t,
                    })
                    .collect(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RawParams;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(eps: f64, y0: f64) -> SystemParams {
        RawParams::with_epsilon(eps, y0).validate().unwrap()
    }

    #[test]
    fn autonomous_limit() {
        let y = YState {
            tau: 0.0,
            y: 1.0,
            dy: 0.0,
            ddy: 0.0,
            volterra: 0.0,
        };
        let z = ZState { t: 3.0, z: 0.3, p: -0.2 };
        let i = invariant_exact(&y, &z, &params(0.0, 1.0)).unwrap();
        assert!((i - (0.04 + 0.09 + 2.0 / 3.0 * 0.027)).abs() < 1e-15);
    }

    #[test]
    fn non_positive_alpha2_rejected() {
        let y = YState {
            tau: 0.0,
            y: 0.0,
            dy: 0.0,
            ddy: 0.0,
            volterra: 0.0,
        };
        let z = ZState { t: 0.0, z: 0.1, p: 0.0 };
        assert_eq!(invariant_exact(&y, &z, &params(0.0, 1.0)), Err(Error::NonPositiveY(0.0)));
    }

    #[test]
    fn coefficients_at_zero_forcing() {
        for y0 in [0.7, 1.0, 1.9] {
            let c = invariant_coeffs(4.2, &params(0.0, y0), 3).unwrap();
            assert_eq!((c.a1, c.a2, c.a4), (0.0, 0.0, 0.0));
            assert_eq!(c.a3, y0);
            assert_eq!(c.a5, y0);
            assert!((c.a6 - 2.0 / 3.0 * y0.powf(-1.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_coefficients() {
        let p = params(0.05, 1.1);
        let c = invariant_coeffs(0.0, &p, 3).unwrap();
        assert_eq!(c.a1, 0.0);
        assert!((c.a2 - 0.025).abs() < 1e-15);
        let c = invariant_coeffs(FRAC_PI_2, &p, 3).unwrap();
        assert!((c.a1 - 0.025).abs() < 1e-15);
        let c = invariant_coeffs(PI, &p, 3).unwrap();
        assert!((c.a2 + 0.025).abs() < 1e-15);
    }

    #[test]
    fn initial_value() {
        let p = params(0.05, 1.1);
        let c = invariant_coeffs(0.0, &p, 3).unwrap();
        let i0 = c.eval(0.2, 0.0);
        assert!((i0 - (c.a3 * 0.04 + c.a6 * 0.008)).abs() < 1e-16);
        // A31(0) = eps^2 / (144 y0^6) * (5 + 4 - 9) = 0
        assert!((c.a3 - 1.1).abs() < 1e-15);
    }

    #[test]
    fn perturbative_needs_unit_frequency() {
        let p = RawParams {
            omega: 2.0,
            epsilon: Some(0.1),
            ..RawParams::default()
        }
        .validate()
        .unwrap();
        assert_eq!(invariant_coeffs(0.0, &p, 3), Err(Error::UnsupportedOmega(2.0)));
    }

    #[test]
    fn a4_is_minus_alpha2_prime() {
        for order in 1..=3u8 {
            let p = params(0.05, 1.0);
            let inv = PerturbativeInvariant::new(&p, order).unwrap();
            for &t in &[0.7, 5.0, 33.0] {
                let diff = inv.coeffs(t).a4 + inv.alpha2().point(t).dy;
                assert!(diff.abs() < 50.0 * 0.05f64.powi(order as i32 + 1), "order {order}, t {t}: {diff}");
            }
        }
    }

    #[test]
    fn a3_consistency_is_fourth_order() {
        let sup = |eps: f64| {
            let p = params(eps, 1.0);
            let inv = PerturbativeInvariant::new(&p, 3).unwrap();
            (0..=5000)
                .map(|k| {
                    let t = k as f64 * 0.01;
                    let a = inv.alpha2();
                    (inv.coeffs(t).a3 - (a.y(t) + 0.5 * a.ddy_direct(t))).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = sup(0.05) / sup(0.025);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn exact_mode_conserves() {
        let cfg = IntegrationConfig::new(1e-3, 100.0).record_every(100);
        let r = exact_drift(&params(0.05, 1.1), 0.2, 0.0, &cfg).unwrap();
        assert!(!r.absolute);
        assert!(r.max_drift_pct < 1e-4, "{}", r.max_drift_pct);
        assert_eq!(r.samples.first().drift_pct, 0.0);
    }

    #[test]
    fn exact_mode_drift_is_integrator_error() {
        let run = |h: f64| {
            let cfg = IntegrationConfig::new(h, 50.0).record_every((0.1 / h).round() as usize);
            exact_drift(&params(0.1, 1.0), 0.3, 0.1, &cfg).unwrap().max_drift_pct
        };
        let ratio = run(0.02) / run(0.01);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn perturbative_drift_is_truncation_error() {
        let p = params(0.05, 0.9);
        let run = |h: f64| {
            let cfg = IntegrationConfig::new(h, 100.0).record_every((0.1 / h).round() as usize);
            drift_experiment(&p, 0.2, 0.0, &cfg, 3).unwrap().max_drift_pct
        };
        let (a, b) = (run(0.01), run(0.005));
        assert!(((a - b) / b).abs() < 0.01, "{a} vs {b}");
    }

    #[test]
    fn absolute_drift_guard() {
        let r = DriftReport::from_values(0.0, 1.0, &[0.0, 1e-14, -2e-14]).unwrap();
        assert!(r.absolute);
        assert_eq!(r.max_drift_pct, 2e-14);
        assert!(DriftReport::from_values(0.0, 1.0, &[]).is_err());
    }

    #[test]
    fn tube_filaments() {
        let cfg = IntegrationConfig::new(1e-2, 2.0 * PI).record_every(1);
        let p = params(0.0, 1.0);
        let tubes = tube_surface_samples(&p, &[0.1, 0.2], &[0.0], &cfg).unwrap();
        assert_eq!(tubes.len(), 2);
        assert!((tubes[0].k - tubes[1].k).abs() > 1e-3);
        for f in &tubes {
            assert!(f.max_drift_pct < 1e-6);
        }
        assert!(tube_surface_samples(&p, &[], &[0.0], &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn exact_invariant_conserved_short_runs(
            eps in 0.0f64..0.1,
            y0 in 0.8f64..1.5,
            z0 in -0.3f64..0.3,
            p0 in -0.3f64..0.3,
        ) {
            prop_assume!(z0.abs() + p0.abs() > 0.05);
            let cfg = IntegrationConfig::new(1e-2, 20.0).record_every(10);
            let r = exact_drift(&params(eps, y0), z0, p0, &cfg).unwrap();
            prop_assert!(r.max_drift_pct < 1e-4);
        }
    }
}
