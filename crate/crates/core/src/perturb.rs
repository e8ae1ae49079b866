//! Closed-form perturbation series for `y(tau) = alpha2(t)`.
//!
//! With `y = y0 * exp(rho)` and `rho = eps rho1 + eps^2 rho2 + eps^3 rho3`,
//! each `rho_n` is a finite [`TrigSeries`] scaled by `y0^(-7n/2)`. The
//! second-order term carries the secular `tau sin 2tau` response of the
//! 2:1 resonance; the third-order term has five secular pieces.

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::series::{Basis, SeriesEvaluator, TrigSeries};

const RHO1: &[(Basis, f64)] = &[(Basis::sin(0, 1), 1.0 / 3.0), (Basis::sin(0, 2), -1.0 / 6.0)];

const RHO2: &[(Basis, f64)] = &[
    (Basis::monomial(0), -5.0 / 288.0),
    (Basis::cos(0, 1), -1.0 / 24.0),
    (Basis::cos(0, 2), 19.0 / 288.0),
    (Basis::cos(0, 3), -1.0 / 72.0),
    (Basis::cos(0, 4), 1.0 / 144.0),
    (Basis::sin(1, 2), 5.0 / 96.0),
];

/// Bracketed terms of `rho3`; the whole bracket is divided by 2592.
const RHO3: &[(Basis, f64)] = &[
    (Basis::monomial(1), -45.0 / 4.0),
    (Basis::cos(1, 1), 135.0 / 4.0),
    (Basis::cos(1, 2), -45.0 / 2.0),
    (Basis::cos(1, 3), 45.0 / 4.0),
    (Basis::cos(1, 4), -45.0 / 4.0),
    (Basis::sin(0, 1), 159.0 / 2.0),
    (Basis::sin(0, 2), -327.0 / 4.0),
    (Basis::sin(0, 3), 73.0 / 4.0),
    (Basis::sin(0, 4), 69.0 / 8.0),
    (Basis::sin(0, 5), -9.0 / 4.0),
    (Basis::sin(0, 6), 1.0),
];
const RHO3_DENOM: f64 = 2592.0;

/// Coefficient of the secular `tau sin 2tau` term of `rho2` at `y0 = 1`.
pub const SECULAR_COEFFICIENT: f64 = 5.0 / 96.0;

pub(crate) fn check_order(order: u8) -> Result<()> {
    if (1..=3).contains(&order) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(order))
    }
}

/// `rho_n(tau)` for `n = 1, 2, 3` as a series in `tau`.
pub fn rho_series(n: u8, y0: f64) -> Result<TrigSeries> {
    check_order(n)?;
    let (table, denom) = match n {
        1 => (RHO1, 1.0),
        2 => (RHO2, 1.0),
        _ => (RHO3, RHO3_DENOM),
    };
    let scale = y0.powf(-3.5 * n as f64) / denom;
    Ok(TrigSeries::from_terms(table.iter().map(|&(b, c)| (b, c * scale))))
}

fn rho_eval(n: u8, tau: f64, y0: f64) -> f64 {
    rho_series(n, y0).expect("order in range").eval(tau)
}

/// `rho1 = y0^(-7/2) (sin tau / 3 - sin 2tau / 6)`.
pub fn rho1(tau: f64, y0: f64) -> f64 {
    rho_eval(1, tau, y0)
}

pub fn rho2(tau: f64, y0: f64) -> f64 {
    rho_eval(2, tau, y0)
}

pub fn rho3(tau: f64, y0: f64) -> f64 {
    rho_eval(3, tau, y0)
}

/// `sigma = sum_{n <= order} eps^n rho_n`.
pub fn sigma_series(params: &SystemParams, order: u8) -> Result<TrigSeries> {
    check_order(order)?;
    let eps = params.epsilon();
    let mut sigma = TrigSeries::zero();
    for n in 1..=order {
        sigma = &sigma + &rho_series(n, params.y0())?.scale(eps.powi(n as i32));
    }
    Ok(sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub tau: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub drho1: f64,
    pub drho2: f64,
    pub drho3: f64,
    /// `eps rho1 + eps^2 rho2 + eps^3 rho3`.
    pub rho: f64,
    /// `y0 * exp(rho)`.
    pub y_comp: f64,
}

pub fn series_eval(tau: f64, params: &SystemParams) -> SeriesEval {
    let y0 = params.y0();
    let eps = params.epsilon();
    let mut vals = [0.0; 3];
    let mut ders = [0.0; 3];
    for n in 1..=3u8 {
        let s = rho_series(n, y0).expect("order in range");
        vals[n as usize - 1] = s.eval(tau);
        ders[n as usize - 1] = s.derivative().eval(tau);
    }
    let rho = eps * vals[0] + eps * eps * vals[1] + eps.powi(3) * vals[2];
    SeriesEval {
        tau,
        rho1: vals[0],
        rho2: vals[1],
        rho3: vals[2],
        drho1: ders[0],
        drho2: ders[1],
        drho3: ders[2],
        rho,
        y_comp: y0 * rho.exp(),
    }
}

/// Taylor coefficients of `exp(-5x/2)` up to `x^degree`.
fn exp_neg_five_halves(degree: u8) -> Vec<f64> {
    let mut coefs = Vec::with_capacity(degree as usize + 1);
    let mut c = 1.0;
    for j in 0..=degree as usize {
        if j > 0 {
            c *= -2.5 / j as f64;
        }
        coefs.push(c);
    }
    coefs
}

/// Values of the composite `alpha2` and its `tau`-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha2Point {
    pub y: f64,
    pub dy: f64,
    pub ddy: f64,
}

/// The truncated composite `y(tau) = y0 exp(sigma(tau))` prepared for
/// repeated evaluation.
///
/// `y'` comes from the logarithmic derivative `y sigma'`. `y''` comes from
/// the once-integrated equation `y'' = 4 (y0 - y) + eps J`, where the history
/// integral `J` uses the integrand `y0^(-5/2) exp(-5 sigma / 2) cos s` with
/// the exponential Taylor-expanded to degree `order` and integrated in closed
/// form, so no truncated expression is ever differentiated twice.
#[derive(Debug, Clone)]
pub struct PerturbativeAlpha2 {
    y0: f64,
    epsilon: f64,
    order: u8,
    sigma: SeriesEvaluator,
    dsigma: SeriesEvaluator,
    ddsigma: SeriesEvaluator,
    dddsigma: SeriesEvaluator,
    volterra: SeriesEvaluator,
}

impl PerturbativeAlpha2 {
    pub fn new(params: &SystemParams, order: u8) -> Result<Self> {
        check_order(order)?;
        if params.c2() != 0.0 {
            return Err(Error::UnsupportedForcing(params.c2()));
        }
        let sigma = sigma_series(params, order)?;
        let d1 = sigma.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        let integrand = &sigma.polynomial(&exp_neg_five_halves(order)) * &TrigSeries::from_terms([(Basis::cos(0, 1), 1.0)]);
        let volterra = integrand.scale(params.y0().powf(-2.5)).integral();
        Ok(Self {
            y0: params.y0(),
            epsilon: params.epsilon(),
            order,
            sigma: sigma.evaluator(),
            dsigma: d1.evaluator(),
            ddsigma: d2.evaluator(),
            dddsigma: d3.evaluator(),
            volterra: volterra.evaluator(),
        })
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn sigma(&self, tau: f64) -> f64 {
        self.sigma.eval(tau)
    }

    pub fn y(&self, tau: f64) -> f64 {
        self.y0 * self.sigma.eval(tau).exp()
    }

    /// `g = y^(-5/2)`.
    pub fn g(&self, tau: f64) -> f64 {
        let y = self.y(tau);
        1.0 / (y * y * y.sqrt())
    }

    /// Closed-form history integral `J(tau)` of the order-matched integrand.
    pub fn volterra(&self, tau: f64) -> f64 {
        self.volterra.eval(tau)
    }

    pub fn point(&self, tau: f64) -> Alpha2Point {
        let y = self.y(tau);
        Alpha2Point {
            y,
            dy: y * self.dsigma.eval(tau),
            ddy: 4.0 * (self.y0 - y) + self.epsilon * self.volterra(tau),
        }
    }

    /// `y'' ` by direct differentiation of the composite, `y (sigma'' + sigma'^2)`.
    pub fn ddy_direct(&self, tau: f64) -> f64 {
        let s1 = self.dsigma.eval(tau);
        self.y(tau) * (self.ddsigma.eval(tau) + s1 * s1)
    }

    /// Residual `y''' + 4y' - eps cos(tau) y^(-5/2)` of the composite, with
    /// exact derivatives of the truncated series.
    pub fn residual(&self, tau: f64) -> f64 {
        let y = self.y(tau);
        let s1 = self.dsigma.eval(tau);
        let s2 = self.ddsigma.eval(tau);
        let s3 = self.dddsigma.eval(tau);
        let dy = y * s1;
        let dddy = y * (s3 + 3.0 * s1 * s2 + s1 * s1 * s1);
        dddy + 4.0 * dy - self.epsilon * tau.cos() / (y * y * y.sqrt())
    }
}

/// `y0 exp(sum_{n <= order} eps^n rho_n(tau))`; positive by construction.
pub fn y_composite(tau: f64, params: &SystemParams, order: u8) -> Result<f64> {
    Ok(params.y0() * sigma_series(params, order)?.eval(tau).exp())
}

/// `g(t) = alpha2(t)^(-5/2)` from the composite at `tau = omega t`.
pub fn g_of_t(t: f64, params: &SystemParams, order: u8) -> Result<f64> {
    let y = y_composite(params.tau_of_t(t), params, order)?;
    Ok(1.0 / (y * y * y.sqrt()))
}

/// `(alpha2', alpha2'')` with respect to `tau`; see [`PerturbativeAlpha2`].
pub fn alpha2_derivatives(tau: f64, params: &SystemParams, order: u8) -> Result<(f64, f64)> {
    let p = PerturbativeAlpha2::new(params, order)?.point(tau);
    Ok((p.dy, p.ddy))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityWindow {
    /// `96 y0^6 / (5 eps^2)`, infinite without forcing.
    pub tau_star: f64,
    /// `eps y0^(-7/2)`.
    pub eps_eff: f64,
}

pub fn validity(params: &SystemParams) -> ValidityWindow {
    let y0 = params.y0();
    let eps = params.epsilon();
    let tau_star = if eps == 0.0 {
        f64::INFINITY
    } else {
        96.0 * y0.powi(6) / (5.0 * eps * eps)
    };
    ValidityWindow {
        tau_star,
        eps_eff: eps * y0.powf(-3.5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RawParams;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(eps: f64, y0: f64) -> SystemParams {
        RawParams::with_epsilon(eps, y0).validate().unwrap()
    }

    #[test]
    fn rho1_values() {
        assert_eq!(rho1(0.0, 1.0), 0.0);
        assert!((rho1(FRAC_PI_2, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((rho1(FRAC_PI_2, 4.0) - 1.0 / 384.0).abs() < 1e-17);
    }

    #[test]
    fn rho2_values() {
        assert!(rho2(0.0, 1.0).abs() < 1e-16);
        // -5/288 + 1/24 + 19/288 + 1/72 + 1/144 = 1/9, secular term vanishes at pi
        assert!((rho2(PI, 1.0) - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_conditions() {
        for y0 in [0.5, 1.0, 2.3] {
            for n in 1..=3u8 {
                let s = rho_series(n, y0).unwrap();
                assert!(s.eval(0.0).abs() < 1e-12, "rho{n}(0)");
                assert!(s.derivative().eval(0.0).abs() < 1e-12, "rho{n}'(0)");
            }
        }
    }

    /// Frozen from an independent 50-digit evaluation of the closed form
    /// (term by term with exact rational coefficients).
    #[test]
    fn rho3_regression_values() {
        assert!((rho3(FRAC_PI_2, 1.0) - RHO3_AT_HALF_PI).abs() < 1e-15);
        assert!((rho3(10.0, 1.0) - RHO3_AT_TEN).abs() < 1e-14);
        assert!((rho3(FRAC_PI_2, 2.0) - RHO3_AT_HALF_PI * 2f64.powf(-10.5)).abs() < 1e-18);
    }

    const RHO3_AT_HALF_PI: f64 = 0.022_762_345_679_012_346;
    const RHO3_AT_TEN: f64 = -0.202_285_370_685_416_83;

    #[test]
    fn composite_unforced() {
        let p = params(0.0, 1.7);
        for order in 1..=3 {
            assert_eq!(y_composite(12.0, &p, order).unwrap(), 1.7);
        }
        let (d1, d2) = alpha2_derivatives(3.0, &p, 3).unwrap();
        assert_eq!(d1, 0.0);
        assert!(d2.abs() < 1e-15);
    }

    #[test]
    fn g_values() {
        assert_eq!(g_of_t(5.0, &params(0.0, 1.0), 3).unwrap(), 1.0);
        assert!((g_of_t(5.0, &params(0.0, 4.0), 3).unwrap() - 1.0 / 32.0).abs() < 1e-16);
    }

    #[test]
    fn composite_is_positive() {
        for &(eps, y0) in &[(0.1, 1.0), (0.1, 0.7), (0.2, 0.5), (0.05, 0.8)] {
            let a = PerturbativeAlpha2::new(&params(eps, y0), 3).unwrap();
            for k in 0..=10_000 {
                assert!(a.y(k as f64 * 0.1) > 0.0);
            }
        }
    }

    #[test]
    fn first_derivative_against_finite_difference() {
        let p = params(0.1, 0.9);
        let a = PerturbativeAlpha2::new(&p, 3).unwrap();
        let d = 1e-5;
        for &tau in &[0.5, 3.0, 17.0, 60.0] {
            let fd = (a.y(tau + d) - a.y(tau - d)) / (2.0 * d);
            assert!((a.point(tau).dy - fd).abs() < 1e-8, "tau = {tau}");
        }
    }

    #[test]
    fn second_derivative_against_finite_difference() {
        // Volterra route agrees with the second difference up to O(eps^4).
        for &eps in &[0.1, 0.05] {
            let a = PerturbativeAlpha2::new(&params(eps, 1.0), 3).unwrap();
            let d = 1e-4;
            for &tau in &[0.5, 3.0, 17.0] {
                let fd = (a.y(tau + d) - 2.0 * a.y(tau) + a.y(tau - d)) / (d * d);
                let err = (a.point(tau).ddy - fd).abs();
                assert!(err < 20.0 * eps.powi(4), "eps = {eps}, tau = {tau}, err = {err}");
                assert!((a.ddy_direct(tau) - fd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn volterra_route_converges_at_fourth_order() {
        let sup = |eps: f64| {
            let a = PerturbativeAlpha2::new(&params(eps, 1.0), 3).unwrap();
            (0..=500)
                .map(|k| {
                    let tau = k as f64 * 0.1;
                    (a.point(tau).ddy - a.ddy_direct(tau)).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = sup(0.05) / sup(0.025);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn residual_scales_with_truncation_order() {
        let sup = |eps: f64, order: u8| {
            let a = PerturbativeAlpha2::new(&params(eps, 1.0), order).unwrap();
            (0..=2000)
                .map(|k| a.residual(k as f64 * 0.01).abs())
                .fold(0.0, f64::max)
        };
        for (order, expect) in [(1u8, 4.0), (2, 8.0), (3, 16.0)] {
            let ratio = sup(0.02, order) / sup(0.01, order);
            assert!((ratio / expect - 1.0).abs() < 0.15, "order {order}: ratio {ratio}");
        }
    }

    #[test]
    fn residual_matches_five_point_stencil() {
        let a = PerturbativeAlpha2::new(&params(0.1, 1.0), 3).unwrap();
        let d = 1e-3;
        for &tau in &[1.0, 7.5, 15.0] {
            let f = |k: f64| a.y(tau + k * d);
            let d1 = (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * d);
            let d3 = (-f(-2.0) + 2.0 * f(-1.0) - 2.0 * f(1.0) + f(2.0)) / (2.0 * d * d * d);
            let y = f(0.0);
            let fd = d3 + 4.0 * d1 - 0.1 * tau.cos() / (y * y * y.sqrt());
            assert!((fd - a.residual(tau)).abs() < 1e-6);
        }
    }

    #[test]
    fn validity_window() {
        assert!((validity(&params(0.1, 1.0)).tau_star - 1920.0).abs() < 1e-9);
        let w = validity(&params(0.1, 0.7));
        assert!((w.tau_star - 225.886_08).abs() < 1e-4);
        assert!((w.eps_eff - 0.1 * 0.7f64.powf(-3.5)).abs() < 1e-15);
        assert!(validity(&params(0.0, 1.0)).tau_star.is_infinite());
    }

    #[test]
    fn series_eval_record() {
        let p = params(0.1, 1.0);
        let s = series_eval(0.0, &p);
        assert!(s.rho.abs() < 1e-15);
        assert!((s.y_comp - 1.0).abs() < 1e-15);
        let s = series_eval(2.0, &p);
        assert!((s.y_comp - y_composite(2.0, &p, 3).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn phase_shifted_forcing_rejected() {
        let p = RawParams {
            c1: Some(0.1),
            c2: Some(0.1),
            ..RawParams::default()
        }
        .validate()
        .unwrap();
        assert!(matches!(PerturbativeAlpha2::new(&p, 3), Err(Error::UnsupportedForcing(_))));
        assert!(matches!(y_composite(1.0, &params(0.1, 1.0), 4), Err(Error::UnsupportedOrder(4))));
    }
}
