//! Linear oscillator `z'' + f(t) z = 0` driven by a chaotic coefficient, its
//! Ermakov-Pinney companion `w'' + f(t) w = w^(-3)` and the Lewis invariant
//! `I = ((z/w)^2 + (w p - w' z)^2) / 2`.
//!
//! The default driver is a natural cubic spline through
//! `f(n Ts) = f0 + df (2 l_n - 1)`, with `l_n` iterates of the logistic map
//! `l -> 4 l (1 - l)`.

use crate::error::{Error, Result};
use crate::integrate::{run, IntegrationConfig};
use crate::invariant::DriftReport;
use crate::model::Trajectory;

pub fn logistic_step(l: f64) -> f64 {
    4.0 * l * (1.0 - l)
}

/// The first `n` iterates `l0, l1, ...` of the logistic map.
pub fn logistic_sequence(l0: f64, n: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&l0) {
        return Err(Error::OutOfRange(l0));
    }
    let mut out = Vec::with_capacity(n);
    let mut l = l0;
    for _ in 0..n {
        out.push(l);
        l = logistic_step(l);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticDriver {
    pub l0: f64,
    pub ts: f64,
    pub f0: f64,
    pub df: f64,
}

impl Default for LogisticDriver {
    fn default() -> Self {
        Self {
            l0: 0.37,
            ts: 1.0,
            f0: 1.0,
            df: 0.3,
        }
    }
}

impl LogisticDriver {
    pub fn validate(&self) -> Result<()> {
        if !(self.l0 > 0.0 && self.l0 < 1.0) {
            return Err(Error::OutOfRange(self.l0));
        }
        for (field, value) in [("ts", self.ts), ("f0", self.f0)] {
            if !value.is_finite() {
                return Err(Error::NotFinite { field, value });
            }
            if value <= 0.0 {
                return Err(Error::NonPositive { field, value });
            }
        }
        if !(self.df >= 0.0 && self.df < self.f0) {
            return Err(Error::InvalidConfig(format!(
                "modulation depth df = {} must lie in [0, f0 = {})",
                self.df, self.f0
            )));
        }
        Ok(())
    }

    /// `f0 + df (2 l_n - 1)` for `n = 0..count`.
    pub fn knots(&self, count: usize) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(logistic_sequence(self.l0, count)?
            .into_iter()
            .map(|l| self.f0 + self.df * (2.0 * l - 1.0))
            .collect())
    }
}

/// Natural cubic spline on the uniform grid `t0 + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    t0: f64,
    h: f64,
    /// `[a, b, c, d]` of `a + b s + c s^2 + d s^3`, `s = t - t_i`, per interval.
    pieces: Vec<[f64; 4]>,
}

impl CubicSpline {
    pub fn natural(t0: f64, h: f64, values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InsufficientSamples(format!("spline needs 2 knots, got {n}")));
        }
        if !(h > 0.0) {
            return Err(Error::NonPositive { field: "h", value: h });
        }
        // Second derivatives: m_{i-1} + 4 m_i + m_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2,
        // m_0 = m_{n-1} = 0, solved by the Thomas algorithm.
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut cp = vec![0.0; k];
            let mut dp = vec![0.0; k];
            for i in 0..k {
                let rhs = 6.0 * (values[i + 2] - 2.0 * values[i + 1] + values[i]) / (h * h);
                let denom = 4.0 - if i > 0 { cp[i - 1] } else { 0.0 };
                cp[i] = 1.0 / denom;
                dp[i] = (rhs - if i > 0 { dp[i - 1] } else { 0.0 }) / denom;
            }
            m[k] = dp[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = dp[i] - cp[i] * m[i + 2];
            }
        }
        let pieces = (0..n - 1)
            .map(|i| {
                let (y0, y1, m0, m1) = (values[i], values[i + 1], m[i], m[i + 1]);
                [
                    y0,
                    (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0,
                    0.5 * m0,
                    (m1 - m0) / (6.0 * h),
                ]
            })
            .collect();
        Ok(Self { t0, h, pieces })
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.pieces.len() as f64 * self.h
    }

    pub fn pieces(&self) -> &[[f64; 4]] {
        &self.pieces
    }

    /// Interval index and local offset; outside the knots the end pieces extrapolate.
    fn locate(&self, t: f64) -> (usize, f64) {
        let x = (t - self.t0) / self.h;
        let i = if x <= 0.0 {
            0
        } else {
            (x.floor() as usize).min(self.pieces.len() - 1)
        };
        (i, t - (self.t0 + i as f64 * self.h))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, s) = self.locate(t);
        let [a, b, c, d] = self.pieces[i];
        a + s * (b + s * (c + s * d))
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (i, s) = self.locate(t);
        let [_, b, c, d] = self.pieces[i];
        b + s * (2.0 * c + 3.0 * s * d)
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let (i, s) = self.locate(t);
        let [_, _, c, d] = self.pieces[i];
        2.0 * c + 6.0 * s * d
    }

    /// Exact minimum `(t, f)` over `[t_start, t_end]`, from the knots and the
    /// stationary points of each piece.
    pub fn minimum(&self) -> (f64, f64) {
        let mut best = (self.t0, self.pieces[0][0]);
        let mut consider = |t: f64, v: f64| {
            if v < best.1 {
                best = (t, v);
            }
        };
        for (i, &[a, b, c, d]) in self.pieces.iter().enumerate() {
            let ti = self.t0 + i as f64 * self.h;
            let value = |s: f64| a + s * (b + s * (c + s * d));
            consider(ti + self.h, value(self.h));
            // roots of b + 2 c s + 3 d s^2 in (0, h)
            let roots: Vec<f64> = if d.abs() < 1e-300 {
                if c != 0.0 {
                    vec![-b / (2.0 * c)]
                } else {
                    vec![]
                }
            } else {
                let disc = 4.0 * c * c - 12.0 * d * b;
                if disc < 0.0 {
                    vec![]
                } else {
                    let sq = disc.sqrt();
                    vec![(-2.0 * c + sq) / (6.0 * d), (-2.0 * c - sq) / (6.0 * d)]
                }
            };
            for s in roots.into_iter().filter(|&s| s > 0.0 && s < self.h) {
                consider(ti + s, value(s));
            }
        }
        best
    }
}

/// Spline through enough knots to cover `[0, t_max]` plus one interval,
/// rejected if it is anywhere non-positive on that range.
pub fn build_driver(driver: &LogisticDriver, t_max: f64) -> Result<CubicSpline> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::NonPositive {
            field: "t_max",
            value: t_max,
        });
    }
    let count = (t_max / driver.ts).ceil() as usize + 2;
    let spline = CubicSpline::natural(0.0, driver.ts, &driver.knots(count)?)?;
    let (time, value) = spline.minimum();
    if value <= 0.0 {
        return Err(Error::NonPositiveF { time, value });
    }
    Ok(spline)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErmakovState {
    pub t: f64,
    pub z: f64,
    pub p: f64,
    pub w: f64,
    pub dw: f64,
}

/// Lockstep RK4 of `z'' = -f z` and `w'' = -f w + w^(-3)` from `t = 0`.
pub fn integrate_ermakov<F: Fn(f64) -> f64>(
    f: F,
    z0: f64,
    p0: f64,
    w0: f64,
    dw0: f64,
    config: &IntegrationConfig,
) -> Result<Trajectory<ErmakovState>> {
    if !(w0 > 0.0) {
        return Err(Error::NonPositiveW(w0));
    }
    let rhs = |t: f64, x: &[f64; 4]| -> Result<[f64; 4]> {
        let w = x[2];
        if !(w > 0.0) {
            return Err(Error::PositivityViolationW { time: t, value: w });
        }
        let ft = f(t);
        Ok([x[1], -ft * x[0], x[3], -ft * w + 1.0 / (w * w * w)])
    };
    let out = run(
        &rhs,
        0.0,
        [z0, p0, w0, dw0],
        config,
        |t, x| ErmakovState {
            t,
            z: x[0],
            p: x[1],
            w: x[2],
            dw: x[3],
        },
        |t, x| {
            if x[2] > 0.0 {
                Ok(())
            } else {
                Err(Error::PositivityViolationW { time: t, value: x[2] })
            }
        },
    )?;
    match out.stop {
        Some(e) => Err(e),
        None => Trajectory::new(0.0, config.h * config.record_every as f64, out.samples),
    }
}

pub fn lewis_invariant(z: f64, p: f64, w: f64, dw: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::NonPositiveW(w));
    }
    let a = z / w;
    let b = w * p - dw * z;
    Ok(0.5 * (a * a + b * b))
}

/// Drift of the Lewis invariant along an Ermakov trajectory.
pub fn lewis_drift(traj: &Trajectory<ErmakovState>) -> Result<DriftReport> {
    let values = traj
        .samples()
        .iter()
        .map(|s| lewis_invariant(s.z, s.p, s.w, s.dw))
        .collect::<Result<Vec<_>>>()?;
    DriftReport::from_values(traj.t0(), traj.h(), &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logistic_examples() {
        assert_eq!(logistic_sequence(0.5, 4).unwrap(), vec![0.5, 1.0, 0.0, 0.0]);
        let l = logistic_sequence(0.37, 2).unwrap();
        assert!((l[1] - 0.9324).abs() < 1e-15);
        assert!(logistic_sequence(0.0, 5).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(logistic_sequence(1.2, 3), Err(Error::OutOfRange(1.2)));
    }

    #[test]
    fn spline_reproduces_constants() {
        let s = CubicSpline::natural(0.0, 0.5, &[2.0; 7]).unwrap();
        for k in 0..=30 {
            let t = k as f64 * 0.1;
            assert!((s.eval(t) - 2.0).abs() < 1e-15);
            assert!(s.derivative(t).abs() < 1e-14);
        }
    }

    #[test]
    fn spline_reproduces_lines() {
        let v: Vec<f64> = (0..6).map(|i| 1.0 + 0.5 * i as f64).collect();
        let s = CubicSpline::natural(0.0, 1.0, &v).unwrap();
        assert!((s.eval(2.3) - 2.15).abs() < 1e-14);
    }

    #[test]
    fn spline_matches_hand_solution() {
        let s = CubicSpline::natural(0.0, 1.0, &[0.0, 1.0, 0.0]).unwrap();
        // knots 0, 1, 0: m1 = -3; on [0, 1], b = 1 + 1/2 = 1.5, c = 0, d = -0.5 -> S(0.5) = 0.75 - 0.0625
        assert!((s.eval(0.5) - 0.6875).abs() < 1e-15);
        assert!((s.second_derivative(1.0) + 3.0).abs() < 1e-14);
        assert!(s.second_derivative(0.0).abs() < 1e-15);
        assert!(s.second_derivative(2.0).abs() < 1e-14);
    }

    #[test]
    fn default_driver_stays_in_band() {
        let f = build_driver(&LogisticDriver::default(), 200.0).unwrap();
        let (_, lo) = f.minimum();
        assert!(lo > 0.5);
        let hi = (0..=200_000).map(|k| f.eval(k as f64 * 1e-3)).fold(f64::MIN, f64::max);
        assert!(hi < 1.5);
        let knots = LogisticDriver::default().knots(202).unwrap();
        for (n, &v) in knots.iter().enumerate() {
            assert_eq!(f.eval(n as f64), v);
        }
    }

    #[test]
    fn flat_driver() {
        let d = LogisticDriver {
            df: 0.0,
            ..LogisticDriver::default()
        };
        let f = build_driver(&d, 10.0).unwrap();
        assert!((0..100).all(|k| f.eval(k as f64 * 0.1) == 1.0));
    }

    #[test]
    fn equilibrium_unit() {
        let traj = integrate_ermakov(|_| 1.0, 0.3, 0.0, 1.0, 0.0, &IntegrationConfig::new(1e-2, 20.0)).unwrap();
        for (t, s) in traj.iter() {
            assert_eq!(s.w, 1.0);
            assert!((s.z - 0.3 * t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn equilibrium_four() {
        let w0 = 4f64.powf(-0.25);
        let traj = integrate_ermakov(|_| 4.0, 0.3, 0.0, w0, 0.0, &IntegrationConfig::new(1e-2, 20.0)).unwrap();
        assert!(traj.samples().iter().all(|s| (s.w - w0).abs() < 1e-14));
    }

    #[test]
    fn lewis_values() {
        assert_eq!(lewis_invariant(0.0, 0.0, 0.7, 0.3).unwrap(), 0.0);
        assert!((lewis_invariant(0.3, 0.4, 1.0, 0.0).unwrap() - 0.125).abs() < 1e-16);
        assert_eq!(lewis_invariant(1.0, 0.0, 0.0, 0.0), Err(Error::NonPositiveW(0.0)));
        assert!(integrate_ermakov(|_| 1.0, 0.0, 0.0, -1.0, 0.0, &IntegrationConfig::new(0.1, 1.0)).is_err());
    }

    #[test]
    fn chaotic_driver_conserves_lewis() {
        let f = build_driver(&LogisticDriver::default(), 50.0).unwrap();
        let w0 = f.eval(0.0).powf(-0.25);
        let drift = |h: f64| {
            let cfg = IntegrationConfig::new(h, 50.0).record_every((0.1 / h).round() as usize);
            let traj = integrate_ermakov(|t| f.eval(t), 0.2, 0.0, w0, 0.0, &cfg).unwrap();
            assert!(traj.samples().iter().all(|s| s.w > 0.0));
            lewis_drift(&traj).unwrap().max_drift_pct
        };
        let (a, b) = (drift(0.02), drift(0.01));
        assert!(b < 1e-3, "{b}");
        assert!((12.0..=20.0).contains(&(a / b)), "ratio {}", a / b);
    }

    #[test]
    fn deep_modulation_overshoots() {
        let d = LogisticDriver {
            df: 0.99,
            ..LogisticDriver::default()
        };
        assert!(matches!(build_driver(&d, 200.0), Err(Error::NonPositiveF { .. })));
        let bad = LogisticDriver {
            df: 1.5,
            ..LogisticDriver::default()
        };
        assert!(matches!(build_driver(&bad, 10.0), Err(Error::InvalidConfig(_))));
    }

    proptest! {
        #[test]
        fn lewis_nonnegative(z in -5.0f64..5.0, p in -5.0f64..5.0, w in 0.01f64..5.0, dw in -5.0f64..5.0) {
            let i = lewis_invariant(z, p, w, dw).unwrap();
            prop_assert!(i >= 0.0);
            prop_assert_eq!(i == 0.0, z == 0.0 && p == 0.0);
        }

        #[test]
        fn spline_is_c2_and_interpolates(values in proptest::collection::vec(-3.0f64..3.0, 3..20), h in 0.1f64..2.0) {
            let s = CubicSpline::natural(0.0, h, &values).unwrap();
            for (i, &v) in values.iter().enumerate() {
                prop_assert!((s.eval(i as f64 * h) - v).abs() < 1e-10);
            }
            for (i, w) in s.pieces().windows(2).enumerate() {
                let [a, b, c, d] = w[0];
                let x = h;
                let left = [a + x * (b + x * (c + x * d)), b + x * (2.0 * c + 3.0 * x * d), 2.0 * c + 6.0 * x * d];
                let right = [w[1][0], w[1][1], 2.0 * w[1][2]];
                for (l, r) in left.iter().zip(right) {
                    prop_assert!((l - r).abs() < 1e-10 * (1.0 + r.abs() / h / h), "knot {}", i + 1);
                }
            }
        }

        #[test]
        fn logistic_stays_in_unit_interval(l0 in 0.0f64..=1.0) {
            prop_assert!(logistic_sequence(l0, 200).unwrap().iter().all(|l| (0.0..=1.0).contains(l)));
        }
    }
}
