//! Finite sums of `tau^m cos(k tau)` and `tau^m sin(k tau)` terms.
//!
//! This class is closed under products, differentiation and integration from
//! zero, which is all the perturbation series need.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Wave {
    Cos,
    Sin,
}

/// Basis function `tau^power * wave(freq * tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis {
    pub power: u32,
    pub freq: u32,
    pub wave: Wave,
}

impl Basis {
    pub const fn cos(power: u32, freq: u32) -> Self {
        Self {
            power,
            freq,
            wave: Wave::Cos,
        }
    }

    pub const fn sin(power: u32, freq: u32) -> Self {
        Self {
            power,
            freq,
            wave: Wave::Sin,
        }
    }

    /// `tau^power`.
    pub const fn monomial(power: u32) -> Self {
        Self::cos(power, 0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigSeries {
    terms: BTreeMap<Basis, f64>,
}

impl TrigSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut s = Self::zero();
        s.push(Basis::monomial(0), c);
        s
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Basis, f64)>) -> Self {
        let mut s = Self::zero();
        for (b, c) in terms {
            s.push(b, c);
        }
        s
    }

    /// Adds `coef * basis`; `sin(0)` terms vanish and are dropped.
    pub fn push(&mut self, basis: Basis, coef: f64) {
        if coef == 0.0 || (basis.freq == 0 && basis.wave == Wave::Sin) {
            return;
        }
        let entry = self.terms.entry(basis).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.remove(&basis);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Basis, f64)> + '_ {
        self.terms.iter().map(|(b, c)| (*b, *c))
    }

    pub fn coef(&self, basis: Basis) -> f64 {
        self.terms.get(&basis).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_freq(&self) -> u32 {
        self.terms.keys().map(|b| b.freq).max().unwrap_or(0)
    }

    pub fn max_power(&self) -> u32 {
        self.terms.keys().map(|b| b.power).max().unwrap_or(0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.terms().map(|(b, c)| (b, s * c)))
    }

    /// Multiplies by `tau^k`.
    pub fn shift_power(&self, k: u32) -> Self {
        Self::from_terms(self.terms().map(|(b, c)| {
            (
                Basis {
                    power: b.power + k,
                    ..b
                },
                c,
            )
        }))
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (b, c) in self.terms() {
            if b.power > 0 {
                out.push(
                    Basis {
                        power: b.power - 1,
                        ..b
                    },
                    c * b.power as f64,
                );
            }
            let k = b.freq as f64;
            match b.wave {
                Wave::Cos => out.push(Basis::sin(b.power, b.freq), -k * c),
                Wave::Sin => out.push(Basis::cos(b.power, b.freq), k * c),
            }
        }
        out
    }

    /// Antiderivative `F` with `F(0) = 0`.
    pub fn integral(&self) -> Self {
        let mut out = Self::zero();
        for (b, c) in self.terms() {
            antiderivative_into(&mut out, b, c);
        }
        let at_zero = out.eval(0.0);
        out.push(Basis::monomial(0), -at_zero);
        out
    }

    /// `sum_{j=0}^{degree} a_j * self^j` for the given coefficients.
    pub fn polynomial(&self, coefs: &[f64]) -> Self {
        let mut out = Self::zero();
        let mut power = Self::constant(1.0);
        for (j, &a) in coefs.iter().enumerate() {
            if j > 0 {
                power = &power * self;
            }
            out = &out + &power.scale(a);
        }
        out
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.evaluator().eval(tau)
    }

    /// A flattened copy optimised for repeated evaluation.
    pub fn evaluator(&self) -> SeriesEvaluator {
        SeriesEvaluator::new(self)
    }
}

/// `int tau^m wave(k tau) dtau`, accumulated into `out` (no constant).
fn antiderivative_into(out: &mut TrigSeries, b: Basis, c: f64) {
    if b.freq == 0 {
        // cos(0) = 1
        out.push(Basis::monomial(b.power + 1), c / (b.power + 1) as f64);
        return;
    }
    let k = b.freq as f64;
    match b.wave {
        Wave::Cos => {
            // int t^m cos kt = t^m sin(kt)/k - (m/k) int t^(m-1) sin kt
            out.push(Basis::sin(b.power, b.freq), c / k);
            if b.power > 0 {
                antiderivative_into(out, Basis::sin(b.power - 1, b.freq), -c * b.power as f64 / k);
            }
        }
        Wave::Sin => {
            // int t^m sin kt = -t^m cos(kt)/k + (m/k) int t^(m-1) cos kt
            out.push(Basis::cos(b.power, b.freq), -c / k);
            if b.power > 0 {
                antiderivative_into(out, Basis::cos(b.power - 1, b.freq), c * b.power as f64 / k);
            }
        }
    }
}

/// Product-to-sum for two basis functions.
fn multiply_basis(a: Basis, b: Basis, c: f64, out: &mut TrigSeries) {
    let power = a.power + b.power;
    let (i, j) = (a.freq as i64, b.freq as i64);
    let sum = (i + j) as u32;
    let diff = (i - j).unsigned_abs() as u32;
    // sign of sin((i - j) t) after folding to a non-negative frequency
    let diff_sign = if i >= j { 1.0 } else { -1.0 };
    let half = 0.5 * c;
    match (a.wave, b.wave) {
        (Wave::Cos, Wave::Cos) => {
            out.push(Basis::cos(power, diff), half);
            out.push(Basis::cos(power, sum), half);
        }
        (Wave::Sin, Wave::Sin) => {
            out.push(Basis::cos(power, diff), half);
            out.push(Basis::cos(power, sum), -half);
        }
        (Wave::Sin, Wave::Cos) => {
            // sin(it) cos(jt) = [sin((i+j)t) + sin((i-j)t)] / 2
            out.push(Basis::sin(power, sum), half);
            out.push(Basis::sin(power, diff), diff_sign * half);
        }
        (Wave::Cos, Wave::Sin) => {
            // cos(it) sin(jt) = [sin((i+j)t) - sin((i-j)t)] / 2
            out.push(Basis::sin(power, sum), half);
            out.push(Basis::sin(power, diff), -diff_sign * half);
        }
    }
}

impl Mul for &TrigSeries {
    type Output = TrigSeries;

    fn mul(self, rhs: &TrigSeries) -> TrigSeries {
        let mut out = TrigSeries::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                multiply_basis(a, b, ca * cb, &mut out);
            }
        }
        out
    }
}

impl Add for &TrigSeries {
    type Output = TrigSeries;

    fn add(self, rhs: &TrigSeries) -> TrigSeries {
        let mut out = self.clone();
        for (b, c) in rhs.terms() {
            out.push(b, c);
        }
        out
    }
}

impl Sub for &TrigSeries {
    type Output = TrigSeries;

    fn sub(self, rhs: &TrigSeries) -> TrigSeries {
        self + &(-rhs)
    }
}

impl Neg for &TrigSeries {
    type Output = TrigSeries;

    fn neg(self) -> TrigSeries {
        self.scale(-1.0)
    }
}

impl fmt::Display for TrigSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if b.power > 0 {
                write!(f, "*t^{}", b.power)?;
            }
            if b.freq > 0 {
                let w = if b.wave == Wave::Cos { "cos" } else { "sin" };
                write!(f, "*{w}({}t)", b.freq)?;
            }
        }
        Ok(())
    }
}

/// Flat term list plus the largest frequency and power, for fast evaluation.
#[derive(Debug, Clone)]
pub struct SeriesEvaluator {
    terms: Vec<(Basis, f64)>,
    max_freq: usize,
    max_power: usize,
}

const STACK_FREQ: usize = 32;
const STACK_POWER: usize = 8;

impl SeriesEvaluator {
    fn new(series: &TrigSeries) -> Self {
        Self {
            terms: series.terms().collect(),
            max_freq: series.max_freq() as usize,
            max_power: series.max_power() as usize,
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        if self.max_freq >= STACK_FREQ || self.max_power >= STACK_POWER {
            return self.eval_direct(tau);
        }
        let mut trig = [(0.0f64, 1.0f64); STACK_FREQ];
        for (k, slot) in trig.iter_mut().enumerate().take(self.max_freq + 1).skip(1) {
            *slot = (k as f64 * tau).sin_cos();
        }
        let mut powers = [1.0f64; STACK_POWER];
        for m in 1..=self.max_power {
            powers[m] = powers[m - 1] * tau;
        }
        let mut acc = 0.0;
        for &(b, c) in &self.terms {
            let (s, co) = trig[b.freq as usize];
            let w = if b.wave == Wave::Cos { co } else { s };
            acc += c * powers[b.power as usize] * w;
        }
        acc
    }

    fn eval_direct(&self, tau: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(b, c)| {
                let (s, co) = (b.freq as f64 * tau).sin_cos();
                let w = if b.wave == Wave::Cos { co } else { s };
                c * tau.powi(b.power as i32) * w
            })
            .sum()
    }
}
