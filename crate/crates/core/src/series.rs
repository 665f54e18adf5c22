//! Polynomial and truncated power-series arithmetic.
//!
//! [`Poly`] is an exact-degree polynomial in the oscillator coordinate `x`;
//! every correction of the half-order recursion is one of these.
//! [`TaylorSeries`] carries the truncated Taylor expansion of a function of
//! the radial coordinate about a fixed centre, which is how high-order
//! potential derivatives are obtained without numerical differentiation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{PsletError, Result};

/// Relative threshold used to drop numerically vanished leading coefficients.
const TRIM_RELATIVE: f64 = 1e-14;

/// Univariate polynomial with real coefficients, `coeffs[i]` multiplying `x^i`.
///
/// The zero polynomial is the empty coefficient list, and a nonzero
/// polynomial never stores a zero leading coefficient.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c * x^power`.
    pub fn monomial(c: f64, power: usize) -> Self {
        let mut coeffs = vec![0.0; power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    /// Builds a polynomial, dropping exact trailing zeros.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Builds a polynomial and drops trailing coefficients below
    /// `1e-14 * scale`.
    pub fn with_trim(coeffs: Vec<f64>, scale: f64) -> Self {
        let mut p = Poly { coeffs };
        p.trim(scale);
        p
    }

    fn trim(&mut self, scale: f64) {
        let threshold = TRIM_RELATIVE * scale;
        while let Some(&c) = self.coeffs.last() {
            if c == 0.0 || c.abs() <= threshold {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^power`, zero beyond the stored degree.
    pub fn coeff(&self, power: usize) -> f64 {
        self.coeffs.get(power).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, factor: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Formal derivative with respect to `x`.
    pub fn diff(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at `x = 0`.
    pub fn integrate(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c / (i + 1) as f64),
        );
        Poly::new(coeffs)
    }

    /// Multiplication by `x^power`.
    pub fn shift(&self, power: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![0.0; power];
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    /// Splits into the parts made of even and odd powers.
    pub fn split_parity(&self) -> (Poly, Poly) {
        let mut even = self.coeffs.clone();
        let mut odd = self.coeffs.clone();
        for (i, (e, o)) in even.iter_mut().zip(odd.iter_mut()).enumerate() {
            if i % 2 == 0 {
                *o = 0.0;
            } else {
                *e = 0.0;
            }
        }
        (Poly::new(even), Poly::new(odd))
    }

    fn combine(&self, other: &Poly, sign: f64) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeff(i) + sign * other.coeff(i))
            .collect();
        Poly::with_trim(coeffs, self.max_abs().max(other.max_abs()))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Binary operations on truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary functions composable with a truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesFn {
    Recip,
    Sqrt,
    Ln,
}

/// Truncated Taylor series `sum t_n (q - center)^n`, `n = 0..=order`,
/// with `t_n = f^(n)(center) / n!`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    center: f64,
    coeffs: Vec<f64>,
}

impl TaylorSeries {
    pub fn from_coeffs(center: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(PsletError::Contract(
                "a Taylor series needs at least one coefficient".into(),
            ));
        }
        Ok(TaylorSeries { center, coeffs })
    }

    pub fn constant(center: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        TaylorSeries { center, coeffs }
    }

    /// The identity function `q` expanded about `center`.
    pub fn variable(center: f64, order: usize) -> Self {
        let mut s = Self::constant(center, center, order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs[n]
    }

    /// `n`-th derivative at the centre.
    pub fn derivative(&self, n: usize) -> f64 {
        let factorial: f64 = (1..=n).map(|i| i as f64).product();
        self.coeffs[n] * factorial
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|c| c * factor)
    }

    /// Adds a constant to the value at the centre.
    pub fn offset(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += c;
        s
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        TaylorSeries {
            center: self.center,
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    fn check_compatible(&self, other: &TaylorSeries) -> Result<()> {
        if self.center != other.center {
            return Err(PsletError::Contract(format!(
                "series centres differ: {} vs {}",
                self.center, other.center
            )));
        }
        if self.coeffs.len() != other.coeffs.len() {
            return Err(PsletError::Contract(format!(
                "series orders differ: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &TaylorSeries) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &TaylorSeries) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    fn zip(&self, other: &TaylorSeries, f: impl Fn(f64, f64) -> f64) -> Self {
        TaylorSeries {
            center: self.center,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn mul(&self, other: &TaylorSeries) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.coeffs.len();
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|i| self.coeffs[i] * other.coeffs[k - i]).sum())
            .collect();
        Ok(TaylorSeries {
            center: self.center,
            coeffs,
        })
    }

    pub fn div(&self, other: &TaylorSeries) -> Result<Self> {
        self.check_compatible(other)?;
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(PsletError::Singular(format!(
                "division by a series vanishing at q = {}",
                self.center
            )));
        }
        let n = self.coeffs.len();
        let mut q = Vec::with_capacity(n);
        for k in 0..n {
            let acc: f64 = (1..=k).map(|i| other.coeffs[i] * q[k - i]).sum();
            q.push((self.coeffs[k] - acc) / b0);
        }
        Ok(TaylorSeries {
            center: self.center,
            coeffs: q,
        })
    }

    pub fn recip(&self) -> Result<Self> {
        let one = TaylorSeries::constant(self.center, 1.0, self.order());
        one.div(self)
    }

    pub fn sqrt(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(PsletError::Singular(format!(
                "sqrt of a series with constant term {a0} at q = {}",
                self.center
            )));
        }
        let n = self.coeffs.len();
        let mut s = Vec::with_capacity(n);
        s.push(a0.sqrt());
        for k in 1..n {
            let acc: f64 = (1..k).map(|i| s[i] * s[k - i]).sum();
            s.push((self.coeffs[k] - acc) / (2.0 * s[0]));
        }
        Ok(TaylorSeries {
            center: self.center,
            coeffs: s,
        })
    }

    pub fn ln(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(PsletError::Singular(format!(
                "ln of a series with constant term {a0} at q = {}",
                self.center
            )));
        }
        let n = self.coeffs.len();
        let mut l = Vec::with_capacity(n);
        l.push(a0.ln());
        for k in 1..n {
            // a * L' = a'
            let acc: f64 = (1..k)
                .map(|i| i as f64 * l[i] * self.coeffs[k - i])
                .sum::<f64>()
                / k as f64;
            l.push((self.coeffs[k] - acc) / a0);
        }
        Ok(TaylorSeries {
            center: self.center,
            coeffs: l,
        })
    }
}

/// Truncated arithmetic on two series with a common centre and order.
pub fn taylor_combine(op: SeriesOp, a: &TaylorSeries, b: &TaylorSeries) -> Result<TaylorSeries> {
    match op {
        SeriesOp::Add => a.add(b),
        SeriesOp::Sub => a.sub(b),
        SeriesOp::Mul => a.mul(b),
        SeriesOp::Div => a.div(b),
    }
}

pub fn taylor_func(f: SeriesFn, a: &TaylorSeries) -> Result<TaylorSeries> {
    match f {
        SeriesFn::Recip => a.recip(),
        SeriesFn::Sqrt => a.sqrt(),
        SeriesFn::Ln => a.ln(),
    }
}
