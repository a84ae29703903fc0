//! Truncated complex power series.
//!
//! A [`TruncatedSeries`] of order `N` stores the MacLaurin coefficients
//! `c_0 ..= c_N`; everything past `z^N` is unknown. Binary operations that
//! mix orders keep only the coefficients both operands determine, with the
//! single exception of [`TruncatedSeries::add`], which zero-pads.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order for sampled class members.
pub const DEFAULT_ORDER: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

/// Wire form: `{"order": N, "re": [...], "im": [...]}`.
#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<SeriesRepr> for TruncatedSeries {
    type Error = Error;

    fn try_from(repr: SeriesRepr) -> Result<Self> {
        let expected = repr.order + 1;
        for got in [repr.re.len(), repr.im.len()] {
            if got != expected {
                return Err(Error::OrderMismatch {
                    order: repr.order,
                    expected,
                    got,
                });
            }
        }
        let coeffs = repr
            .re
            .into_iter()
            .zip(repr.im)
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        TruncatedSeries::new(coeffs)
    }
}

impl From<TruncatedSeries> for SeriesRepr {
    fn from(s: TruncatedSeries) -> Self {
        SeriesRepr {
            order: s.order(),
            re: s.coeffs.iter().map(|c| c.re).collect(),
            im: s.coeffs.iter().map(|c| c.im).collect(),
        }
    }
}

impl TruncatedSeries {
    /// Builds a series from `c_0 ..= c_N`. The order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    // Internal constructor for results of finite arithmetic on valid series.
    fn from_vec(coeffs: Vec<Complex64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::from_vec(vec![ZERO; order + 1])
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(ONE, order)
    }

    /// The series `z`, i.e. the identity map.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order.max(1));
        s.coeffs[1] = ONE;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^n`, or `None` past the truncation order.
    pub fn get(&self, n: usize) -> Option<Complex64> {
        self.coeffs.get(n).copied()
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let keep = order.min(self.order());
        Self::from_vec(self.coeffs[..=keep].to_vec())
    }

    /// Treats `self` as an exact polynomial and extends it with zeros.
    pub fn zero_pad(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if order > self.order() {
            coeffs.resize(order + 1, ZERO);
        }
        Self::from_vec(coeffs)
    }

    /// Index of the first nonzero coefficient, `None` if all vanish.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != ZERO)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_vec(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// `c(rho z)`: coefficient `n` scaled by `rho^n`.
    pub fn dilate(&self, rho: f64) -> Self {
        let mut scale = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * scale;
                scale *= rho;
                out
            })
            .collect();
        Self::from_vec(coeffs)
    }

    /// Multiplies by `z`; the order grows by one.
    pub fn shift_up(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(ZERO);
        coeffs.extend_from_slice(&self.coeffs);
        Self::from_vec(coeffs)
    }

    /// Divides by `z`, dropping `c_0`; the order shrinks by one.
    pub fn shift_down(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::from_vec(self.coeffs[1..].to_vec())
    }

    /// Coefficient-wise sum; the shorter operand is zero-padded.
    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().max(other.order());
        let coeffs = (0..=order)
            .map(|n| self.get(n).unwrap_or(ZERO) + other.get(n).unwrap_or(ZERO))
            .collect();
        Self::from_vec(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self::from_vec(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..=order)
            .map(|n| (0..=n).map(|j| a[j] * b[n - j]).sum())
            .collect();
        Self::from_vec(coeffs)
    }

    /// Quotient `self / divisor`.
    ///
    /// A common power of `z` is cancelled first, so the result has order
    /// `min(order_a, order_b) - valuation(divisor)`.
    pub fn checked_div(&self, divisor: &Self) -> Result<Self> {
        let shift = divisor.valuation().ok_or(Error::DivisorVanishes)?;
        let order = self.order().min(divisor.order());
        if shift > order {
            return Err(Error::DivisorVanishes);
        }
        if self.coeffs[..shift.min(self.coeffs.len())]
            .iter()
            .any(|c| *c != ZERO)
        {
            return Err(Error::DivisorVanishes);
        }
        let num = &self.coeffs[shift..=order];
        let den = &divisor.coeffs[shift..=order];
        let lead = den[0];
        let mut q: Vec<Complex64> = Vec::with_capacity(num.len());
        for n in 0..num.len() {
            let acc: Complex64 = (1..=n).map(|j| den[j] * q[n - j]).sum();
            q.push((num[n] - acc) / lead);
        }
        Self::new(q)
    }

    /// Term-wise derivative; the order drops by one.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c * n as f64)
            .collect();
        Self::from_vec(coeffs)
    }

    /// Coefficient-wise (Hadamard) product, truncated to the smaller order.
    pub fn hadamard(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .collect();
        Self::from_vec(coeffs)
    }

    /// `self(inner(z))`, truncated to the smaller order.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.coeffs[0] != ZERO {
            return Err(Error::InnerNotVanishing);
        }
        let order = self.order().min(inner.order());
        let inner = inner.truncate(order);
        let outer = &self.coeffs[..=order];
        let mut acc = Self::constant(outer[order], order);
        for &c in outer[..order].iter().rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// Compositional inverse of a normalized series.
    pub fn revert(&self) -> Result<Self> {
        Ok(NormalizedFunction::new(self.clone())?.revert())
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Largest coefficient modulus over `n >= from`.
    pub fn max_modulus_from(&self, from: usize) -> f64 {
        self.coeffs
            .iter()
            .skip(from)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::add(self, rhs)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::sub(self, rhs)
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::mul(self, rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::neg(self)
    }
}

/// A series in class A: `z + a_2 z^2 + a_3 z^3 + ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TruncatedSeries", into = "TruncatedSeries")]
pub struct NormalizedFunction {
    series: TruncatedSeries,
}

impl TryFrom<TruncatedSeries> for NormalizedFunction {
    type Error = Error;
    fn try_from(series: TruncatedSeries) -> Result<Self> {
        Self::new(series)
    }
}

impl From<NormalizedFunction> for TruncatedSeries {
    fn from(f: NormalizedFunction) -> Self {
        f.series
    }
}

impl NormalizedFunction {
    pub fn new(series: TruncatedSeries) -> Result<Self> {
        let c = series.coeffs();
        if c.len() < 2 || c[0] != ZERO || c[1] != ONE {
            return Err(Error::NotNormalized);
        }
        Ok(Self { series })
    }

    /// `z + tail[0] z^2 + tail[1] z^3 + ...`
    pub fn from_tail(tail: &[Complex64]) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(tail.len() + 2);
        coeffs.push(ZERO);
        coeffs.push(ONE);
        coeffs.extend_from_slice(tail);
        Self::new(TruncatedSeries::new(coeffs)?)
    }

    pub fn identity(order: usize) -> Self {
        Self {
            series: TruncatedSeries::identity(order),
        }
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    /// `a_n` for `n >= 2`; `None` past the truncation order.
    pub fn coeff(&self, n: usize) -> Option<Complex64> {
        self.series.get(n)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self {
            series: self.series.truncate(order.max(1)),
        }
    }

    pub fn zero_pad(&self, order: usize) -> Self {
        Self {
            series: self.series.zero_pad(order),
        }
    }

    /// Compositional inverse by Lagrange inversion:
    /// `b_n = [z^{n-1}] (z / f(z))^n / n`.
    pub fn revert(&self) -> TruncatedSeries {
        let order = self.order();
        // z / f(z) = 1 / (1 + a_2 z + ...), order N - 1.
        let h = TruncatedSeries::identity(order)
            .checked_div(&self.series)
            .expect("normalized series has valuation one");
        let mut out = vec![ZERO; order + 1];
        let mut power = h.clone();
        for (n, slot) in out.iter_mut().enumerate().skip(1) {
            *slot = power.coeffs[n - 1] / n as f64;
            if n < order {
                power = power.mul(&h);
            }
        }
        TruncatedSeries::from_vec(out)
    }
}
