//! Real-coefficient polynomials in the Laplace variable.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Scalar;

/// Polynomial with coefficients in ascending powers: `coeffs[k]` multiplies `s^k`.
///
/// Trailing zero coefficients are trimmed on construction, so the leading
/// coefficient is non-zero unless the polynomial is the zero polynomial `[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial("coefficient list is empty"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolynomial("coefficients must be finite"));
        }
        Ok(Self::trimmed(coeffs))
    }

    fn trimmed(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self::trimmed(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    /// Ascending-power coefficients.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn leading(&self) -> T {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * s + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or_else(T::zero)
                    + other.coeffs.get(k).copied().unwrap_or_else(T::zero)
            })
            .collect();
        Self::trimmed(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn scale(&self, k: T) -> Self {
        Self::trimmed(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Self::trimmed(out)
    }

    /// Divides every coefficient by the leading one.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.leading().recip())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Polynomial<U> {
        Polynomial::trimmed(self.coeffs.iter().map(|&c| f(c)).collect())
    }
}
