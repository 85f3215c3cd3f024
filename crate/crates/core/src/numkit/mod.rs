//! Numeric kernel: dense and sparse complex matrices, Hermitian spectral
//! calculus, operator norms and exact rationals.

pub mod matrix;
pub mod random;
pub mod rational;
pub mod sparse;
pub mod spectral;

pub use matrix::{CMatrix, ONE, ZERO};
pub use rational::Rational;
pub use sparse::SpMatrix;
pub use spectral::{
    hermitian_eigenvalues, hermitian_funcalc, operator_norm, pseudo_inverse_sqrt, psd_check, psd_sqrt, step,
    PsdReport, DEFAULT_CUTOFF,
};

use num_complex::Complex64;

/// The square-matrix operations the order-zero machinery needs, shared by the
/// dense and sparse carriers. Shapes are assumed compatible; a mismatch is a
/// programming error and panics.
pub trait Operator: Clone + Send + Sync {
    fn dim(&self) -> usize;
    fn zeros_like(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, c: Complex64) -> Self;
    fn adjoint(&self) -> Self;
    /// `g · self` for Hermitian `g`.
    fn hermitian_left_mul(&self, g: &Self) -> Self;
    /// Operator norm; NaN when an entry is non-finite.
    fn norm(&self) -> f64;
    fn funcalc(&self, f: &dyn Fn(f64) -> f64) -> crate::error::Result<Self>;
}

impl Operator for CMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn zeros_like(&self) -> Self {
        CMatrix::zeros(self.rows(), self.cols())
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_matmul(other).expect("operator shapes agree")
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("operator shapes agree")
    }
    fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("operator shapes agree")
    }
    fn scale(&self, c: Complex64) -> Self {
        CMatrix::scale(self, c)
    }
    fn adjoint(&self) -> Self {
        CMatrix::adjoint(self)
    }
    fn hermitian_left_mul(&self, g: &Self) -> Self {
        g.mul(self)
    }
    fn norm(&self) -> f64 {
        operator_norm(self).unwrap_or(f64::NAN)
    }
    fn funcalc(&self, f: &dyn Fn(f64) -> f64) -> crate::error::Result<Self> {
        hermitian_funcalc(self, f)
    }
}

impl Operator for SpMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn zeros_like(&self) -> Self {
        SpMatrix::zeros(self.rows(), self.cols())
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_matmul(other).expect("operator shapes agree")
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("operator shapes agree")
    }
    fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("operator shapes agree")
    }
    fn scale(&self, c: Complex64) -> Self {
        SpMatrix::scale(self, c)
    }
    fn adjoint(&self) -> Self {
        SpMatrix::adjoint(self)
    }
    fn hermitian_left_mul(&self, g: &Self) -> Self {
        SpMatrix::hermitian_left_mul(self, g).expect("operator shapes agree")
    }
    fn norm(&self) -> f64 {
        self.operator_norm().unwrap_or(f64::NAN)
    }
    fn funcalc(&self, f: &dyn Fn(f64) -> f64) -> crate::error::Result<Self> {
        self.hermitian_funcalc(f)
    }
}
