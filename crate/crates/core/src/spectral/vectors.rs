use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A time-domain embedding: `n ≥ 1` finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVec(Vec<f64>);

/// A frequency-domain (or ComplEx) embedding: `n ≥ 1` finite complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

/// `n` reals encoding a conjugate-symmetric [`ComplexVec`] of length `n`.
///
/// Even `n`: `[ξ₀, Re ξ₁, Im ξ₁, …, Re ξ_{n/2-1}, Im ξ_{n/2-1}, ξ_{n/2}]`.
/// Odd `n`: `[ξ₀, Re ξ₁, Im ξ₁, …, Re ξ_{(n-1)/2}, Im ξ_{(n-1)/2}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSpectralVec(Vec<f64>);

impl RealVec {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(RealVec(data))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "vectors must have at least one component");
        RealVec(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl ComplexVec {
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(ComplexVec(data))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "vectors must have at least one component");
        ComplexVec(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Builds from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn conj(&self) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn max_norm(&self) -> f64 {
        max_modulus(&self.0)
    }
}

impl PackedSpectralVec {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        RealVec::new(data).map(|v| PackedSpectralVec(v.0))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn max_modulus(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

macro_rules! slice_newtype {
    ($ty:ident, $elem:ty) => {
        impl Deref for $ty {
            type Target = [$elem];
            fn deref(&self) -> &[$elem] {
                &self.0
            }
        }

        impl DerefMut for $ty {
            fn deref_mut(&mut self) -> &mut [$elem] {
                &mut self.0
            }
        }

        impl AsRef<[$elem]> for $ty {
            fn as_ref(&self) -> &[$elem] {
                &self.0
            }
        }

        impl TryFrom<Vec<$elem>> for $ty {
            type Error = Error;
            fn try_from(v: Vec<$elem>) -> Result<Self> {
                $ty::new(v)
            }
        }
    };
}

slice_newtype!(RealVec, f64);
slice_newtype!(ComplexVec, Complex64);
slice_newtype!(PackedSpectralVec, f64);

// Constructors for values produced internally from already-validated inputs.
impl RealVec {
    pub(crate) fn from_vec_unchecked(v: Vec<f64>) -> Self {
        debug_assert!(!v.is_empty());
        RealVec(v)
    }
}

impl ComplexVec {
    pub(crate) fn from_vec_unchecked(v: Vec<Complex64>) -> Self {
        debug_assert!(!v.is_empty());
        ComplexVec(v)
    }
}

impl PackedSpectralVec {
    pub(crate) fn from_vec_unchecked(v: Vec<f64>) -> Self {
        PackedSpectralVec(v)
    }
}
