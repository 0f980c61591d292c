//! Real/complex vector algebra: circular convolution and correlation, the
//! DFT pair, conjugate-symmetry predicates and the packed `n`-float layout of
//! conjugate-symmetric spectra.
//!
//! DFT normalization: the forward transform is unnormalized and the inverse
//! carries `1/n`. Under this convention `x·y = (1/n)·dft(x)·dft(y)` for real
//! `x`, `y`, with `a·b = Σ conj(a_j) b_j`. Every scaling constant elsewhere in
//! the crate (the `1/n` in spectral scoring, the equivalence ratio
//! `2/(2n+1)`) follows from this choice.

mod fft;
mod vectors;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use vectors::{ComplexVec, PackedSpectralVec, RealVec};

pub(crate) use vectors::max_modulus;

/// Hybrid tolerance used for conjugate-symmetry checks: a deviation `d` passes
/// when `d ≤ tol·(1 + max|z|)`.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-9;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { expected, actual });
    }
    if expected == 0 {
        return Err(Error::EmptyVector);
    }
    Ok(())
}

/// `[x_{n-1}, …, x_0]`.
pub fn flip(x: &[f64]) -> RealVec {
    RealVec::from_vec_unchecked(x.iter().rev().copied().collect())
}

/// `[x_0, x_{n-1}, …, x_1]`, i.e. `out[j] = x[(-j) mod n]`.
///
/// This is the reflection that satisfies `x ⋆ y = reverse(x) ∗ y` and
/// `dft(reverse(x)) = conj(dft(x))` exactly. Plain [`flip`] equals this
/// reflection rotated by one position, so the same identities hold for it only
/// up to a one-step cyclic shift (see [`flip`]'s tests).
pub fn circular_reverse(x: &[f64]) -> RealVec {
    let n = x.len();
    RealVec::from_vec_unchecked((0..n).map(|j| x[(n - j) % n]).collect())
}

/// Direct evaluation of `out[j] = Σ_k x[(j-k) mod n]·y[k]`.
pub fn circular_convolve_naive(x: &[f64], y: &[f64]) -> Result<RealVec> {
    check_len(x.len(), y.len())?;
    let n = x.len();
    let out = (0..n)
        .map(|j| (0..n).map(|k| x[(j + n - k) % n] * y[k]).sum())
        .collect();
    Ok(RealVec::from_vec_unchecked(out))
}

/// Direct evaluation of `out[j] = Σ_k x[(k-j) mod n]·y[k]`.
pub fn circular_correlate_naive(x: &[f64], y: &[f64]) -> Result<RealVec> {
    check_len(x.len(), y.len())?;
    let n = x.len();
    let out = (0..n)
        .map(|j| (0..n).map(|k| x[(k + n - j) % n] * y[k]).sum())
        .collect();
    Ok(RealVec::from_vec_unchecked(out))
}

/// Unnormalized DFT of a real vector.
///
/// # Panics
/// If `x` is empty.
pub fn dft(x: &[f64]) -> ComplexVec {
    assert!(!x.is_empty(), "dft of an empty vector");
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward_in_place(&mut buf);
    ComplexVec::from_vec_unchecked(buf)
}

/// Unnormalized DFT of a complex vector.
pub fn dft_complex(z: &[Complex64]) -> ComplexVec {
    assert!(!z.is_empty(), "dft of an empty vector");
    let mut buf = z.to_vec();
    fft::forward_in_place(&mut buf);
    ComplexVec::from_vec_unchecked(buf)
}

/// Inverse DFT (with `1/n`) of a complex vector, keeping the complex result.
pub fn idft(z: &[Complex64]) -> ComplexVec {
    assert!(!z.is_empty(), "inverse dft of an empty vector");
    let mut buf = z.to_vec();
    fft::inverse_in_place(&mut buf);
    ComplexVec::from_vec_unchecked(buf)
}

/// Inverse DFT of a spectrum expected to have a real pre-image.
///
/// Fails with [`Error::NotSymmetric`] if the largest imaginary component of
/// the reconstruction exceeds `tol·(1 + max|z|)`; otherwise the imaginary
/// residue is discarded.
pub fn idft_real(z: &[Complex64], tol: f64) -> Result<RealVec> {
    if z.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut buf = z.to_vec();
    fft::inverse_in_place(&mut buf);
    let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let bound = tol * (1.0 + max_modulus(z));
    if residue > bound || !residue.is_finite() {
        return Err(Error::NotSymmetric {
            deviation: residue,
            bound,
        });
    }
    Ok(RealVec::from_vec_unchecked(
        buf.into_iter().map(|c| c.re).collect(),
    ))
}

/// Largest imaginary component left over by the inverse DFT of `z`.
pub fn idft_imag_residue(z: &[Complex64]) -> f64 {
    idft(z).iter().map(|c| c.im.abs()).fold(0.0, f64::max)
}

/// `x ⋆ y` computed as `idft(conj(dft(x)) ⊙ dft(y))`.
pub fn circular_correlate_fft(x: &[f64], y: &[f64]) -> Result<RealVec> {
    check_len(x.len(), y.len())?;
    let fx = dft(x);
    let mut fy = dft(y);
    for (b, a) in fy.iter_mut().zip(fx.iter()) {
        *b *= a.conj();
    }
    idft_real(&fy, DEFAULT_SYMMETRY_TOL)
}

/// `x ∗ y` computed as `idft(dft(x) ⊙ dft(y))`.
pub fn circular_convolve_fft(x: &[f64], y: &[f64]) -> Result<RealVec> {
    check_len(x.len(), y.len())?;
    let fx = dft(x);
    let mut fy = dft(y);
    for (b, a) in fy.iter_mut().zip(fx.iter()) {
        *b *= a;
    }
    idft_real(&fy, DEFAULT_SYMMETRY_TOL)
}

pub fn elementwise_product(a: &[Complex64], b: &[Complex64]) -> Result<ComplexVec> {
    check_len(a.len(), b.len())?;
    Ok(ComplexVec::from_vec_unchecked(
        a.iter().zip(b).map(|(x, y)| x * y).collect(),
    ))
}

/// Complex inner product `Σ_j conj(a_j)·b_j`.
pub fn complex_dot(a: &[Complex64], b: &[Complex64]) -> Result<Complex64> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
}

pub fn real_dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

/// `max_j |z_j - conj(z_{(n-j) mod n})|`.
pub fn symmetry_deviation(z: &[Complex64]) -> f64 {
    let n = z.len();
    (0..n)
        .map(|j| (z[j] - z[(n - j) % n].conj()).norm())
        .fold(0.0, f64::max)
}

/// Nearest conjugate-symmetric spectrum: each mirror pair is replaced by its
/// average, and the self-paired components lose their imaginary part. The
/// result is symmetric bit for bit.
pub fn symmetrize(z: &mut [Complex64]) {
    let n = z.len();
    if n == 0 {
        return;
    }
    z[0].im = 0.0;
    for j in 1..n.div_ceil(2) {
        let avg = (z[j] + z[n - j].conj()) * 0.5;
        z[j] = avg;
        z[n - j] = avg.conj();
    }
    if n.is_multiple_of(2) {
        z[n / 2].im = 0.0;
    }
}

/// Conjugate symmetry up to the hybrid bound `tol·(1 + max|z|)`.
///
/// At `j = 0` (and `j = n/2` for even `n`) the condition reduces to the
/// imaginary part being small.
pub fn is_conjugate_symmetric(z: &[Complex64], tol: f64) -> bool {
    !z.is_empty() && symmetry_deviation(z) <= tol * (1.0 + max_modulus(z))
}

fn require_symmetric(z: &[Complex64], tol: f64) -> Result<()> {
    let deviation = symmetry_deviation(z);
    let bound = tol * (1.0 + max_modulus(z));
    if deviation > bound || !deviation.is_finite() {
        return Err(Error::NotSymmetric { deviation, bound });
    }
    Ok(())
}

/// Packs a conjugate-symmetric spectrum into `n` reals (tolerance
/// [`DEFAULT_SYMMETRY_TOL`]).
pub fn pack(z: &[Complex64]) -> Result<PackedSpectralVec> {
    pack_with_tol(z, DEFAULT_SYMMETRY_TOL)
}

/// Packs using the lower half of the spectrum; the mirror half is checked
/// against `tol` and then dropped.
pub fn pack_with_tol(z: &[Complex64], tol: f64) -> Result<PackedSpectralVec> {
    if z.is_empty() {
        return Err(Error::EmptyVector);
    }
    require_symmetric(z, tol)?;
    let n = z.len();
    let mut out = Vec::with_capacity(n);
    out.push(z[0].re);
    for c in &z[1..n.div_ceil(2)] {
        out.push(c.re);
        out.push(c.im);
    }
    if n.is_multiple_of(2) && n >= 2 {
        out.push(z[n / 2].re);
    }
    debug_assert_eq!(out.len(), n);
    Ok(PackedSpectralVec::from_vec_unchecked(out))
}

/// Rebuilds the length-`n` conjugate-symmetric spectrum; the mirror half is
/// set to exact conjugates and `Im ξ₀` (and `Im ξ_{n/2}`) to exactly zero.
pub fn unpack(p: &[f64], n: usize) -> Result<ComplexVec> {
    check_len(n, p.len())?;
    let zero = Complex64::new(0.0, 0.0);
    let mut z = vec![zero; n];
    z[0] = Complex64::new(p[0], 0.0);
    let half = n.div_ceil(2);
    for j in 1..half {
        let c = Complex64::new(p[2 * j - 1], p[2 * j]);
        z[j] = c;
        z[n - j] = c.conj();
    }
    if n.is_multiple_of(2) && n >= 2 {
        z[n / 2] = Complex64::new(p[n - 1], 0.0);
    }
    Ok(ComplexVec::from_vec_unchecked(z))
}
