//! Scoring functions for the three model kinds, their gradients, and the
//! score-to-probability map.
//!
//! Complex gradients are packaged coordinate-wise: for a parameter
//! `v_j = a_j + i·b_j`, the returned `g_j` is `∂f/∂a_j + i·∂f/∂b_j`, so a
//! plain SGD step `v ← v − α·g` is gradient descent on the `2n` real
//! coordinates.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    check_len, circular_convolve_naive, circular_correlate_fft, circular_correlate_naive,
    is_conjugate_symmetric, max_modulus, real_dot, symmetry_deviation, ComplexVec, RealVec,
};

/// `Σ_j conj(w_j)·(conj(s_j)·o_j)`, i.e. `complex_dot(w, conj(s) ⊙ o)`
/// evaluated in one pass with the same per-term operations.
pub(crate) fn trilinear(w: &[Complex64], s: &[Complex64], o: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((w, s), o) in w.iter().zip(s).zip(o) {
        acc += w.conj() * (s.conj() * o);
    }
    acc
}

fn check3(a: usize, b: usize, c: usize) -> Result<()> {
    check_len(a, b)?;
    check_len(a, c)
}

/// `w · (e_s ⋆ e_o)` with the correlation computed through the FFT.
pub fn score_hole_time(w: &[f64], e_s: &[f64], e_o: &[f64]) -> Result<f64> {
    check3(w.len(), e_s.len(), e_o.len())?;
    real_dot(w, &circular_correlate_fft(e_s, e_o)?)
}

/// `w · (e_s ⋆ e_o)` with the O(n²) direct correlation.
pub fn score_hole_time_naive(w: &[f64], e_s: &[f64], e_o: &[f64]) -> Result<f64> {
    check3(w.len(), e_s.len(), e_o.len())?;
    real_dot(w, &circular_correlate_naive(e_s, e_o)?)
}

/// `(1/n)·Re(ω · (conj ε_s ⊙ ε_o))`, computed in O(n) directly from the
/// spectra. Symmetry of the inputs is not checked here; see
/// [`score_hole_spectral_strict`].
pub fn score_hole_spectral(omega: &[Complex64], eps_s: &[Complex64], eps_o: &[Complex64]) -> Result<f64> {
    check3(omega.len(), eps_s.len(), eps_o.len())?;
    Ok(trilinear(omega, eps_s, eps_o).re / omega.len() as f64)
}

/// [`score_hole_spectral`] with verification: every input must be conjugate
/// symmetric within `tol`, and the discarded imaginary part of the dot product
/// must be below `tol·(1 + |Re|)`.
pub fn score_hole_spectral_strict(
    omega: &[Complex64],
    eps_s: &[Complex64],
    eps_o: &[Complex64],
    tol: f64,
) -> Result<f64> {
    check3(omega.len(), eps_s.len(), eps_o.len())?;
    for v in [omega, eps_s, eps_o] {
        if !is_conjugate_symmetric(v, tol) {
            return Err(Error::NotSymmetric {
                deviation: symmetry_deviation(v),
                bound: tol * (1.0 + max_modulus(v)),
            });
        }
    }
    let t = trilinear(omega, eps_s, eps_o);
    let bound = tol * (1.0 + t.re.abs());
    if t.im.abs() > bound {
        return Err(Error::NotSymmetric {
            deviation: t.im.abs(),
            bound,
        });
    }
    Ok(t.re / omega.len() as f64)
}

/// `Re(w · (conj e_s ⊙ e_o))`.
pub fn score_complex(w: &[Complex64], e_s: &[Complex64], e_o: &[Complex64]) -> Result<f64> {
    check3(w.len(), e_s.len(), e_o.len())?;
    Ok(trilinear(w, e_s, e_o).re)
}

/// `Re(Σ_j w_j·e_sj·conj(e_oj))`, the trilinear form written out directly.
pub fn score_complex_direct(w: &[Complex64], e_s: &[Complex64], e_o: &[Complex64]) -> Result<f64> {
    check3(w.len(), e_s.len(), e_o.len())?;
    Ok(w.iter()
        .zip(e_s)
        .zip(e_o)
        .map(|((w, s), o)| w * s * o.conj())
        .sum::<Complex64>()
        .re)
}

/// Logistic sigmoid, stable for large `|f|`.
pub fn score_to_probability(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// Gradients of a single trilinear score w.r.t. its three arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleGradient<V> {
    pub relation: V,
    pub subject: V,
    pub object: V,
}

fn trilinear_grads(w: &[Complex64], s: &[Complex64], o: &[Complex64], scale: f64) -> TripleGradient<ComplexVec> {
    let mut gw = Vec::with_capacity(w.len());
    let mut gs = Vec::with_capacity(w.len());
    let mut go = Vec::with_capacity(w.len());
    for ((w, s), o) in w.iter().zip(s).zip(o) {
        gw.push(s.conj() * o * scale);
        gs.push(w.conj() * o * scale);
        go.push(w * s * scale);
    }
    TripleGradient {
        relation: ComplexVec::from_vec_unchecked(gw),
        subject: ComplexVec::from_vec_unchecked(gs),
        object: ComplexVec::from_vec_unchecked(go),
    }
}

/// Gradients of [`score_hole_spectral`]: `(1/n)·(conj ε_s ⊙ ε_o,
/// conj ω ⊙ ε_o, ω ⊙ ε_s)`.
pub fn grad_spectral(
    omega: &[Complex64],
    eps_s: &[Complex64],
    eps_o: &[Complex64],
) -> Result<TripleGradient<ComplexVec>> {
    check3(omega.len(), eps_s.len(), eps_o.len())?;
    Ok(trilinear_grads(omega, eps_s, eps_o, 1.0 / omega.len() as f64))
}

/// Gradients of [`score_complex`]: `(conj e_s ⊙ e_o, conj w ⊙ e_o, w ⊙ e_s)`.
pub fn grad_complex(w: &[Complex64], e_s: &[Complex64], e_o: &[Complex64]) -> Result<TripleGradient<ComplexVec>> {
    check3(w.len(), e_s.len(), e_o.len())?;
    Ok(trilinear_grads(w, e_s, e_o, 1.0))
}

/// Time-domain gradients of [`score_hole_time`]:
/// `(e_s ⋆ e_o, w ⋆ e_o, w ∗ e_s)`, using the direct O(n²) operations.
pub fn grad_hole_time(w: &[f64], e_s: &[f64], e_o: &[f64]) -> Result<TripleGradient<RealVec>> {
    check3(w.len(), e_s.len(), e_o.len())?;
    Ok(TripleGradient {
        relation: circular_correlate_naive(e_s, e_o)?,
        subject: circular_correlate_naive(w, e_o)?,
        object: circular_convolve_naive(w, e_s)?,
    })
}
