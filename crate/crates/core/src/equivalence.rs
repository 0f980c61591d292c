//! Conversion of complex models into holographic ones with real vectors, and
//! a verifier for the resulting score relation.
//!
//! A complex vector `x` of length `n` is lifted to the conjugate-symmetric
//! spectrum `s(x) = [0, x₀, …, x_{n−1}, conj x_{n−1}, …, conj x₀]` of length
//! `N = 2n+1`, and `h(x) = idft(s(x))` is real. With the unnormalized forward
//! DFT, Parseval gives
//! `f_hole(h(w), h(s), h(o)) = (1/N)·Re Σ_j conj(W_j)·conj(S_j)·O_j`, where the
//! two halves of the lifted spectra each contribute `f_complex(w, s, o)` and
//! component 0 contributes nothing. Hence `f_hole = 2/(2n+1) · f_complex`.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Embeddings, ModelKind, ModelParams, Triple};
use crate::spectral::{idft_real, ComplexVec, RealVec, DEFAULT_SYMMETRY_TOL};

/// Complex scores at or below this magnitude are left out of the ratio.
pub const MIN_COMPLEX_SCORE: f64 = 1e-12;

/// `[0, x, reverse(conj x)]`, length `2n+1`.
pub fn lift(x: &[Complex64]) -> ComplexVec {
    assert!(!x.is_empty(), "lift needs a non-empty vector");
    let mut z = Vec::with_capacity(2 * x.len() + 1);
    z.push(Complex64::new(0.0, 0.0));
    z.extend_from_slice(x);
    z.extend(x.iter().rev().map(|c| c.conj()));
    ComplexVec::from_vec_unchecked(z)
}

/// Real vector of length `2n+1` whose DFT is `lift(x)`.
pub fn complex_to_hole_vec(x: &[Complex64]) -> RealVec {
    idft_real(&lift(x), DEFAULT_SYMMETRY_TOL).expect("lifted spectra are conjugate-symmetric")
}

/// Score ratio `f_hole / f_complex` for a complex dimension `n`.
pub fn theoretical_ratio(n: usize) -> f64 {
    2.0 / (2 * n + 1) as f64
}

/// Maps every vector of a complex model through [`complex_to_hole_vec`].
pub fn convert_model(m: &ModelParams) -> Result<ModelParams> {
    if m.kind() != ModelKind::Complex {
        return Err(Error::KindMismatch {
            expected: ModelKind::Complex,
            found: m.kind(),
        });
    }
    let convert = |table: &Embeddings| -> Embeddings {
        let vs = table.as_complex().expect("complex models store complex tables");
        Embeddings::Real(vs.iter().map(|v| complex_to_hole_vec(v)).collect())
    };
    ModelParams::new(
        ModelKind::HoleTime,
        2 * m.dim() + 1,
        m.entity_vocab().clone(),
        m.relation_vocab().clone(),
        convert(m.entities()),
        convert(m.relations()),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub dim_complex: usize,
    pub dim_hole: usize,
    pub triples_checked: usize,
    /// Probes left out because `|f_complex| ≤ MIN_COMPLEX_SCORE`.
    pub excluded: usize,
    pub ratio_mean: f64,
    pub ratio_max_abs_dev: f64,
    pub theoretical_ratio: f64,
    pub tol: f64,
    pub passed: bool,
}

impl EquivalenceReport {
    pub fn to_key_values(&self) -> String {
        format!(
            "dim_complex={}\ndim_hole={}\ntriples_checked={}\nexcluded={}\nratio_mean={:e}\n\
             ratio_max_abs_dev={:e}\ntheoretical_ratio={:e}\ntol={:e}\npassed={}\n",
            self.dim_complex,
            self.dim_hole,
            self.triples_checked,
            self.excluded,
            self.ratio_mean,
            self.ratio_max_abs_dev,
            self.theoretical_ratio,
            self.tol,
            self.passed
        )
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "equivalence check: {}", if self.passed { "PASSED" } else { "FAILED" })?;
        writeln!(f, "  complex dim        {}", self.dim_complex)?;
        writeln!(f, "  holographic dim    {}", self.dim_hole)?;
        writeln!(f, "  probes             {} ({} excluded)", self.triples_checked, self.excluded)?;
        writeln!(f, "  mean ratio         {:.15}", self.ratio_mean)?;
        writeln!(f, "  expected ratio     {:.15}", self.theoretical_ratio)?;
        write!(f, "  max deviation      {:.3e} (tol {:.1e})", self.ratio_max_abs_dev, self.tol)
    }
}

/// `count` triples with uniformly drawn ids.
pub fn random_probes(num_relations: usize, num_entities: usize, count: usize, seed: u64) -> Vec<Triple> {
    assert!(num_relations > 0 && num_entities > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Triple::new(
                rng.random_range(0..num_relations),
                rng.random_range(0..num_entities),
                rng.random_range(0..num_entities),
            )
        })
        .collect()
}

pub fn verify_equivalence(m_complex: &ModelParams, m_hole: &ModelParams, probes: &[Triple], tol: f64) -> Result<EquivalenceReport> {
    verify_equivalence_with(m_complex, m_hole, probes, tol, Execution::default())
}

/// Compares `f_hole / f_complex` over `probes`. Passes when every ratio lies
/// within `tol·(1+|mean|)` of the mean and the mean lies within
/// `tol·(1+c)` of the expected constant `c`.
pub fn verify_equivalence_with(
    m_complex: &ModelParams,
    m_hole: &ModelParams,
    probes: &[Triple],
    tol: f64,
    exec: Execution,
) -> Result<EquivalenceReport> {
    if m_complex.kind() != ModelKind::Complex {
        return Err(Error::KindMismatch {
            expected: ModelKind::Complex,
            found: m_complex.kind(),
        });
    }
    if m_hole.kind() != ModelKind::HoleTime {
        return Err(Error::KindMismatch {
            expected: ModelKind::HoleTime,
            found: m_hole.kind(),
        });
    }
    let n = m_complex.dim();
    if m_hole.dim() != 2 * n + 1 {
        return Err(Error::Dimension {
            expected: 2 * n + 1,
            actual: m_hole.dim(),
        });
    }
    if m_hole.num_entities() != m_complex.num_entities() || m_hole.num_relations() != m_complex.num_relations() {
        return Err(Error::Config("models differ in entity or relation count".into()));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Config("tolerance must be finite and non-negative".into()));
    }
    if probes.is_empty() {
        return Err(Error::Inconclusive("no probe triples given".into()));
    }
    for t in probes {
        m_complex.check_triple(t)?;
    }

    let ratios: Vec<Option<f64>> = exec.map(probes, |t| {
        let fc = m_complex.score_unchecked(t);
        (fc.abs() > MIN_COMPLEX_SCORE).then(|| m_hole.score_unchecked(t) / fc)
    });
    let kept: Vec<f64> = ratios.into_iter().flatten().collect();
    if kept.is_empty() {
        return Err(Error::Inconclusive(format!(
            "all {} probe scores are within {MIN_COMPLEX_SCORE:e} of zero",
            probes.len()
        )));
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let max_dev = kept.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
    let expected = theoretical_ratio(n);
    let passed = max_dev <= tol * (1.0 + mean.abs()) && (mean - expected).abs() <= tol * (1.0 + expected);
    Ok(EquivalenceReport {
        dim_complex: n,
        dim_hole: 2 * n + 1,
        triples_checked: probes.len(),
        excluded: probes.len() - kept.len(),
        ratio_mean: mean,
        ratio_max_abs_dev: max_dev,
        theoretical_ratio: expected,
        tol,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Vocab;
    use crate::scoring::{score_complex, score_hole_spectral, score_hole_time};
    use crate::spectral::{circular_correlate_naive, dft, is_conjugate_symmetric, real_dot};
    use crate::train::init_complex;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex_model(n: usize, ne: usize, nr: usize, seed: u64) -> ModelParams {
        let table = |count: usize, offset: u64| {
            Embeddings::Complex((0..count).map(|i| init_complex(n, seed * 1000 + offset + i as u64, 1.0)).collect())
        };
        ModelParams::new(
            ModelKind::Complex,
            n,
            Vocab::from_names((0..ne).map(|i| format!("e{i}"))),
            Vocab::from_names((0..nr).map(|i| format!("r{i}"))),
            table(ne, 0),
            table(nr, 500),
        )
        .unwrap()
    }

    /// Inverse DFT by the defining sum, real part only.
    fn inverse_oracle(z: &[Complex64]) -> Vec<f64> {
        let n = z.len();
        (0..n)
            .map(|k| {
                z.iter()
                    .enumerate()
                    .map(|(j, zj)| {
                        let a = 2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64;
                        (zj * Complex64::from_polar(1.0, a)).re
                    })
                    .sum::<f64>()
                    / n as f64
            })
            .collect()
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift(&[c(1.0, 2.0)]).to_vec(), vec![c(0.0, 0.0), c(1.0, 2.0), c(1.0, -2.0)]);
        assert_eq!(
            lift(&[c(0.0, 1.0), c(2.0, 0.0)]).to_vec(),
            vec![c(0.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(2.0, -0.0), c(0.0, -1.0)]
        );
        for n in 1..20 {
            let x = init_complex(n, n as u64, 1.0);
            let z = lift(&x);
            assert!(is_conjugate_symmetric(&z, 1e-15));
            assert_eq!(z[0], c(0.0, 0.0));
            let big_n = 2 * n + 1;
            for j in 1..big_n {
                assert_eq!(z[j], z[big_n - j].conj());
            }
        }
    }

    #[test]
    fn hole_vec_examples() {
        let h = complex_to_hole_vec(&[c(1.0, 2.0)]);
        let want = inverse_oracle(&[c(0.0, 0.0), c(1.0, 2.0), c(1.0, -2.0)]);
        for (a, b) in h.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in h.iter().zip([0.6667, -1.4880, 0.8214]) {
            assert!((a - b).abs() < 1e-4);
        }
        assert!(complex_to_hole_vec(&[c(0.0, 0.0); 4]).iter().all(|&v| v == 0.0));
        let x = init_complex(7, 1, 1.0);
        let back = dft(&complex_to_hole_vec(&x));
        for (a, b) in back.iter().zip(lift(&x).iter()) {
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn convert_preserves_vocabulary_and_zero() {
        let m = random_complex_model(3, 4, 2, 1);
        let h = convert_model(&m).unwrap();
        assert_eq!((h.kind(), h.dim()), (ModelKind::HoleTime, 7));
        assert_eq!(h.entity_vocab(), m.entity_vocab());
        assert_eq!(h.relation_vocab(), m.relation_vocab());
        assert!(matches!(convert_model(&h), Err(Error::KindMismatch { .. })));

        let zero = ModelParams::new(
            ModelKind::Complex,
            2,
            Vocab::from_names(["a"]),
            Vocab::from_names(["r"]),
            Embeddings::Complex(vec![ComplexVec::zeros(2)]),
            Embeddings::Complex(vec![ComplexVec::zeros(2)]),
        )
        .unwrap();
        let hz = convert_model(&zero).unwrap();
        assert_eq!(hz.squared_norm(), 0.0);
        let probes = [Triple::new(0, 0, 0)];
        assert!(matches!(verify_equivalence(&zero, &hz, &probes, 1e-9), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn single_dimension_example() {
        let m = ModelParams::new(
            ModelKind::Complex,
            1,
            Vocab::from_names(["s", "o"]),
            Vocab::from_names(["r"]),
            Embeddings::Complex(vec![
                ComplexVec::new(vec![c(1.0, 1.0)]).unwrap(),
                ComplexVec::new(vec![c(1.0, -1.0)]).unwrap(),
            ]),
            Embeddings::Complex(vec![ComplexVec::new(vec![c(0.0, 1.0)]).unwrap()]),
        )
        .unwrap();
        let t = Triple::new(0, 0, 1);
        assert!((m.score(&t).unwrap() + 2.0).abs() < 1e-15);
        let h = convert_model(&m).unwrap();
        assert!((h.score(&t).unwrap() + 4.0 / 3.0).abs() < 1e-12);
        let rep = verify_equivalence(&m, &h, &[t], 1e-10).unwrap();
        assert!(rep.passed);
        assert!((rep.ratio_mean - 2.0 / 3.0).abs() < 1e-12);
    }

    /// Ratio from an independent route: naive inverse DFT, naive correlation,
    /// plain dot product.
    #[test]
    fn brute_force_constant_at_small_dims() {
        for n in 1..=3 {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..50 {
                let mut draw = || -> Vec<Complex64> {
                    (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
                };
                let (w, s, o) = (draw(), draw(), draw());
                let fc = score_complex(&w, &s, &o).unwrap();
                if fc.abs() < 1e-3 {
                    continue;
                }
                let (hw, hs, ho) = (inverse_oracle(&lift(&w)), inverse_oracle(&lift(&s)), inverse_oracle(&lift(&o)));
                let fh = real_dot(&hw, &circular_correlate_naive(&hs, &ho).unwrap()).unwrap();
                assert!((fh / fc - theoretical_ratio(n)).abs() <= 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn time_score_matches_lifted_spectral_score() {
        for n in [1, 2, 5, 16] {
            for seed in 0..20 {
                let (w, s, o) = (init_complex(n, seed, 1.0), init_complex(n, seed + 100, 1.0), init_complex(n, seed + 200, 1.0));
                let t = score_hole_time(&complex_to_hole_vec(&w), &complex_to_hole_vec(&s), &complex_to_hole_vec(&o)).unwrap();
                let f = score_hole_spectral(&lift(&w), &lift(&s), &lift(&o)).unwrap();
                assert!((t - f).abs() <= 1e-10 * (1.0 + f.abs()));
            }
        }
    }

    #[test]
    fn ratio_constant_across_probes() {
        let m = random_complex_model(16, 30, 4, 2);
        let h = convert_model(&m).unwrap();
        let probes = random_probes(4, 30, 1000, 5);
        for exec in [Execution::Sequential, Execution::Parallel] {
            let rep = verify_equivalence_with(&m, &h, &probes, 1e-10, exec).unwrap();
            assert!(rep.passed, "{rep}");
            assert!(rep.ratio_max_abs_dev <= 1e-10 * rep.ratio_mean.abs());
            assert_eq!(rep.triples_checked, 1000);
        }
    }

    #[test]
    fn signs_and_rankings_preserved() {
        let m = random_complex_model(8, 20, 3, 3);
        let h = convert_model(&m).unwrap();
        for r in 0..3 {
            for s in 0..20 {
                let order = |model: &ModelParams| {
                    let scores: Vec<f64> = (0..20).map(|o| model.score(&Triple::new(r, s, o)).unwrap()).collect();
                    for (fc, o) in scores.iter().zip(0..20) {
                        let t = Triple::new(r, s, o);
                        if model.kind() == ModelKind::Complex && fc.abs() > 1e-9 {
                            assert_eq!(fc.signum(), h.score(&t).unwrap().signum());
                        }
                    }
                    let mut idx: Vec<usize> = (0..20).collect();
                    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
                    idx
                };
                assert_eq!(order(&m), order(&h));
            }
        }
    }

    #[test]
    fn verifier_rejects_mismatched_models() {
        let m = random_complex_model(3, 4, 2, 1);
        let other = convert_model(&random_complex_model(3, 4, 2, 9)).unwrap();
        let probes = random_probes(2, 4, 200, 1);
        let rep = verify_equivalence(&m, &other, &probes, 1e-9).unwrap();
        assert!(!rep.passed);
        assert!(matches!(verify_equivalence(&m, &m, &probes, 1e-9), Err(Error::KindMismatch { .. })));
        let wrong_dim = convert_model(&random_complex_model(2, 4, 2, 1)).unwrap();
        assert!(matches!(verify_equivalence(&m, &wrong_dim, &probes, 1e-9), Err(Error::Dimension { .. })));
        assert!(matches!(verify_equivalence(&m, &other, &[], 1e-9), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn report_renders_both_forms() {
        let m = random_complex_model(2, 3, 1, 4);
        let h = convert_model(&m).unwrap();
        let rep = verify_equivalence(&m, &h, &random_probes(1, 3, 20, 0), 1e-9).unwrap();
        let kv = rep.to_key_values();
        assert!(kv.contains("passed=true") && kv.contains("dim_hole=5"));
        assert!(rep.to_string().starts_with("equivalence check: PASSED"));
    }
}
