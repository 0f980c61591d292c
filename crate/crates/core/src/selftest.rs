//! Runtime invariant checks across all modules, for the `selftest` command.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Example;
use crate::equivalence::{convert_model, random_probes, verify_equivalence};
use crate::eval::{rank_entity, Target};
use crate::model::{Embeddings, ModelKind, ModelParams, Triple, Vocab};
use crate::model_file::{decode, encode};
use crate::scoring::{grad_complex, grad_spectral, score_complex, score_hole_spectral, score_hole_time, TripleGradient};
use crate::spectral::{
    circular_convolve_fft, circular_convolve_naive, circular_correlate_fft, circular_correlate_naive, dft, idft_imag_residue,
    idft_real, real_dot, complex_dot, ComplexVec, RealVec,
};
use crate::train::{init_complex, TrainingState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<22} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn(Level) -> Result<String, String>;

const CHECKS: &[(&str, Check)] = &[
    ("fft-vs-direct", fft_vs_direct),
    ("parseval", parseval),
    ("score-domains", score_domains),
    ("spectral-as-complex", spectral_as_complex),
    ("gradients", gradients),
    ("symmetry-under-sgd", symmetry_under_sgd),
    ("equivalence", equivalence),
    ("rank-ties", rank_ties),
    ("model-file", model_file),
];

/// Runs every check; each reports its own pass/fail.
pub fn run(level: Level) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let outcome = check(level);
            let seconds = start.elapsed().as_secs_f64();
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
                seconds,
            }
        })
        .collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn real(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn complex(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn fft_vs_direct(level: Level) -> Result<String, String> {
    let (dims, pairs): (Vec<usize>, usize) = match level {
        Level::Fast => ((1..=32).chain([128]).collect(), 5),
        Level::Full => ((1..=64).chain([128, 256, 1024]).collect(), 100),
    };
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for &n in &dims {
        for _ in 0..pairs {
            let (x, y) = (real(n, &mut r), real(n, &mut r));
            for (fast, slow) in [
                (circular_convolve_fft(&x, &y), circular_convolve_naive(&x, &y)),
                (circular_correlate_fft(&x, &y), circular_correlate_naive(&x, &y)),
            ] {
                let (fast, slow) = (fast.map_err(|e| e.to_string())?, slow.map_err(|e| e.to_string())?);
                let diff: Vec<f64> = fast.iter().zip(slow.iter()).map(|(a, b)| a - b).collect();
                let rel = max_abs(&diff) / max_abs(&slow).max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max relative error {worst:.2e} > 1e-12"))?;
    Ok(format!("max relative error {worst:.2e} over {} dims", dims.len()))
}

fn parseval(level: Level) -> Result<String, String> {
    let pairs = if level == Level::Fast { 100 } else { 1000 };
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for n in [3, 4, 128, 1000] {
        for _ in 0..pairs {
            let (x, y) = (real(n, &mut r), real(n, &mut r));
            let time = real_dot(&x, &y).map_err(|e| e.to_string())?;
            let freq = complex_dot(&dft(&x), &dft(&y)).map_err(|e| e.to_string())?.re / n as f64;
            worst = worst.max((time - freq).abs() / (1.0 + time.abs()));
        }
    }
    ensure(worst <= 1e-12, || format!("deviation {worst:.2e} > 1e-12"))?;
    Ok(format!("max scaled deviation {worst:.2e}"))
}

fn score_domains(level: Level) -> Result<String, String> {
    let triples = if level == Level::Fast { 100 } else { 1000 };
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for n in [4, 8, 128] {
        for _ in 0..triples {
            let (w, s, o) = (real(n, &mut r), real(n, &mut r), real(n, &mut r));
            let t = score_hole_time(&w, &s, &o).map_err(|e| e.to_string())?;
            let f = score_hole_spectral(&dft(&w), &dft(&s), &dft(&o)).map_err(|e| e.to_string())?;
            worst = worst.max((t - f).abs() / t.abs().max(1.0));
        }
    }
    ensure(worst <= 1e-10, || format!("deviation {worst:.2e} > 1e-10"))?;
    Ok(format!("max relative deviation {worst:.2e}"))
}

fn spectral_as_complex(level: Level) -> Result<String, String> {
    let count = if level == Level::Fast { 100 } else { 1000 };
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let n = r.random_range(1..=64);
        let (w, s, o) = (complex(n, &mut r), complex(n, &mut r), complex(n, &mut r));
        let spec = score_hole_spectral(&w, &s, &o).map_err(|e| e.to_string())?;
        let cx = score_complex(&w, &s, &o).map_err(|e| e.to_string())?;
        worst = worst.max((spec - cx / n as f64).abs());
    }
    ensure(worst <= 1e-15, || format!("deviation {worst:.2e} > 1e-15"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

type Scorer = fn(&[Complex64], &[Complex64], &[Complex64]) -> crate::Result<f64>;
type Grad = fn(&[Complex64], &[Complex64], &[Complex64]) -> crate::Result<TripleGradient<ComplexVec>>;

/// Largest relative gap between an analytic gradient and central differences
/// over the real and imaginary part of every component.
pub fn finite_difference_gap(score: Scorer, grad: Grad, args: [&[Complex64]; 3], h: f64) -> f64 {
    let g = grad(args[0], args[1], args[2]).expect("equal lengths");
    let analytic = [&g.relation, &g.subject, &g.object];
    let mut worst: f64 = 0.0;
    for which in 0..3 {
        for j in 0..args[0].len() {
            for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                let eval = |step: f64| {
                    let mut moved: Vec<Vec<Complex64>> = args.iter().map(|a| a.to_vec()).collect();
                    moved[which][j] += dir * step;
                    score(&moved[0], &moved[1], &moved[2]).expect("equal lengths")
                };
                let numeric = (eval(h) - eval(-h)) / (2.0 * h);
                let exact = if dir.re == 1.0 { analytic[which][j].re } else { analytic[which][j].im };
                worst = worst.max((numeric - exact).abs() / exact.abs().max(1.0));
            }
        }
    }
    worst
}

fn gradients(level: Level) -> Result<String, String> {
    let count = if level == Level::Fast { 10 } else { 100 };
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for n in [1, 2, 7, 16] {
        for _ in 0..count {
            let (w, s, o) = (complex(n, &mut r), complex(n, &mut r), complex(n, &mut r));
            worst = worst.max(finite_difference_gap(score_hole_spectral, grad_spectral, [&w, &s, &o], 1e-5));
            worst = worst.max(finite_difference_gap(score_complex, grad_complex, [&w, &s, &o], 1e-5));
        }
    }
    ensure(worst <= 1e-6, || format!("finite-difference gap {worst:.2e} > 1e-6"))?;
    Ok(format!("max finite-difference gap {worst:.2e}"))
}

fn symmetry_under_sgd(level: Level) -> Result<String, String> {
    let steps = if level == Level::Fast { 200 } else { 1000 };
    let (ne, nr, n) = (20, 3, 32);
    let mut r = rng(6);
    let mut state = TrainingState::init(ModelKind::HoleSpectral, n, ne, nr, 6, 1.0 / (n as f64).sqrt());
    for _ in 0..steps {
        let t = Triple::new(r.random_range(0..nr), r.random_range(0..ne), r.random_range(0..ne));
        let ex = if r.random_bool(0.5) { Example::positive(t) } else { Example::negative(t) };
        state.sgd_step(&[ex], 1e-2, 1e-3);
    }
    let asym = state.max_relative_asymmetry();
    ensure(asym <= 1e-9, || format!("asymmetry {asym:.2e} > 1e-9"))?;
    let mut residue: f64 = 0.0;
    for id in 0..ne {
        let v = state.entity(id);
        idft_real(v, 1e-9).map_err(|e| e.to_string())?;
        residue = residue.max(idft_imag_residue(v));
    }
    for id in 0..nr {
        residue = residue.max(idft_imag_residue(state.relation(id)));
    }
    ensure(residue <= 1e-9, || format!("imaginary residue {residue:.2e} > 1e-9"))?;
    Ok(format!("{steps} steps, asymmetry {asym:.2e}, residue {residue:.2e}"))
}

fn random_complex_model(n: usize, ne: usize, nr: usize, seed: u64) -> ModelParams {
    let table = |count: usize, offset: u64| {
        Embeddings::Complex((0..count).map(|i| init_complex(n, seed.wrapping_mul(7919) + offset + i as u64, 1.0)).collect())
    };
    ModelParams::new(
        ModelKind::Complex,
        n,
        Vocab::from_names((0..ne).map(|i| format!("e{i}"))),
        Vocab::from_names((0..nr).map(|i| format!("r{i}"))),
        table(ne, 0),
        table(nr, 1 << 20),
    )
    .expect("consistent shapes")
}

fn equivalence(level: Level) -> Result<String, String> {
    let (dims, probes): (&[usize], usize) = match level {
        Level::Fast => (&[1, 2, 3, 8], 200),
        Level::Full => (&[1, 2, 3, 8, 16, 64], 1000),
    };
    let mut worst: f64 = 0.0;
    for &n in dims {
        let m = random_complex_model(n, 20, 3, n as u64);
        let h = convert_model(&m).map_err(|e| e.to_string())?;
        let rep = verify_equivalence(&m, &h, &random_probes(3, 20, probes, n as u64), 1e-10).map_err(|e| e.to_string())?;
        ensure(rep.passed, || format!("n={n}: {}", rep.to_key_values().replace('\n', " ")))?;
        worst = worst.max(rep.ratio_max_abs_dev / rep.ratio_mean.abs());
    }
    Ok(format!("ratio constant to {worst:.2e} relative"))
}

fn rank_ties(_: Level) -> Result<String, String> {
    for ne in [1, 2, 5, 10] {
        let m = ModelParams::new(
            ModelKind::HoleTime,
            3,
            Vocab::from_names((0..ne).map(|i| format!("e{i}"))),
            Vocab::from_names(["r"]),
            Embeddings::Real(vec![RealVec::zeros(3); ne]),
            Embeddings::Real(vec![RealVec::zeros(3)]),
        )
        .map_err(|e| e.to_string())?;
        let rank = rank_entity(&m, &Triple::new(0, 0, 0), Target::Object, None).map_err(|e| e.to_string())?;
        ensure(rank == (ne + 1).div_ceil(2), || format!("constant model on {ne} entities ranks {rank}"))?;
    }
    Ok("constant models rank at the middle".into())
}

fn model_file(level: Level) -> Result<String, String> {
    let count = if level == Level::Fast { 5 } else { 100 };
    for kind in ModelKind::ALL {
        for seed in 0..count {
            let ne = 1 + seed as usize % 7;
            let dim = 1 + seed as usize % 9;
            let m = TrainingState::init(kind, dim, ne, 2, seed, 1.0)
                .to_params(
                    Vocab::from_names((0..ne).map(|i| format!("e{i}"))),
                    Vocab::from_names(["r0", "r1"]),
                )
                .map_err(|e| e.to_string())?;
            let bytes = encode(&m);
            let back = decode(&bytes).map_err(|e| e.to_string())?;
            ensure(back == m && encode(&back) == bytes, || format!("{kind} roundtrip differs"))?;
        }
    }
    Ok(format!("{} roundtrips", 3 * count))
}
