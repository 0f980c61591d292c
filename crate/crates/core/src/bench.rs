//! Wall-clock comparison of `hole-time` scoring (FFT path) against
//! `hole-spectral` scoring across dimensions.

use std::hint::black_box;
use std::time::Instant;

use crate::scoring::{score_hole_spectral, score_hole_time};
use crate::spectral::dft;
use crate::train::init_real;

/// Per-dimension timings in nanoseconds per score.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dim: usize,
    pub reps: usize,
    pub hole_time_mean_ns: f64,
    pub hole_time_median_ns: f64,
    pub spectral_mean_ns: f64,
    pub spectral_median_ns: f64,
}

impl BenchRow {
    pub fn to_line(&self) -> String {
        format!(
            "dim={} reps={} hole_time_mean_ns={:.1} hole_time_median_ns={:.1} spectral_mean_ns={:.1} spectral_median_ns={:.1}",
            self.dim,
            self.reps,
            self.hole_time_mean_ns,
            self.hole_time_median_ns,
            self.spectral_mean_ns,
            self.spectral_median_ns
        )
    }
}

/// Scores per timed repetition, so that each sample covers roughly the same
/// amount of arithmetic across dimensions.
fn calls_per_rep(dim: usize) -> usize {
    (1usize << 16).div_ceil(dim).max(1)
}

fn time_reps(reps: usize, calls: usize, mut f: impl FnMut() -> f64) -> (f64, f64) {
    // One untimed repetition warms caches and the FFT plan.
    for _ in 0..calls {
        black_box(f());
    }
    let mut samples: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..calls {
                black_box(f());
            }
            start.elapsed().as_nanos() as f64 / calls as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mean = samples.iter().sum::<f64>() / reps as f64;
    let mid = reps / 2;
    let median = if reps % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    };
    (mean, median)
}

/// Times both scoring paths on random vectors of each dimension.
pub fn scoring_bench(dims: &[usize], reps: usize, seed: u64) -> Vec<BenchRow> {
    assert!(reps >= 1, "at least one repetition");
    dims.iter()
        .map(|&dim| {
            let (w, s, o) = (init_real(dim, seed, 1.0), init_real(dim, seed + 1, 1.0), init_real(dim, seed + 2, 1.0));
            let (fw, fs, fo) = (dft(&w), dft(&s), dft(&o));
            let calls = calls_per_rep(dim);
            let (tm, tmed) = time_reps(reps, calls, || {
                score_hole_time(black_box(&w), black_box(&s), black_box(&o)).expect("equal lengths")
            });
            let (sm, smed) = time_reps(reps, calls, || {
                score_hole_spectral(black_box(&fw), black_box(&fs), black_box(&fo)).expect("equal lengths")
            });
            BenchRow {
                dim,
                reps,
                hole_time_mean_ns: tm,
                hole_time_median_ns: tmed,
                spectral_mean_ns: sm,
                spectral_median_ns: smed,
            }
        })
        .collect()
}
