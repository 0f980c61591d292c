//! Discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 decimation-in-time kernel.
//! Short odd lengths use the direct O(n²) sum against a cached twiddle table;
//! longer non-power-of-two lengths go through Bluestein's chirp-z reduction
//! onto a power-of-two kernel. Plans are cached per thread, keyed by length.
//!
//! Convention: the forward transform is unnormalized and the inverse carries
//! the full `1/n`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;

/// Lengths below this use the direct sum when they are not a power of two.
const DIRECT_MAX: usize = 32;

enum Plan {
    Radix2(Radix2),
    Direct(Direct),
    Bluestein(Bluestein),
}

struct Radix2 {
    n: usize,
    /// `exp(-2πik/n)` for `k < n/2`.
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

struct Direct {
    n: usize,
    /// `exp(-2πik/n)` for `k < n`.
    roots: Vec<Complex64>,
}

struct Bluestein {
    n: usize,
    /// `exp(-iπk²/n)` for `k < n`.
    chirp: Vec<Complex64>,
    /// Forward transform of the zero-padded, wrapped conjugate chirp.
    kernel: Vec<Complex64>,
    inner: Rc<Plan>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Rc<Plan>>> = RefCell::new(HashMap::new());
}

fn plan_for(n: usize) -> Rc<Plan> {
    PLANS.with(|plans| {
        if let Some(p) = plans.borrow().get(&n) {
            return Rc::clone(p);
        }
        let p = Rc::new(Plan::build(n));
        plans.borrow_mut().insert(n, Rc::clone(&p));
        p
    })
}

/// `exp(-2πi·num/den)`, with `num` reduced first so the angle stays small.
fn unit_root(num: usize, den: usize) -> Complex64 {
    let k = (num % den) as f64;
    let (s, c) = (-2.0 * PI * k / den as f64).sin_cos();
    Complex64::new(c, s)
}

impl Plan {
    fn build(n: usize) -> Plan {
        assert!(n >= 1);
        if n.is_power_of_two() {
            Plan::Radix2(Radix2::new(n))
        } else if n < DIRECT_MAX {
            Plan::Direct(Direct {
                n,
                roots: (0..n).map(|k| unit_root(k, n)).collect(),
            })
        } else {
            Plan::Bluestein(Bluestein::new(n))
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        match self {
            Plan::Radix2(p) => p.forward(buf),
            Plan::Direct(p) => p.forward(buf),
            Plan::Bluestein(p) => p.forward(buf),
        }
    }
}

impl Radix2 {
    fn new(n: usize) -> Self {
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Radix2 {
            n,
            twiddles: (0..n / 2).map(|k| unit_root(k, n)).collect(),
            bitrev,
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

impl Direct {
    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let input = buf.to_vec();
        for (j, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &x) in input.iter().enumerate() {
                acc += x * self.roots[(j * k) % n];
            }
            *out = acc;
        }
    }
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        // k² mod 2n keeps the chirp argument in [0, 2π).
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k = k as u128;
                let r = ((k * k) % (2 * n as u128)) as usize;
                unit_root(r, 2 * n)
            })
            .collect();
        let inner = plan_for(m);
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        Bluestein {
            n,
            chirp,
            kernel,
            inner,
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let m = self.kernel.len();
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..self.n {
            work[k] = buf[k] * self.chirp[k];
        }
        self.inner.forward(&mut work);
        for (w, h) in work.iter_mut().zip(&self.kernel) {
            *w *= h;
        }
        inverse_in_place_with(&self.inner, &mut work);
        for k in 0..self.n {
            buf[k] = work[k] * self.chirp[k];
        }
    }
}

fn inverse_in_place_with(plan: &Plan, buf: &mut [Complex64]) {
    for z in buf.iter_mut() {
        *z = z.conj();
    }
    plan.forward(buf);
    let scale = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z = z.conj() * scale;
    }
}

/// Unnormalized forward DFT, in place: `X_j = Σ_k x_k exp(-2πi·jk/n)`.
pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    if buf.len() <= 1 {
        return;
    }
    plan_for(buf.len()).forward(buf);
}

/// Inverse DFT with `1/n` normalization, in place.
pub(crate) fn inverse_in_place(buf: &mut [Complex64]) {
    if buf.len() <= 1 {
        return;
    }
    inverse_in_place_with(&plan_for(buf.len()), buf);
}

/// Direct O(n²) forward DFT with per-term twiddles. Test oracle only.
#[cfg(test)]
pub(crate) fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(k, &v)| v * unit_root(j * k, n))
                .sum()
        })
        .collect()
}
