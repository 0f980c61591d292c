//! SGD training of the logistic objective
//! `Σ log(1 + exp(-y·f(r,s,o))) + λ‖Θ‖_F²` for all three model kinds.
//!
//! Every kind is trained on frequency-domain storage:
//!
//! * `complex` and `hole-spectral` store their own parameters.
//! * `hole-time` stores `dft(w)` / `dft(e)`. Time-domain gradients are
//!   carried over by linearity of the DFT, so a step
//!   `w ← w − α(∂ℓ/∂w + 2λw)` becomes `ω ← ω − α(dft(∂ℓ/∂w) + 2λω)`, with
//!   `dft(e_s ⋆ e_o) = conj(ε_s) ⊙ ε_o` and so on. Vectors are brought back
//!   with `idft_real` on export.
//!
//! Regularization is lazy: each occurrence of a vector in a batch
//! contributes `2λ·v` to its gradient. Updates in a batch are accumulated at
//! the batch-start parameters and applied together.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Example, Label, TripleSet};
use crate::error::{Error, Result};
use crate::model::{Embeddings, ModelKind, ModelParams, Triple, Vocab};
use crate::scoring::{score_to_probability, trilinear};
use crate::spectral::{
    dft, idft_real, is_conjugate_symmetric, max_modulus, symmetrize, symmetry_deviation, ComplexVec, RealVec,
    DEFAULT_SYMMETRY_TOL,
};

/// Attempts at drawing a corrupted triple that is not a known positive.
const MAX_RESAMPLE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub dim: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub negatives_per_positive: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub init_scale: f64,
}

impl TrainConfig {
    /// Defaults: `α = 0.1`, `λ = 1e-4`, 100 epochs, 2 negatives per positive,
    /// batch size 1, seed 0, init scale `1/√dim`.
    pub fn new(kind: ModelKind, dim: usize) -> Self {
        TrainConfig {
            kind,
            dim,
            learning_rate: 0.1,
            lambda: 1e-4,
            epochs: 100,
            negatives_per_positive: 2,
            batch_size: 1,
            seed: 0,
            init_scale: 1.0 / (dim.max(1) as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning rate must be finite and non-negative");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be finite and non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return bad("init scale must be finite and positive");
        }
        Ok(())
    }
}

fn normal(std_dev: f64) -> Normal<f64> {
    Normal::new(0.0, std_dev).expect("standard deviation is finite and non-negative")
}

/// Conjugate-symmetric spectrum: `ξ₀` (and `ξ_{n/2}`) real with variance
/// `scale²`; the free components have independent real and imaginary parts of
/// variance `scale²/2`; the mirror half holds their exact conjugates.
pub fn init_spectral_with<R: Rng>(rng: &mut R, n: usize, scale: f64) -> ComplexVec {
    assert!(n >= 1);
    let real = normal(scale);
    let half = normal(scale / std::f64::consts::SQRT_2);
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    z[0] = Complex64::new(real.sample(rng), 0.0);
    for j in 1..n.div_ceil(2) {
        let c = Complex64::new(half.sample(rng), half.sample(rng));
        z[j] = c;
        z[n - j] = c.conj();
    }
    if n.is_multiple_of(2) && n >= 2 {
        z[n / 2] = Complex64::new(real.sample(rng), 0.0);
    }
    ComplexVec::from_vec_unchecked(z)
}

/// Entries drawn from `Normal(0, scale²)`.
pub fn init_real_with<R: Rng>(rng: &mut R, n: usize, scale: f64) -> RealVec {
    assert!(n >= 1);
    let d = normal(scale);
    RealVec::from_vec_unchecked((0..n).map(|_| d.sample(rng)).collect())
}

/// Real and imaginary parts drawn independently from `Normal(0, scale²/2)`.
pub fn init_complex_with<R: Rng>(rng: &mut R, n: usize, scale: f64) -> ComplexVec {
    assert!(n >= 1);
    let d = normal(scale / std::f64::consts::SQRT_2);
    ComplexVec::from_vec_unchecked(
        (0..n)
            .map(|_| Complex64::new(d.sample(rng), d.sample(rng)))
            .collect(),
    )
}

pub fn init_spectral(n: usize, seed: u64, scale: f64) -> ComplexVec {
    init_spectral_with(&mut ChaCha8Rng::seed_from_u64(seed), n, scale)
}

pub fn init_real(n: usize, seed: u64, scale: f64) -> RealVec {
    init_real_with(&mut ChaCha8Rng::seed_from_u64(seed), n, scale)
}

pub fn init_complex(n: usize, seed: u64, scale: f64) -> ComplexVec {
    init_complex_with(&mut ChaCha8Rng::seed_from_u64(seed), n, scale)
}

/// `log(1 + exp(-y·f))`, switching to the linear asymptote past 35.
pub fn example_loss(f: f64, label: Label) -> f64 {
    let z = -label.sign() * f;
    if z > 35.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

/// `∂/∂f log(1 + exp(-y·f)) = -y·σ(-y·f)`.
fn loss_slope(f: f64, label: Label) -> f64 {
    let y = label.sign();
    -y * score_to_probability(-y * f)
}

/// Objective of an exported model:
/// `Σ example_loss + λ·‖Θ‖_F²`.
pub fn objective(params: &ModelParams, data: &TripleSet, lambda: f64) -> Result<f64> {
    let mut loss = 0.0;
    for ex in &data.examples {
        loss += example_loss(params.score(&ex.triple)?, ex.label);
    }
    Ok(loss + lambda * params.squared_norm())
}

/// Corrupts subjects or objects of positives into labeled negatives.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    num_entities: usize,
    known: HashSet<Triple>,
}

impl NegativeSampler {
    pub fn new(num_entities: usize, known: HashSet<Triple>) -> Self {
        NegativeSampler { num_entities, known }
    }

    /// `k` corrupted copies of `positive`. Each replaces the subject or the
    /// object (fair coin) with a different uniformly drawn entity; draws that
    /// hit a known positive are retried up to 100 times, after which the last
    /// draw is kept.
    pub fn sample<R: Rng>(&self, positive: Triple, k: usize, rng: &mut R) -> Vec<Example> {
        if k == 0 {
            return Vec::new();
        }
        assert!(self.num_entities >= 2, "negative sampling needs at least two entities");
        (0..k)
            .map(|_| {
                let mut candidate = self.corrupt(positive, rng);
                for _ in 1..MAX_RESAMPLE {
                    if !self.known.contains(&candidate) {
                        break;
                    }
                    candidate = self.corrupt(positive, rng);
                }
                Example::negative(candidate)
            })
            .collect()
    }

    fn corrupt<R: Rng>(&self, t: Triple, rng: &mut R) -> Triple {
        let replace_subject = rng.random_bool(0.5);
        let original = if replace_subject { t.subject } else { t.object };
        let mut e = rng.random_range(0..self.num_entities - 1);
        if e >= original {
            e += 1;
        }
        if replace_subject {
            Triple { subject: e, ..t }
        } else {
            Triple { object: e, ..t }
        }
    }
}

/// DFT with the rounding asymmetry removed, so that SGD keeps the spectrum
/// exactly symmetric.
fn symmetric_dft(x: &[f64]) -> Vec<Complex64> {
    let mut z = dft(x).into_inner();
    symmetrize(&mut z);
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Slot {
    Entity(usize),
    Relation(usize),
}

/// Frequency-domain parameters being trained.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingState {
    kind: ModelKind,
    dim: usize,
    entities: Vec<Vec<Complex64>>,
    relations: Vec<Vec<Complex64>>,
}

impl TrainingState {
    /// Random initialization; entity vectors are drawn first, then relation
    /// vectors, all from one stream seeded by `seed`.
    pub fn init(kind: ModelKind, dim: usize, num_entities: usize, num_relations: usize, seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Vec<Complex64> {
            match kind {
                ModelKind::HoleTime => symmetric_dft(&init_real_with(&mut rng, dim, scale)),
                ModelKind::HoleSpectral => init_spectral_with(&mut rng, dim, scale).into_inner(),
                ModelKind::Complex => init_complex_with(&mut rng, dim, scale).into_inner(),
            }
        };
        let entities = (0..num_entities).map(|_| draw()).collect();
        let relations = (0..num_relations).map(|_| draw()).collect();
        TrainingState {
            kind,
            dim,
            entities,
            relations,
        }
    }

    pub fn from_params(params: &ModelParams) -> Self {
        let lift = |table: &Embeddings| -> Vec<Vec<Complex64>> {
            match table {
                Embeddings::Real(v) => v.iter().map(|x| symmetric_dft(x)).collect(),
                Embeddings::Complex(v) => v.iter().map(|x| x.to_vec()).collect(),
            }
        };
        TrainingState {
            kind: params.kind(),
            dim: params.dim(),
            entities: lift(params.entities()),
            relations: lift(params.relations()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same storage interpreted as another kind.
    pub fn with_kind(self, kind: ModelKind) -> Self {
        TrainingState { kind, ..self }
    }

    /// Multiplies every parameter by `c`.
    pub fn scale(&mut self, c: f64) {
        for v in self.entities.iter_mut().chain(self.relations.iter_mut()) {
            for z in v.iter_mut() {
                *z *= c;
            }
        }
    }

    pub fn entity(&self, id: usize) -> &[Complex64] {
        &self.entities[id]
    }

    pub fn relation(&self, id: usize) -> &[Complex64] {
        &self.relations[id]
    }

    fn vectors(&self) -> impl Iterator<Item = &Vec<Complex64>> {
        self.entities.iter().chain(self.relations.iter())
    }

    /// Multiplier turning the raw trilinear form into this kind's score.
    fn score_scale(&self) -> f64 {
        match self.kind {
            ModelKind::Complex => 1.0,
            ModelKind::HoleSpectral | ModelKind::HoleTime => 1.0 / self.dim as f64,
        }
    }

    /// Multiplier turning raw trilinear gradients into the update direction.
    /// For `hole-time` the time-domain gradient maps to the unscaled
    /// frequency product, so the factor is 1.
    fn grad_scale(&self) -> f64 {
        match self.kind {
            ModelKind::Complex | ModelKind::HoleTime => 1.0,
            ModelKind::HoleSpectral => 1.0 / self.dim as f64,
        }
    }

    pub fn score(&self, t: &Triple) -> f64 {
        trilinear(&self.relations[t.relation], &self.entities[t.subject], &self.entities[t.object]).re
            * self.score_scale()
    }

    /// `‖Θ‖_F²` in the kind's own parameterization (time domain for
    /// `hole-time`, where `‖w‖² = ‖dft(w)‖²/n`).
    pub fn squared_norm(&self) -> f64 {
        let raw: f64 = self.vectors().flat_map(|v| v.iter()).map(|z| z.norm_sqr()).sum();
        match self.kind {
            ModelKind::HoleTime => raw / self.dim as f64,
            _ => raw,
        }
    }

    pub fn objective(&self, examples: &[Example], lambda: f64) -> f64 {
        let loss: f64 = examples
            .iter()
            .map(|ex| example_loss(self.score(&ex.triple), ex.label))
            .sum();
        loss + lambda * self.squared_norm()
    }

    /// One update over `batch`: gradients (plus `2λ·v` per occurrence) are
    /// accumulated at the current parameters, then `v ← v − α·g` is applied to
    /// every touched vector.
    pub fn sgd_step(&mut self, batch: &[Example], learning_rate: f64, lambda: f64) {
        let n = self.dim;
        let grad_scale = self.grad_scale();
        let mut index: HashMap<Slot, usize> = HashMap::new();
        let mut grads: Vec<(Slot, Vec<Complex64>)> = Vec::new();

        for ex in batch {
            let t = ex.triple;
            let f = self.score(&t);
            let coef = loss_slope(f, ex.label) * grad_scale;
            let w = &self.relations[t.relation];
            let s = &self.entities[t.subject];
            let o = &self.entities[t.object];

            let slots = [Slot::Relation(t.relation), Slot::Entity(t.subject), Slot::Entity(t.object)];
            for (which, slot) in slots.into_iter().enumerate() {
                let pos = *index.entry(slot).or_insert_with(|| {
                    grads.push((slot, vec![Complex64::new(0.0, 0.0); n]));
                    grads.len() - 1
                });
                let g = &mut grads[pos].1;
                let current = match slot {
                    Slot::Relation(r) => &self.relations[r],
                    Slot::Entity(e) => &self.entities[e],
                };
                for j in 0..n {
                    let d = match which {
                        0 => s[j].conj() * o[j],
                        1 => w[j].conj() * o[j],
                        _ => w[j] * s[j],
                    };
                    g[j] += d * coef + current[j] * (2.0 * lambda);
                }
            }
        }

        for (slot, g) in grads {
            let v = match slot {
                Slot::Relation(r) => &mut self.relations[r],
                Slot::Entity(e) => &mut self.entities[e],
            };
            for (x, d) in v.iter_mut().zip(g) {
                *x -= d * learning_rate;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.vectors().flat_map(|v| v.iter()).all(|z| z.is_finite())
    }

    /// Largest `symmetry_deviation / (1 + max|v|)` over all vectors.
    pub fn max_relative_asymmetry(&self) -> f64 {
        self.vectors()
            .map(|v| symmetry_deviation(v) / (1.0 + max_modulus(v)))
            .fold(0.0, f64::max)
    }

    fn check_symmetry(&self) -> Result<()> {
        for v in self.vectors() {
            if !is_conjugate_symmetric(v, DEFAULT_SYMMETRY_TOL) {
                return Err(Error::NotSymmetric {
                    deviation: symmetry_deviation(v),
                    bound: DEFAULT_SYMMETRY_TOL * (1.0 + max_modulus(v)),
                });
            }
        }
        Ok(())
    }

    /// Exports to [`ModelParams`]; `hole-time` vectors go through `idft_real`.
    pub fn to_params(&self, entity_vocab: Vocab, relation_vocab: Vocab) -> Result<ModelParams> {
        let export = |table: &[Vec<Complex64>]| -> Result<Embeddings> {
            Ok(match self.kind {
                ModelKind::HoleTime => Embeddings::Real(
                    table
                        .iter()
                        .map(|v| idft_real(v, DEFAULT_SYMMETRY_TOL))
                        .collect::<Result<_>>()?,
                ),
                _ => Embeddings::Complex(
                    table
                        .iter()
                        .map(|v| ComplexVec::new(v.clone()))
                        .collect::<Result<_>>()?,
                ),
            })
        };
        ModelParams::new(
            self.kind,
            self.dim,
            entity_vocab,
            relation_vocab,
            export(&self.entities)?,
            export(&self.relations)?,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub objective: f64,
    pub seconds: f64,
}

/// Epoch-by-epoch driver over a fixed training set.
pub struct Trainer<'a> {
    data: &'a TripleSet,
    config: TrainConfig,
    state: TrainingState,
    sampler: NegativeSampler,
    rng: ChaCha8Rng,
    epoch: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(data: &'a TripleSet, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        // Separate streams for initialization and for sampling/shuffling.
        let state = TrainingState::init(
            config.kind,
            config.dim,
            data.entities.len(),
            data.relations.len(),
            config.seed,
            config.init_scale,
        );
        Self::with_state(data, config, state)
    }

    /// Starts from a given state; its kind and dimension override the config's.
    pub fn with_state(data: &'a TripleSet, mut config: TrainConfig, state: TrainingState) -> Result<Self> {
        config.kind = state.kind;
        config.dim = state.dim;
        config.validate()?;
        if data.is_empty() {
            return Err(Error::Config("training set is empty".into()));
        }
        if state.entities.len() != data.entities.len() || state.relations.len() != data.relations.len() {
            return Err(Error::Config("state and dataset vocabularies differ in size".into()));
        }
        if config.negatives_per_positive > 0 && data.entities.len() < 2 {
            return Err(Error::Config("negative sampling needs at least two entities".into()));
        }
        let known: HashSet<Triple> = data.positives().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        Ok(Trainer {
            data,
            sampler: NegativeSampler::new(data.entities.len(), known),
            config,
            state,
            rng,
            epoch: 0,
        })
    }

    pub fn state(&self) -> &TrainingState {
        &self.state
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// This epoch's examples: the training set plus sampled negatives, in one
    /// global shuffled order.
    fn epoch_examples(&mut self) -> Vec<Example> {
        let k = self.config.negatives_per_positive;
        let mut examples = self.data.examples.clone();
        for ex in &self.data.examples {
            if ex.label == Label::Positive {
                examples.extend(self.sampler.sample(ex.triple, k, &mut self.rng));
            }
        }
        examples.shuffle(&mut self.rng);
        examples
    }

    pub fn run_epoch(&mut self) -> Result<EpochRecord> {
        let start = Instant::now();
        self.epoch += 1;
        let examples = self.epoch_examples();
        for batch in examples.chunks(self.config.batch_size) {
            self.state
                .sgd_step(batch, self.config.learning_rate, self.config.lambda);
        }
        if !self.state.all_finite() {
            return Err(Error::Diverged { epoch: self.epoch });
        }
        if self.state.kind != ModelKind::Complex {
            self.state.check_symmetry()?;
        }
        let objective = self.state.objective(&examples, self.config.lambda);
        if !objective.is_finite() {
            return Err(Error::Diverged { epoch: self.epoch });
        }
        Ok(EpochRecord {
            epoch: self.epoch,
            objective,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn into_params(self) -> Result<ModelParams> {
        self.state
            .to_params(self.data.entities.clone(), self.data.relations.clone())
    }

    pub fn into_state(self) -> TrainingState {
        self.state
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub params: ModelParams,
    pub trace: Vec<EpochRecord>,
}

/// Runs `config.epochs` epochs, calling `on_epoch` after each.
pub fn train_with<F: FnMut(&EpochRecord)>(data: &TripleSet, config: &TrainConfig, mut on_epoch: F) -> Result<TrainOutput> {
    let mut trainer = Trainer::new(data, config.clone())?;
    let mut trace = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let rec = trainer.run_epoch()?;
        on_epoch(&rec);
        trace.push(rec);
    }
    Ok(TrainOutput {
        params: trainer.into_params()?,
        trace,
    })
}

pub fn train(data: &TripleSet, config: &TrainConfig) -> Result<TrainOutput> {
    train_with(data, config, |_| {})
}

#[cfg(test)]
mod tests;
