use super::*;
use crate::data::gen_synthetic;
use crate::scoring::grad_hole_time;
use crate::spectral::{idft_imag_residue, is_conjugate_symmetric};

fn toy_set() -> TripleSet {
    // 3 entities, 1 relation.
    let entities = Vocab::from_names(["a", "b", "c"]);
    let relations = Vocab::from_names(["r"]);
    let examples = vec![
        Example::positive(Triple::new(0, 0, 1)),
        Example::positive(Triple::new(0, 1, 2)),
        Example::negative(Triple::new(0, 2, 0)),
        Example::negative(Triple::new(0, 0, 0)),
    ];
    TripleSet::new(entities, relations, examples).unwrap()
}

fn random_set(num_entities: usize, num_relations: usize, positives: usize, seed: u64) -> TripleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let examples = (0..positives)
        .map(|_| {
            Example::positive(Triple::new(
                rng.random_range(0..num_relations),
                rng.random_range(0..num_entities),
                rng.random_range(0..num_entities),
            ))
        })
        .collect();
    TripleSet::new(
        Vocab::from_names((0..num_entities).map(|i| format!("e{i}"))),
        Vocab::from_names((0..num_relations).map(|i| format!("r{i}"))),
        examples,
    )
    .unwrap()
}

#[test]
fn init_spectral_contract() {
    for n in 1..40 {
        let z = init_spectral(n, 3, 0.7);
        assert!(is_conjugate_symmetric(&z, 1e-15));
        assert_eq!(crate::spectral::symmetry_deviation(&z), 0.0);
        assert!(idft_real(&z, 1e-15).is_ok());
        assert!(idft_imag_residue(&z) <= 1e-15);
        assert_eq!(z, init_spectral(n, 3, 0.7));
    }
}

#[test]
fn init_real_and_complex_contracts() {
    assert_eq!(init_real(17, 5, 0.3), init_real(17, 5, 0.3));
    assert_ne!(init_real(17, 5, 0.3), init_real(17, 6, 0.3));
    assert_eq!(init_complex(9, 5, 0.3), init_complex(9, 5, 0.3));
    assert!(is_conjugate_symmetric(&dft(&init_real(33, 1, 1.0)), 1e-12));

    let scale = 0.4;
    let xs = init_real(10_000, 11, scale);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    assert!((var - scale * scale).abs() <= 0.1 * scale * scale, "var {var}");
    assert!(mean.abs() < 0.05 * scale * 4.0);

    // E|z|² = scale² for complex draws as well.
    let zs = init_complex(10_000, 12, scale);
    let second = zs.iter().map(|z| z.norm_sqr()).sum::<f64>() / zs.len() as f64;
    assert!((second - scale * scale).abs() <= 0.1 * scale * scale);
}

#[test]
fn example_loss_values() {
    assert!((example_loss(0.0, Label::Positive) - std::f64::consts::LN_2).abs() < 1e-15);
    assert!(example_loss(1e6, Label::Positive) < 1e-300);
    assert_eq!(example_loss(-1e6, Label::Positive), 1e6);
    let want = (1.0 + (-3.0f64).exp()).ln();
    assert!((want - 0.048587).abs() < 1e-6);
    assert!((example_loss(-3.0, Label::Negative) - want).abs() < 1e-15);
    for f in [-50.0, -36.0, -34.9, 0.3, 40.0] {
        let v = example_loss(f, Label::Positive);
        assert!(v.is_finite() && v >= 0.0);
    }
}

#[test]
fn objective_matches_hand_sum() {
    let data = toy_set();
    let zero = TrainingState::init(ModelKind::Complex, 4, 3, 1, 0, 1.0);
    let mut zero = zero;
    zero.scale(0.0);
    let params = zero.to_params(data.entities.clone(), data.relations.clone()).unwrap();
    let obj = objective(&params, &data, 0.0).unwrap();
    assert!((obj - 4.0 * std::f64::consts::LN_2).abs() < 1e-12);

    for kind in ModelKind::ALL {
        let state = TrainingState::init(kind, 5, 3, 1, 9, 0.8);
        let params = state.to_params(data.entities.clone(), data.relations.clone()).unwrap();
        let lambda = 0.05;
        let mut hand = 0.0;
        for ex in &data.examples {
            let f = params.score(&ex.triple).unwrap();
            let y = ex.label.sign();
            hand += (1.0 + (-y * f).exp()).ln();
        }
        let norm = params.squared_norm();
        let got = objective(&params, &data, lambda).unwrap();
        assert!((got - (hand + lambda * norm)).abs() <= 1e-12, "{kind}");
        assert!((objective(&params, &data, 0.0).unwrap() - hand).abs() <= 1e-12);
        // The internal state agrees with the exported model.
        assert!((state.objective(&data.examples, lambda) - got).abs() <= 1e-10 * (1.0 + got));
    }
}

#[test]
fn zero_learning_rate_changes_nothing() {
    let data = random_set(6, 2, 10, 1);
    for kind in ModelKind::ALL {
        let mut state = TrainingState::init(kind, 8, 6, 2, 4, 0.5);
        let before = state.clone();
        state.sgd_step(&data.examples, 0.0, 0.1);
        assert_eq!(state, before);
    }
}

#[test]
fn single_step_descends() {
    for kind in ModelKind::ALL {
        for label in [Label::Positive, Label::Negative] {
            let mut state = TrainingState::init(kind, 8, 4, 1, 17, 1.0);
            let ex = [Example {
                triple: Triple::new(0, 1, 2),
                label,
            }];
            let before = state.objective(&ex, 0.0);
            state.sgd_step(&ex, 1e-3, 0.0);
            assert!(state.objective(&ex, 0.0) < before, "{kind} {label:?}");
        }
    }
}

#[test]
fn spectral_step_keeps_symmetry() {
    let data = random_set(5, 2, 8, 2);
    let mut state = TrainingState::init(ModelKind::HoleSpectral, 10, 5, 2, 3, 1.0);
    state.sgd_step(&data.examples, 0.05, 0.01);
    for v in state.vectors() {
        assert!(is_conjugate_symmetric(v, 1e-13));
    }
}

#[test]
fn hole_time_step_equals_time_domain_sgd() {
    // Reference: SGD directly on real vectors with time-domain gradients.
    let n = 6;
    let (alpha, lambda) = (0.03, 0.02);
    let data = random_set(4, 1, 1, 3);
    let ex = data.examples[0];
    let t = ex.triple;
    let mut state = TrainingState::init(ModelKind::HoleTime, n, 4, 1, 21, 0.9);
    let params = state.to_params(data.entities.clone(), data.relations.clone()).unwrap();
    let real = |id: usize, rel: bool| -> Vec<f64> {
        let table = if rel { params.relations() } else { params.entities() };
        table.as_real().unwrap()[id].to_vec()
    };
    let (w, s, o) = (real(t.relation, true), real(t.subject, false), real(t.object, false));
    let f = crate::scoring::score_hole_time(&w, &s, &o).unwrap();
    let g = grad_hole_time(&w, &s, &o).unwrap();
    let slope = loss_slope(f, ex.label);
    let step = |v: &[f64], gv: &[f64]| -> Vec<f64> {
        v.iter().zip(gv).map(|(x, d)| x - alpha * (slope * d + 2.0 * lambda * x)).collect()
    };
    let want_w = step(&w, &g.relation);
    let mut want_s = step(&s, &g.subject);
    let mut want_o = step(&o, &g.object);
    if t.subject == t.object {
        let both: Vec<f64> = s
            .iter()
            .zip(g.subject.iter())
            .zip(g.object.iter())
            .map(|((x, a), b)| x - alpha * (slope * (a + b) + 4.0 * lambda * x))
            .collect();
        want_s = both.clone();
        want_o = both;
    }

    state.sgd_step(&[ex], alpha, lambda);
    let after = state.to_params(data.entities.clone(), data.relations.clone()).unwrap();
    let got = |id: usize, rel: bool| -> Vec<f64> {
        let table = if rel { after.relations() } else { after.entities() };
        table.as_real().unwrap()[id].to_vec()
    };
    for (a, b) in [
        (got(t.relation, true), want_w),
        (got(t.subject, false), want_s),
        (got(t.object, false), want_o),
    ] {
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn negative_sampler_contract() {
    let known: HashSet<Triple> = [Triple::new(0, 0, 1)].into_iter().collect();
    let sampler = NegativeSampler::new(5, known);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(sampler.sample(Triple::new(0, 0, 1), 0, &mut rng).is_empty());

    let pos = Triple::new(0, 2, 3);
    let negs = sampler.sample(pos, 200, &mut rng);
    assert_eq!(negs.len(), 200);
    for n in &negs {
        assert_eq!(n.label, Label::Negative);
        let changed = (n.triple.subject != pos.subject) as u8 + (n.triple.object != pos.object) as u8;
        assert_eq!(changed, 1);
        assert_eq!(n.triple.relation, pos.relation);
        assert!(n.triple.subject < 5 && n.triple.object < 5);
    }
    let a = sampler.sample(pos, 10, &mut ChaCha8Rng::seed_from_u64(42));
    let b = sampler.sample(pos, 10, &mut ChaCha8Rng::seed_from_u64(42));
    assert_eq!(a, b);
}

#[test]
fn negative_sampler_avoids_known_positives() {
    // With 3 entities, corrupting (0, 1, 2) can give (0,0,2), (0,2,2), (0,1,0), (0,1,1).
    let known: HashSet<Triple> = [Triple::new(0, 0, 2), Triple::new(0, 2, 2), Triple::new(0, 1, 0)]
        .into_iter()
        .collect();
    let sampler = NegativeSampler::new(3, known.clone());
    let negs = sampler.sample(Triple::new(0, 1, 2), 50, &mut ChaCha8Rng::seed_from_u64(3));
    assert!(negs.iter().all(|n| n.triple == Triple::new(0, 1, 1)));

    // Nothing admissible: kept after the retry budget.
    let all: HashSet<Triple> = [Triple::new(0, 0, 1), Triple::new(0, 1, 1), Triple::new(0, 0, 0)].into_iter().collect();
    let sampler = NegativeSampler::new(2, all);
    assert_eq!(sampler.sample(Triple::new(0, 0, 1), 3, &mut ChaCha8Rng::seed_from_u64(3)).len(), 3);
}

#[test]
fn config_validation() {
    let ok = TrainConfig::new(ModelKind::Complex, 8);
    assert!(ok.validate().is_ok());
    assert!((ok.init_scale - 1.0 / 8f64.sqrt()).abs() < 1e-15);
    for bad in [
        TrainConfig { epochs: 0, ..ok.clone() },
        TrainConfig { batch_size: 0, ..ok.clone() },
        TrainConfig { lambda: -1.0, ..ok.clone() },
        TrainConfig { learning_rate: f64::NAN, ..ok.clone() },
        TrainConfig { init_scale: 0.0, ..ok.clone() },
        TrainConfig { dim: 0, ..ok.clone() },
    ] {
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
    }
}

#[test]
fn zero_rate_epoch_returns_initialization() {
    let data = random_set(6, 2, 12, 5);
    for kind in ModelKind::ALL {
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 1,
            seed: 3,
            ..TrainConfig::new(kind, 8)
        };
        let out = train(&data, &cfg).unwrap();
        let init = TrainingState::init(kind, 8, 6, 2, 3, cfg.init_scale)
            .to_params(data.entities.clone(), data.relations.clone())
            .unwrap();
        assert_eq!(out.params, init);
        assert_eq!(out.trace.len(), 1);
    }
}

#[test]
fn training_is_deterministic_and_descends() {
    let splits = gen_synthetic(20, 1).unwrap();
    for kind in ModelKind::ALL {
        let cfg = TrainConfig {
            epochs: 30,
            learning_rate: 0.05,
            init_scale: 0.5,
            seed: 9,
            ..TrainConfig::new(kind, 8)
        };
        let a = train(&splits.train, &cfg).unwrap();
        let b = train(&splits.train, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        let objs = |o: &TrainOutput| o.trace.iter().map(|r| r.objective).collect::<Vec<_>>();
        assert_eq!(objs(&a), objs(&b));

        let init = TrainingState::init(kind, 8, 20, 2, 9, 0.5)
            .to_params(splits.train.entities.clone(), splits.train.relations.clone())
            .unwrap();
        let before = objective(&init, &splits.train, cfg.lambda).unwrap();
        let after = objective(&a.params, &splits.train, cfg.lambda).unwrap();
        assert!(after < before, "{kind}: {after} !< {before}");
    }
}

#[test]
fn divergence_is_reported_with_epoch() {
    let data = random_set(5, 1, 10, 8);
    let cfg = TrainConfig {
        learning_rate: 1e6,
        init_scale: 10.0,
        lambda: 0.0,
        epochs: 50,
        ..TrainConfig::new(ModelKind::Complex, 4)
    };
    match train(&data, &cfg) {
        Err(Error::Diverged { epoch }) => assert!(epoch >= 1),
        other => panic!("expected divergence, got {:?}", other.map(|o| o.trace.len())),
    }
}

#[test]
fn symmetry_survives_long_training() {
    let data = random_set(12, 3, 50, 6);
    for kind in [ModelKind::HoleSpectral, ModelKind::HoleTime] {
        let cfg = TrainConfig {
            learning_rate: 1e-2,
            lambda: 1e-3,
            epochs: 10,
            negatives_per_positive: 1,
            seed: 2,
            ..TrainConfig::new(kind, 16)
        };
        let mut trainer = Trainer::new(&data, cfg).unwrap();
        for _ in 0..10 {
            trainer.run_epoch().unwrap();
        }
        // 10 epochs × 100 examples = 1000 single-example steps.
        assert!(trainer.state().max_relative_asymmetry() <= 1e-9);
        for v in trainer.state().vectors() {
            assert!(idft_imag_residue(v) <= 1e-9);
        }
    }
}

#[test]
fn complex_kind_from_symmetric_init_stays_symmetric() {
    let data = random_set(10, 2, 50, 7);
    let state = TrainingState::init(ModelKind::HoleSpectral, 12, 10, 2, 1, 0.5).with_kind(ModelKind::Complex);
    let cfg = TrainConfig {
        learning_rate: 1e-2,
        lambda: 1e-3,
        negatives_per_positive: 1,
        ..TrainConfig::new(ModelKind::Complex, 12)
    };
    let mut trainer = Trainer::with_state(&data, cfg, state).unwrap();
    for _ in 0..10 {
        trainer.run_epoch().unwrap();
    }
    assert!(trainer.state().max_relative_asymmetry() <= 1e-9);
}

#[test]
fn full_batch_descent_is_monotone() {
    let data = random_set(6, 2, 10, 4);
    for kind in ModelKind::ALL {
        let mut state = TrainingState::init(kind, 8, 6, 2, 5, 0.8);
        let mut last = state.objective(&data.examples, 0.0);
        for step in 0..50 {
            state.sgd_step(&data.examples, 1e-2, 0.0);
            let now = state.objective(&data.examples, 0.0);
            assert!(now < last, "{kind} step {step}: {now} !< {last}");
            last = now;
        }
    }
}

/// Spectral training from `S` with `(α, λ)` against complex training from
/// `n^{-1/3}·S` with `(α·n^{-2/3}, λ·n^{2/3})`: the complex scores equal the
/// spectral ones and the parameters stay related by the factor `n^{-1/3}`.
#[test]
fn spectral_training_is_scaled_complex_training() {
    let n = 8;
    let data = random_set(7, 2, 10, 11);
    let (alpha, lambda) = (0.05, 1e-3);
    let c = (n as f64).powf(-1.0 / 3.0);
    let base = TrainConfig {
        learning_rate: alpha,
        lambda,
        negatives_per_positive: 1,
        batch_size: 2,
        seed: 13,
        ..TrainConfig::new(ModelKind::HoleSpectral, n)
    };
    let init = TrainingState::init(ModelKind::HoleSpectral, n, 7, 2, 3, 1.0);
    let mut spectral = Trainer::with_state(&data, base.clone(), init.clone()).unwrap();
    let mut scaled = init.with_kind(ModelKind::Complex);
    scaled.scale(c);
    let cfg_c = TrainConfig {
        learning_rate: alpha * c * c,
        lambda: lambda / (c * c),
        ..base
    };
    let mut complex = Trainer::with_state(&data, cfg_c, scaled).unwrap();
    // 20 examples per epoch in batches of 2 → 10 steps per epoch.
    for _ in 0..10 {
        let a = spectral.run_epoch().unwrap();
        let b = complex.run_epoch().unwrap();
        assert!((a.objective - b.objective).abs() <= 1e-9 * (1.0 + a.objective.abs()));
    }
    let s = spectral.state();
    let x = complex.state();
    for id in 0..7 {
        for (p, q) in s.entity(id).iter().zip(x.entity(id)) {
            assert!((p * c - q).norm() <= 1e-9);
        }
    }
    for id in 0..2 {
        for (p, q) in s.relation(id).iter().zip(x.relation(id)) {
            assert!((p * c - q).norm() <= 1e-9);
        }
    }
}

/// Same init and `α/n` alone does not reproduce the spectral trajectory: the
/// loss slope sees `n·f` instead of `f`, and the decay term shrinks by `n`.
#[test]
fn unscaled_init_with_rate_over_n_does_not_match() {
    let n = 8;
    let data = random_set(7, 2, 10, 11);
    let base = TrainConfig {
        learning_rate: 0.05,
        lambda: 1e-3,
        negatives_per_positive: 1,
        batch_size: 2,
        seed: 13,
        ..TrainConfig::new(ModelKind::HoleSpectral, n)
    };
    let init = TrainingState::init(ModelKind::HoleSpectral, n, 7, 2, 3, 1.0);
    let mut spectral = Trainer::with_state(&data, base.clone(), init.clone()).unwrap();
    let cfg_c = TrainConfig {
        learning_rate: 0.05 / n as f64,
        ..base
    };
    let mut complex = Trainer::with_state(&data, cfg_c, init.with_kind(ModelKind::Complex)).unwrap();
    for _ in 0..10 {
        spectral.run_epoch().unwrap();
        complex.run_epoch().unwrap();
    }
    let gap = spectral
        .state()
        .vectors()
        .zip(complex.state().vectors())
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max);
    assert!(gap > 1e-6, "gap {gap}");
}
