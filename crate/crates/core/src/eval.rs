//! Link-prediction evaluation: mean reciprocal rank and Hits@k, raw or
//! filtered, over subject and/or object queries.
//!
//! Ties count against the truth by half, rounded up: with `g` candidates
//! scoring strictly higher and `t` other candidates tying the truth, the rank
//! is `1 + g + ⌈t/2⌉`. A constant model therefore ranks at chance.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{ModelParams, Triple};
use crate::data::{Label, TripleSet};

/// Which slot of a triple a query asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Subject,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Subject,
    Object,
    Both,
}

impl Side {
    fn targets(self) -> &'static [Target] {
        match self {
            Side::Subject => &[Target::Subject],
            Side::Object => &[Target::Object],
            Side::Both => &[Target::Subject, Target::Object],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Subject => "subject",
            Side::Object => "object",
            Side::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Raw,
    Filtered,
}

impl Setting {
    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Raw => "raw",
            Setting::Filtered => "filtered",
        }
    }
}

/// Rank of the true entity in slot `target` of `truth` among all entities.
/// With a filter, candidates forming a filtered triple (other than `truth`
/// itself) are skipped.
pub fn rank_entity(params: &ModelParams, truth: &Triple, target: Target, filter: Option<&HashSet<Triple>>) -> Result<usize> {
    params.check_triple(truth)?;
    Ok(rank_unchecked(params, truth, target, filter))
}

fn rank_unchecked(params: &ModelParams, truth: &Triple, target: Target, filter: Option<&HashSet<Triple>>) -> usize {
    let with = |e: usize| match target {
        Target::Subject => Triple { subject: e, ..*truth },
        Target::Object => Triple { object: e, ..*truth },
    };
    let true_score = params.score_unchecked(truth);
    let truth_id = match target {
        Target::Subject => truth.subject,
        Target::Object => truth.object,
    };
    let (mut greater, mut ties) = (0usize, 0usize);
    for e in (0..params.num_entities()).filter(|&e| e != truth_id) {
        let candidate = with(e);
        if filter.is_some_and(|f| f.contains(&candidate)) {
            continue;
        }
        let s = params.score_unchecked(&candidate);
        if s > true_score {
            greater += 1;
        } else if s == true_score {
            ties += 1;
        }
    }
    1 + greater + ties.div_ceil(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub mrr: f64,
    pub hits_at: BTreeMap<usize, f64>,
    pub setting: Setting,
    pub side: Side,
    pub num_queries: usize,
}

impl EvalResult {
    pub fn from_ranks(ranks: &[usize], ks: &[usize], setting: Setting, side: Side) -> Self {
        let q = ranks.len().max(1) as f64;
        let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / q;
        let hits_at = ks
            .iter()
            .map(|&k| (k, ranks.iter().filter(|&&r| r <= k).count() as f64 / q))
            .collect();
        EvalResult {
            mrr,
            hits_at,
            setting,
            side,
            num_queries: ranks.len(),
        }
    }

    pub fn to_key_values(&self) -> String {
        let mut out = format!(
            "setting={}\nside={}\nqueries={}\nmrr={:.6}\n",
            self.setting.as_str(),
            self.side.as_str(),
            self.num_queries,
            self.mrr
        );
        for (k, v) in &self.hits_at {
            out.push_str(&format!("hits@{k}={v:.6}\n"));
        }
        out
    }
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>10}", "metric", self.setting.as_str())?;
        writeln!(f, "{:<10} {:>10.4}", "MRR", self.mrr)?;
        for (k, v) in &self.hits_at {
            writeln!(f, "{:<10} {:>10.4}", format!("Hits@{k}"), v)?;
        }
        write!(f, "{:<10} {:>10}", "queries", self.num_queries)
    }
}

/// Ranks of every query, in test order with subject queries before object
/// queries for each triple.
pub fn rank_all(
    params: &ModelParams,
    test: &TripleSet,
    filter: Option<&HashSet<Triple>>,
    side: Side,
    exec: Execution,
) -> Result<Vec<usize>> {
    if test.is_empty() {
        return Err(Error::Config("test set is empty".into()));
    }
    let mut queries = Vec::with_capacity(test.len() * side.targets().len());
    for ex in &test.examples {
        if ex.label != Label::Positive {
            return Err(Error::Config("test triples must all be positive".into()));
        }
        params.check_triple(&ex.triple)?;
        for &target in side.targets() {
            queries.push((ex.triple, target));
        }
    }
    Ok(exec.map(&queries, |(t, target)| rank_unchecked(params, t, *target, filter)))
}

/// MRR and Hits@k for `ks`; filtered when `filter` is given.
pub fn evaluate(
    params: &ModelParams,
    test: &TripleSet,
    filter: Option<&HashSet<Triple>>,
    ks: &[usize],
    side: Side,
    exec: Execution,
) -> Result<EvalResult> {
    let ranks = rank_all(params, test, filter, side, exec)?;
    let setting = if filter.is_some() { Setting::Filtered } else { Setting::Raw };
    Ok(EvalResult::from_ranks(&ranks, ks, setting, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Example;
    use crate::model::{Embeddings, ModelKind, Vocab};
    use crate::spectral::{ComplexVec, RealVec};
    use num_complex::Complex64;

    /// Complex model with one relation `[1]` and entity `e` holding `[1]` for
    /// the subject 0; object scores then equal `Re(entity[o])`.
    fn scripted(object_scores: &[f64]) -> ModelParams {
        let ne = object_scores.len();
        let ents = object_scores
            .iter()
            .map(|&v| ComplexVec::new(vec![Complex64::new(v, 0.0)]).unwrap())
            .collect();
        ModelParams::new(
            ModelKind::Complex,
            1,
            Vocab::from_names((0..ne).map(|i| format!("e{i}"))),
            Vocab::from_names(["r"]),
            Embeddings::Complex(ents),
            Embeddings::Complex(vec![ComplexVec::new(vec![Complex64::new(1.0, 0.0)]).unwrap()]),
        )
        .unwrap()
    }

    fn constant(ne: usize) -> ModelParams {
        ModelParams::new(
            ModelKind::HoleTime,
            2,
            Vocab::from_names((0..ne).map(|i| format!("e{i}"))),
            Vocab::from_names(["r"]),
            Embeddings::Real(vec![RealVec::zeros(2); ne]),
            Embeddings::Real(vec![RealVec::zeros(2)]),
        )
        .unwrap()
    }

    #[test]
    fn rank_examples() {
        // Subject 0 has score 1, so object scores are 1·v.
        let m = scripted(&[1.0, 3.0, 2.0]);
        let rank = |o| rank_entity(&m, &Triple::new(0, 0, o), Target::Object, None).unwrap();
        assert_eq!(rank(1), 1);
        assert_eq!(rank(2), 2);
        assert_eq!(rank(0), 3);
        for ne in [1, 2, 5, 8] {
            let c = constant(ne);
            let r = rank_entity(&c, &Triple::new(0, 0, 0), Target::Subject, None).unwrap();
            assert_eq!(r, (ne + 1).div_ceil(2));
        }
        assert!(matches!(
            rank_entity(&m, &Triple::new(0, 0, 3), Target::Object, None),
            Err(Error::IdOutOfRange { .. })
        ));
    }

    #[test]
    fn filter_removes_other_positives_only() {
        let m = scripted(&[1.0, 3.0, 2.0]);
        let filter: HashSet<Triple> = [Triple::new(0, 0, 1), Triple::new(0, 0, 0)].into_iter().collect();
        assert_eq!(rank_entity(&m, &Triple::new(0, 0, 0), Target::Object, Some(&filter)).unwrap(), 2);
        assert_eq!(rank_entity(&m, &Triple::new(0, 0, 2), Target::Object, Some(&filter)).unwrap(), 1);
    }

    #[test]
    fn mrr_from_ranks() {
        let r = EvalResult::from_ranks(&[1, 2, 4], &[1, 3, 10], Setting::Raw, Side::Both);
        assert!((r.mrr - 1.75 / 3.0).abs() < 1e-15);
        assert_eq!(r.hits_at[&1], 1.0 / 3.0);
        assert_eq!(r.hits_at[&3], 2.0 / 3.0);
        assert_eq!(r.hits_at[&10], 1.0);
        let perfect = EvalResult::from_ranks(&[1; 6], &[1], Setting::Raw, Side::Both);
        assert_eq!((perfect.mrr, perfect.hits_at[&1]), (1.0, 1.0));
    }

    #[test]
    fn filtered_never_below_raw_and_modes_agree() {
        let m = scripted(&[0.5, -1.0, 2.0, 0.1, 0.7]);
        let examples: Vec<Example> = (0..5).map(|o| Example::positive(Triple::new(0, 0, o))).collect();
        let test = TripleSet::new(m.entity_vocab().clone(), m.relation_vocab().clone(), examples).unwrap();
        let filter: HashSet<Triple> = test.positives().collect();
        for side in [Side::Subject, Side::Object, Side::Both] {
            let raw = evaluate(&m, &test, None, &[1, 3], side, Execution::Sequential).unwrap();
            let fil = evaluate(&m, &test, Some(&filter), &[1, 3], side, Execution::Sequential).unwrap();
            assert!(fil.mrr >= raw.mrr);
            assert!(raw.hits_at[&1] <= raw.hits_at[&3]);
            assert!(raw.mrr >= raw.hits_at[&1]);
            let par = evaluate(&m, &test, Some(&filter), &[1, 3], side, Execution::Parallel).unwrap();
            assert_eq!(par, fil);
        }
        let both = evaluate(&m, &test, None, &[1], Side::Both, Execution::Sequential).unwrap();
        assert_eq!(both.num_queries, 10);
    }

    #[test]
    fn random_model_matches_harmonic_expectation() {
        use rand::{Rng, SeedableRng};
        let ne = 50;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut total = 0.0;
        let trials = 4000;
        for _ in 0..trials {
            let scores: Vec<f64> = (0..ne).map(|_| rng.random::<f64>()).collect();
            let m = scripted(&scores);
            let truth = rng.random_range(0..ne);
            total += 1.0 / rank_entity(&m, &Triple::new(0, 0, truth), Target::Object, None).unwrap() as f64;
        }
        let expected = (1..=ne).map(|i| 1.0 / i as f64).sum::<f64>() / ne as f64;
        assert!((total / trials as f64 - expected).abs() < 0.01, "{} vs {expected}", total / trials as f64);
    }

    #[test]
    fn rejects_negative_or_empty_test_sets() {
        let m = scripted(&[1.0, 2.0]);
        let neg = TripleSet::new(
            m.entity_vocab().clone(),
            m.relation_vocab().clone(),
            vec![Example::negative(Triple::new(0, 0, 1))],
        )
        .unwrap();
        assert!(evaluate(&m, &neg, None, &[1], Side::Both, Execution::Sequential).is_err());
        let empty = TripleSet::new(m.entity_vocab().clone(), m.relation_vocab().clone(), vec![]).unwrap();
        assert!(evaluate(&m, &empty, None, &[1], Side::Both, Execution::Sequential).is_err());
    }

    #[test]
    fn renders_table_and_key_values() {
        let r = EvalResult::from_ranks(&[1, 2], &[1, 10], Setting::Filtered, Side::Both);
        let kv = r.to_key_values();
        assert!(kv.contains("mrr=0.750000") && kv.contains("hits@10=1.000000"));
        assert!(r.to_string().contains("Hits@10"));
    }
}
