//! Labeled triple sets, the tab-separated triple file format, and the
//! synthetic ring dataset.
//!
//! File format: UTF-8, one triple per line as `subject<TAB>relation<TAB>object`
//! with an optional fourth field `+1` or `-1` (default `+1`). Blank lines and
//! lines starting with `#` are skipped. Ids are assigned in order of first
//! appearance.

use std::collections::HashSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Triple, Vocab};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    /// `+1.0` or `-1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Example {
    pub triple: Triple,
    pub label: Label,
}

impl Example {
    pub fn positive(triple: Triple) -> Self {
        Example {
            triple,
            label: Label::Positive,
        }
    }

    pub fn negative(triple: Triple) -> Self {
        Example {
            triple,
            label: Label::Negative,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripleSet {
    pub entities: Vocab,
    pub relations: Vocab,
    pub examples: Vec<Example>,
}

impl TripleSet {
    pub fn new(entities: Vocab, relations: Vocab, examples: Vec<Example>) -> Result<Self> {
        for ex in &examples {
            crate::model::check_id(ex.triple.relation, relations.len())?;
            crate::model::check_id(ex.triple.subject, entities.len())?;
            crate::model::check_id(ex.triple.object, entities.len())?;
        }
        Ok(TripleSet {
            entities,
            relations,
            examples,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn positives(&self) -> impl Iterator<Item = Triple> + '_ {
        self.examples
            .iter()
            .filter(|e| e.label == Label::Positive)
            .map(|e| e.triple)
    }

    /// Re-expresses this set in another vocabulary; every name must exist there.
    pub fn reindex(&self, entities: &Vocab, relations: &Vocab) -> Result<TripleSet> {
        let examples = self
            .examples
            .iter()
            .map(|ex| {
                Ok(Example {
                    triple: self.map_triple(&ex.triple, entities, relations)?,
                    label: ex.label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TripleSet {
            entities: entities.clone(),
            relations: relations.clone(),
            examples,
        })
    }

    /// Positive triples of this set expressible in the given vocabulary;
    /// triples naming anything outside it are dropped.
    pub fn known_positives_in(&self, entities: &Vocab, relations: &Vocab) -> Vec<Triple> {
        self.examples
            .iter()
            .filter(|e| e.label == Label::Positive)
            .filter_map(|ex| self.map_triple(&ex.triple, entities, relations).ok())
            .collect()
    }

    fn map_triple(&self, t: &Triple, entities: &Vocab, relations: &Vocab) -> Result<Triple> {
        let ent = |id: usize| {
            let name = self.entities.name(id).unwrap_or_default();
            entities
                .id(name)
                .ok_or_else(|| Error::UnknownEntity(name.to_string()))
        };
        let rel_name = self.relations.name(t.relation).unwrap_or_default();
        let relation = relations
            .id(rel_name)
            .ok_or_else(|| Error::UnknownRelation(rel_name.to_string()))?;
        Ok(Triple::new(relation, ent(t.subject)?, ent(t.object)?))
    }
}

/// Set of positive triples across several sets sharing one vocabulary.
pub fn known_positives<'a>(sets: impl IntoIterator<Item = &'a TripleSet>) -> HashSet<Triple> {
    sets.into_iter().flat_map(|s| s.positives()).collect()
}

pub fn parse_triples(text: &str, path: &Path) -> Result<TripleSet> {
    let mut set = TripleSet::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(err(format!("expected 3 or 4 tab-separated fields, found {}", fields.len())));
        }
        if let Some(pos) = fields[..3].iter().position(|f| f.is_empty()) {
            return Err(err(format!("field {} is empty", pos + 1)));
        }
        let label = match fields.get(3).copied() {
            None | Some("+1") | Some("1") => Label::Positive,
            Some("-1") => Label::Negative,
            Some(other) => return Err(err(format!("label must be +1 or -1, found `{other}`"))),
        };
        let subject = set.entities.intern(fields[0].to_string());
        let relation = set.relations.intern(fields[1].to_string());
        let object = set.entities.intern(fields[2].to_string());
        set.examples.push(Example {
            triple: Triple::new(relation, subject, object),
            label,
        });
    }
    if set.examples.is_empty() {
        return Err(Error::EmptyDataset(path.to_path_buf()));
    }
    Ok(set)
}

pub fn load_triples(path: impl AsRef<Path>) -> Result<TripleSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_triples(&text, path)
}

pub fn write_triples(set: &TripleSet, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for ex in &set.examples {
        let t = ex.triple;
        let name = |v: &Vocab, id| v.name(id).unwrap_or_default().to_string();
        write!(
            out,
            "{}\t{}\t{}",
            name(&set.entities, t.subject),
            name(&set.relations, t.relation),
            name(&set.entities, t.object)
        )?;
        if ex.label == Label::Negative {
            write!(out, "\t-1")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Train/valid/test splits sharing a single vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: TripleSet,
    pub valid: TripleSet,
    pub test: TripleSet,
}

/// Ring-structured graph on `n_entities` nodes: relation `next` links
/// `i → i+1 (mod N)` and `next2` links `i → i+2 (mod N)`. All `next` triples
/// go to train; the `next2` triples are shuffled and split with `N/10` each to
/// valid and test.
pub fn gen_synthetic(n_entities: usize, seed: u64) -> Result<Splits> {
    if n_entities < 10 {
        return Err(Error::Config(format!(
            "synthetic dataset needs at least 10 entities, got {n_entities}"
        )));
    }
    let entities = Vocab::from_names((0..n_entities).map(|i| format!("e{i}")));
    let relations = Vocab::from_names(["next", "next2"]);
    let next = |i: usize, step: usize| (i + step) % n_entities;

    let mut composed: Vec<Triple> = (0..n_entities).map(|i| Triple::new(1, i, next(i, 2))).collect();
    composed.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let held = n_entities / 10;
    let mut test: Vec<Triple> = composed[..held].to_vec();
    let mut valid: Vec<Triple> = composed[held..2 * held].to_vec();
    let mut train_composed: Vec<Triple> = composed[2 * held..].to_vec();
    for part in [&mut test, &mut valid, &mut train_composed] {
        part.sort_by_key(|t| t.subject);
    }

    let mut train: Vec<Example> = (0..n_entities)
        .map(|i| Example::positive(Triple::new(0, i, next(i, 1))))
        .collect();
    train.extend(train_composed.into_iter().map(Example::positive));

    let make = |examples: Vec<Example>| TripleSet {
        entities: entities.clone(),
        relations: relations.clone(),
        examples,
    };
    Ok(Splits {
        train: make(train),
        valid: make(valid.into_iter().map(Example::positive).collect()),
        test: make(test.into_iter().map(Example::positive).collect()),
    })
}
