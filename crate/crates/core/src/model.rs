//! Model parameters and the vocabulary/triple types they are indexed by.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scoring;
use crate::spectral::{is_conjugate_symmetric, ComplexVec, RealVec, DEFAULT_SYMMETRY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Real embeddings scored by `w·(e_s ⋆ e_o)`.
    HoleTime,
    /// Conjugate-symmetric spectra scored by `(1/n)·Re(ω·(conj ε_s ⊙ ε_o))`.
    HoleSpectral,
    /// Unconstrained complex embeddings scored by `Re(w·(conj e_s ⊙ e_o))`.
    Complex,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::HoleTime, ModelKind::HoleSpectral, ModelKind::Complex];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::HoleTime => "hole-time",
            ModelKind::HoleSpectral => "hole-spectral",
            ModelKind::Complex => "complex",
        }
    }

    /// Tag byte used by the model file format.
    pub fn tag(self) -> u8 {
        match self {
            ModelKind::HoleTime => 0,
            ModelKind::HoleSpectral => 1,
            ModelKind::Complex => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(ModelKind::HoleTime),
            1 => Some(ModelKind::HoleSpectral),
            2 => Some(ModelKind::Complex),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hole-time" => Ok(ModelKind::HoleTime),
            "hole-spectral" => Ok(ModelKind::HoleSpectral),
            "complex" => Ok(ModelKind::Complex),
            other => Err(format!(
                "unknown model kind `{other}` (expected hole-time, hole-spectral or complex)"
            )),
        }
    }
}

/// Bidirectional name ↔ id map; ids are assigned in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Vocab::new();
        for name in names {
            v.intern(name.into());
        }
        v
    }

    /// Returns the id of `name`, assigning the next id if it is new.
    pub fn intern(&mut self, name: String) -> usize {
        if let Some(&id) = self.ids.get(&name) {
            return id;
        }
        let id = self.names.len();
        self.ids.insert(name.clone(), id);
        self.names.push(name);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub relation: usize,
    pub subject: usize,
    pub object: usize,
}

impl Triple {
    pub fn new(relation: usize, subject: usize, object: usize) -> Self {
        Triple {
            relation,
            subject,
            object,
        }
    }
}

/// One embedding table: real vectors for `hole-time`, complex otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Embeddings {
    Real(Vec<RealVec>),
    Complex(Vec<ComplexVec>),
}

impl Embeddings {
    pub fn len(&self) -> usize {
        match self {
            Embeddings::Real(v) => v.len(),
            Embeddings::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dims(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match self {
            Embeddings::Real(v) => Box::new(v.iter().map(|x| x.len())),
            Embeddings::Complex(v) => Box::new(v.iter().map(|x| x.len())),
        }
    }

    /// Sum of squared moduli over every component.
    pub fn squared_norm(&self) -> f64 {
        match self {
            Embeddings::Real(v) => v.iter().flat_map(|x| x.iter()).map(|a| a * a).sum(),
            Embeddings::Complex(v) => v.iter().flat_map(|x| x.iter()).map(|a| a.norm_sqr()).sum(),
        }
    }

    pub fn as_real(&self) -> Option<&[RealVec]> {
        match self {
            Embeddings::Real(v) => Some(v),
            Embeddings::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[ComplexVec]> {
        match self {
            Embeddings::Complex(v) => Some(v),
            Embeddings::Real(_) => None,
        }
    }
}

/// The parameter matrix of a trained (or converted) model plus its vocabularies.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    kind: ModelKind,
    dim: usize,
    entity_vocab: Vocab,
    relation_vocab: Vocab,
    entities: Embeddings,
    relations: Embeddings,
}

impl ModelParams {
    /// Validates shapes, the table type for `kind`, and conjugate symmetry of
    /// every `hole-spectral` vector.
    pub fn new(
        kind: ModelKind,
        dim: usize,
        entity_vocab: Vocab,
        relation_vocab: Vocab,
        entities: Embeddings,
        relations: Embeddings,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        check_count(entity_vocab.len(), entities.len())?;
        check_count(relation_vocab.len(), relations.len())?;
        for table in [&entities, &relations] {
            let real_table = matches!(table, Embeddings::Real(_));
            if real_table != (kind == ModelKind::HoleTime) {
                return Err(Error::Config(format!(
                    "{kind} models need {} embeddings",
                    if kind == ModelKind::HoleTime { "real" } else { "complex" }
                )));
            }
            if let Some(actual) = table.dims().find(|&d| d != dim) {
                return Err(Error::Dimension {
                    expected: dim,
                    actual,
                });
            }
            if kind == ModelKind::HoleSpectral {
                for v in table.as_complex().unwrap_or_default() {
                    if !is_conjugate_symmetric(v, DEFAULT_SYMMETRY_TOL) {
                        return Err(Error::NotSymmetric {
                            deviation: crate::spectral::symmetry_deviation(v),
                            bound: DEFAULT_SYMMETRY_TOL * (1.0 + v.max_norm()),
                        });
                    }
                }
            }
        }
        Ok(ModelParams {
            kind,
            dim,
            entity_vocab,
            relation_vocab,
            entities,
            relations,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entity_vocab(&self) -> &Vocab {
        &self.entity_vocab
    }

    pub fn relation_vocab(&self) -> &Vocab {
        &self.relation_vocab
    }

    pub fn entities(&self) -> &Embeddings {
        &self.entities
    }

    pub fn relations(&self) -> &Embeddings {
        &self.relations
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    /// `‖Θ‖_F²`, summing squared moduli for complex tables.
    pub fn squared_norm(&self) -> f64 {
        self.entities.squared_norm() + self.relations.squared_norm()
    }

    pub fn check_triple(&self, t: &Triple) -> Result<()> {
        check_id(t.relation, self.num_relations())?;
        check_id(t.subject, self.num_entities())?;
        check_id(t.object, self.num_entities())
    }

    /// Score of `t` under this model's own scoring function.
    pub fn score(&self, t: &Triple) -> Result<f64> {
        self.check_triple(t)?;
        Ok(self.score_unchecked(t))
    }

    pub(crate) fn score_unchecked(&self, t: &Triple) -> f64 {
        match (&self.entities, &self.relations) {
            (Embeddings::Real(e), Embeddings::Real(r)) => {
                scoring::score_hole_time(&r[t.relation], &e[t.subject], &e[t.object])
                    .expect("shapes validated at construction")
            }
            (Embeddings::Complex(e), Embeddings::Complex(r)) => {
                let (w, s, o) = (&r[t.relation], &e[t.subject], &e[t.object]);
                if self.kind == ModelKind::HoleSpectral {
                    scoring::score_hole_spectral(w, s, o)
                } else {
                    scoring::score_complex(w, s, o)
                }
                .expect("shapes validated at construction")
            }
            _ => unreachable!("table types validated at construction"),
        }
    }

    /// Re-tags a `hole-spectral` model as `complex` without touching any
    /// vector. Returns the model and the factor `n` with
    /// `score_complex = n · score_hole_spectral` on every triple.
    pub fn retag_spectral_as_complex(self) -> Result<(ModelParams, f64)> {
        if self.kind != ModelKind::HoleSpectral {
            return Err(Error::KindMismatch {
                expected: ModelKind::HoleSpectral,
                found: self.kind,
            });
        }
        let n = self.dim as f64;
        Ok((
            ModelParams {
                kind: ModelKind::Complex,
                ..self
            },
            n,
        ))
    }
}

fn check_count(vocab: usize, table: usize) -> Result<()> {
    if vocab != table {
        return Err(Error::Config(format!(
            "vocabulary has {vocab} names but the embedding table has {table} rows"
        )));
    }
    Ok(())
}

pub(crate) fn check_id(id: usize, len: usize) -> Result<()> {
    if id >= len {
        return Err(Error::IdOutOfRange { id, len });
    }
    Ok(())
}
