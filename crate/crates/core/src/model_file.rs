//! Little-endian binary model format.
//!
//! ```text
//! "KGEM"            4 bytes
//! version           u32 (1)
//! kind              u8  (0 hole-time, 1 hole-spectral, 2 complex)
//! dim               u32
//! entity count      u32
//! relation count    u32
//! entity names      per name: u32 byte length + UTF-8
//! relation names    same
//! entity vectors    in id order
//! relation vectors  in id order
//! ```
//!
//! A vector is `n` f64 for `hole-time`, the `n`-float packed spectrum for
//! `hole-spectral`, and `2n` interleaved (Re, Im) f64 for `complex`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Embeddings, ModelKind, ModelParams, Vocab};
use crate::spectral::{pack, unpack, ComplexVec, RealVec};

pub const MAGIC: &[u8; 4] = b"KGEM";
pub const VERSION: u32 = 1;

/// Bytes before the vocabulary blocks.
pub const HEADER_LEN: usize = 4 + 4 + 1 + 4 + 4 + 4;

pub fn encode(m: &ModelParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(m.kind().tag());
    for v in [m.dim(), m.num_entities(), m.num_relations()] {
        out.extend_from_slice(&to_u32(v).to_le_bytes());
    }
    for vocab in [m.entity_vocab(), m.relation_vocab()] {
        for name in vocab.names() {
            out.extend_from_slice(&to_u32(name.len()).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
        }
    }
    for table in [m.entities(), m.relations()] {
        match table {
            Embeddings::Real(vs) => {
                for x in vs.iter().flat_map(|v| v.iter()) {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            Embeddings::Complex(vs) if m.kind() == ModelKind::HoleSpectral => {
                for v in vs {
                    let packed = pack(v).expect("spectral models are validated as conjugate-symmetric");
                    for x in packed.iter() {
                        out.extend_from_slice(&x.to_le_bytes());
                    }
                }
            }
            Embeddings::Complex(vs) => {
                for z in vs.iter().flat_map(|v| v.iter()) {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
    }
    out
}

fn to_u32(v: usize) -> u32 {
    u32::try_from(v).expect("model sizes fit in 32 bits")
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn corrupt(&self, message: impl Into<String>) -> Error {
        Error::CorruptFile {
            offset: self.pos as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.corrupt(format!(
                "truncated {what}: need {len} bytes, {} left",
                self.bytes.len() - self.pos
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn f64s(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(8)
            .ok_or_else(|| self.corrupt(format!("{what} size overflows")))?;
        let b = self.take(len, what)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn vocab(&mut self, count: usize, what: &str) -> Result<Vocab> {
        let mut vocab = Vocab::new();
        for i in 0..count {
            let start = self.pos;
            let len = self.u32(what)?;
            let bytes = self.take(len, what)?;
            let name = std::str::from_utf8(bytes).map_err(|_| Error::CorruptFile {
                offset: start as u64,
                message: format!("{what} {i} is not valid UTF-8"),
            })?;
            if vocab.intern(name.to_string()) != i {
                return Err(Error::CorruptFile {
                    offset: start as u64,
                    message: format!("duplicate {what} `{name}`"),
                });
            }
        }
        Ok(vocab)
    }

    fn table(&mut self, kind: ModelKind, dim: usize, count: usize, what: &str) -> Result<Embeddings> {
        let mut real = Vec::new();
        let mut complex = Vec::new();
        for _ in 0..count {
            let start = self.pos as u64;
            let bad = |e: Error| Error::CorruptFile {
                offset: start,
                message: format!("invalid {what} vector: {e}"),
            };
            match kind {
                ModelKind::HoleTime => real.push(RealVec::new(self.f64s(dim, what)?).map_err(bad)?),
                ModelKind::HoleSpectral => {
                    let p = self.f64s(dim, what)?;
                    let z = unpack(&p, dim).map_err(bad)?;
                    complex.push(ComplexVec::new(z.into_inner()).map_err(bad)?);
                }
                ModelKind::Complex => {
                    let p = self.f64s(2 * dim, what)?;
                    let z = p.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
                    complex.push(ComplexVec::new(z).map_err(bad)?);
                }
            }
        }
        Ok(match kind {
            ModelKind::HoleTime => Embeddings::Real(real),
            _ => Embeddings::Complex(complex),
        })
    }
}

pub fn decode(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::CorruptFile {
            offset: 0,
            message: "bad magic bytes".into(),
        });
    }
    let version = r.u32("version")?;
    if version != VERSION as usize {
        return Err(Error::CorruptFile {
            offset: 4,
            message: format!("unsupported version {version}"),
        });
    }
    let tag = r.take(1, "kind")?[0];
    let kind = ModelKind::from_tag(tag).ok_or_else(|| Error::CorruptFile {
        offset: 8,
        message: format!("unknown model kind tag {tag}"),
    })?;
    let dim = r.u32("dim")?;
    if dim == 0 {
        return Err(Error::CorruptFile {
            offset: 9,
            message: "dimension is zero".into(),
        });
    }
    let ne = r.u32("entity count")?;
    let nr = r.u32("relation count")?;
    let entity_vocab = r.vocab(ne, "entity name")?;
    let relation_vocab = r.vocab(nr, "relation name")?;
    let entities = r.table(kind, dim, ne, "entity")?;
    let relations = r.table(kind, dim, nr, "relation")?;
    if r.pos != bytes.len() {
        return Err(r.corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let end = r.pos as u64;
    ModelParams::new(kind, dim, entity_vocab, relation_vocab, entities, relations).map_err(|e| Error::CorruptFile {
        offset: end,
        message: e.to_string(),
    })
}

pub fn save_model(m: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(m))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelParams> {
    decode(&fs::read(path)?)
}
