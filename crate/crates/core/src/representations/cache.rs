//! Binary sidecar cache for representation sets.
//!
//! Building representations is the most expensive stage after training, so
//! CLI runs key a cache file by (corpus, model, config) content hashes and
//! reuse it when nothing changed. Vectors are stored as full f64 bits: a
//! cache hit reproduces the build bit-for-bit.

use std::fs;
use std::path::Path;

use super::build::{EntityRepresentation, ReprKind, RepresentationSet};
use super::ReprError;
use crate::corpus::{to_jsonl_string, AnnotatedCorpus};
use crate::embeddings::EmbeddingModel;

const MAGIC: &[u8; 4] = b"RKRC";
const VERSION: u32 = 1;

/// 64-bit FNV-1a; stable across platforms and builds.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn fold(hash: u64, bytes: &[u8]) -> u64 {
    let mut h = hash;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Content key over the corpus, the model tables, and the configuration
/// snapshot that produced a representation set.
pub fn cache_key(corpus: &AnnotatedCorpus, model: &EmbeddingModel, config_json: &str) -> u64 {
    let mut h = fnv1a64(to_jsonl_string(corpus).as_bytes());
    for i in 0..model.vocab().len() {
        h = fold(h, model.vocab().token(i).as_bytes());
        h = fold(h, &model.vocab().count(i).to_le_bytes());
    }
    for table in [model.input(), model.output()] {
        for v in table.data() {
            h = fold(h, &v.to_bits().to_le_bytes());
        }
    }
    fold(h, config_json.as_bytes())
}

pub fn cache_file_name(key: u64) -> String {
    format!("representations-{key:016x}.bin")
}

pub fn save_cache(set: &RepresentationSet, path: impl AsRef<Path>) -> Result<(), ReprError> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(set.unrankable as u64).to_le_bytes());
    out.extend_from_slice(&(set.degenerate as u64).to_le_bytes());
    out.extend_from_slice(&(set.per_document.len() as u64).to_le_bytes());
    for doc in &set.per_document {
        out.extend_from_slice(&(doc.len() as u64).to_le_bytes());
        for repr in doc {
            match repr {
                None => out.push(0),
                Some(r) => {
                    out.push(1);
                    out.push(match r.kind {
                        ReprKind::Cluster => 0,
                        ReprKind::Centroid => 1,
                        ReprKind::Docvec => 2,
                    });
                    let dim = r.vectors.first().map_or(0, |v| v.len());
                    out.extend_from_slice(&(r.vectors.len() as u32).to_le_bytes());
                    out.extend_from_slice(&(dim as u32).to_le_bytes());
                    for v in &r.vectors {
                        for x in v {
                            out.extend_from_slice(&x.to_bits().to_le_bytes());
                        }
                    }
                }
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_cache(path: impl AsRef<Path>) -> Result<RepresentationSet, ReprError> {
    let bytes = fs::read(path)?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], ReprError> {
        if *pos + n > bytes.len() {
            return Err(ReprError::BadCacheFile("truncated".into()));
        }
        let s = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 4)? != MAGIC {
        return Err(ReprError::BadCacheFile("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if version != VERSION {
        return Err(ReprError::BadCacheFile(format!("unsupported version {version}")));
    }
    let unrankable = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let degenerate = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let ndocs = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let mut per_document = Vec::with_capacity(ndocs);
    for _ in 0..ndocs {
        let nmentions = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
        let mut doc = Vec::with_capacity(nmentions);
        for _ in 0..nmentions {
            let flag = take(&mut pos, 1)?[0];
            if flag == 0 {
                doc.push(None);
                continue;
            }
            let kind = match take(&mut pos, 1)?[0] {
                0 => ReprKind::Cluster,
                1 => ReprKind::Centroid,
                2 => ReprKind::Docvec,
                other => {
                    return Err(ReprError::BadCacheFile(format!("unknown kind {other}")))
                }
            };
            let nvecs = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
            let dim = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
            let mut vectors = Vec::with_capacity(nvecs);
            for _ in 0..nvecs {
                let mut v = Vec::with_capacity(dim);
                for _ in 0..dim {
                    v.push(f64::from_bits(u64::from_le_bytes(
                        take(&mut pos, 8)?.try_into().unwrap(),
                    )));
                }
                vectors.push(v);
            }
            doc.push(Some(EntityRepresentation { kind, vectors }));
        }
        per_document.push(doc);
    }
    if pos != bytes.len() {
        return Err(ReprError::BadCacheFile("trailing bytes".into()));
    }
    Ok(RepresentationSet {
        per_document,
        unrankable,
        degenerate,
    })
}
