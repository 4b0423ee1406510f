use serde::{Deserialize, Serialize};

use super::docvec::{represent_docvec, DocvecConfig};
use super::window::{extract_document_context, extract_window, ContextWindow};
use super::{ContextLevel, ReprError};
use crate::corpus::AnnotatedCorpus;
use crate::embeddings::{norm, EmbeddingModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReprKind {
    /// One vector per in-vocabulary context token.
    Cluster,
    /// Normalized mean of the context token vectors.
    Centroid,
    /// Inferred pseudo-document vector over the context tokens.
    Docvec,
}

/// A mention's representation: a set of unit-norm vectors (singleton for
/// centroid and docvec).
#[derive(Debug, Clone, PartialEq)]
pub struct EntityRepresentation {
    pub kind: ReprKind,
    pub vectors: Vec<Vec<f64>>,
}

pub fn unit_normalize(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(v.iter().map(|x| x / n).collect())
}

/// Unit-norm vectors of the in-vocabulary window tokens, duplicates kept.
/// `None` when nothing survives the vocabulary lookup: the mention is
/// unrankable and callers report it.
pub fn represent_cluster(window: &ContextWindow, model: &EmbeddingModel) -> Option<EntityRepresentation> {
    let vectors: Vec<Vec<f64>> = window
        .tokens
        .iter()
        .filter_map(|t| model.vector(t))
        .filter_map(unit_normalize)
        .collect();
    if vectors.is_empty() {
        return None;
    }
    Some(EntityRepresentation {
        kind: ReprKind::Cluster,
        vectors,
    })
}

/// Normalized mean of the cluster vectors. A mean of exactly zero cannot be
/// normalized and is reported as a degenerate representation.
pub fn represent_centroid(
    window: &ContextWindow,
    model: &EmbeddingModel,
) -> Result<Option<EntityRepresentation>, ReprError> {
    let Some(cluster) = represent_cluster(window, model) else {
        return Ok(None);
    };
    let dim = cluster.vectors[0].len();
    let mut mean = vec![0.0; dim];
    for v in &cluster.vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let count = cluster.vectors.len() as f64;
    for m in &mut mean {
        *m /= count;
    }
    let centroid = unit_normalize(&mean).ok_or_else(|| {
        ReprError::Degenerate("context vectors cancel to a zero centroid".into())
    })?;
    Ok(Some(EntityRepresentation {
        kind: ReprKind::Centroid,
        vectors: vec![centroid],
    }))
}

/// Every mention's representation, aligned to `documents()[d].mentions`.
/// `None` entries are unrankable mentions (empty or degenerate context).
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSet {
    pub per_document: Vec<Vec<Option<EntityRepresentation>>>,
    /// Mentions with no in-vocabulary context.
    pub unrankable: usize,
    /// Mentions whose context cancelled to a zero vector.
    pub degenerate: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReprConfig {
    pub kind: ReprKind,
    /// Window half-width d.
    pub radius: usize,
    pub context: ContextLevel,
    #[serde(default)]
    pub docvec: DocvecConfig,
}

impl Default for ReprConfig {
    fn default() -> Self {
        ReprConfig {
            kind: ReprKind::Centroid,
            radius: 5,
            context: ContextLevel::Sentence,
            docvec: DocvecConfig::default(),
        }
    }
}

/// Build representations for every mention of the corpus. Degenerate
/// mentions are counted and left unrankable rather than aborting the run.
pub fn build_representations(
    corpus: &AnnotatedCorpus,
    model: &EmbeddingModel,
    cfg: &ReprConfig,
) -> Result<RepresentationSet, ReprError> {
    let mut per_document = Vec::with_capacity(corpus.documents().len());
    let mut unrankable = 0;
    let mut degenerate = 0;
    for doc in corpus.documents() {
        let mut reprs = Vec::with_capacity(doc.mentions.len());
        for mi in 0..doc.mentions.len() {
            let window = match cfg.context {
                ContextLevel::Sentence => extract_window(doc, mi, cfg.radius),
                ContextLevel::Document => extract_document_context(doc, mi, cfg.radius),
            };
            let repr = match cfg.kind {
                ReprKind::Cluster => represent_cluster(&window, model),
                ReprKind::Centroid => match represent_centroid(&window, model) {
                    Ok(r) => r,
                    Err(ReprError::Degenerate(_)) => {
                        degenerate += 1;
                        None
                    }
                    Err(e) => return Err(e),
                },
                ReprKind::Docvec => represent_docvec(&window, model, &cfg.docvec)?,
            };
            if repr.is_none() {
                unrankable += 1;
            }
            reprs.push(repr);
        }
        per_document.push(reprs);
    }
    Ok(RepresentationSet {
        per_document,
        unrankable,
        degenerate,
    })
}
