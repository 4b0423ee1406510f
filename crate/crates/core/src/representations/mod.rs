//! Entity and role-query representations.
//!
//! An entity mention is represented from the normalized tokens around it —
//! as the set of their vectors (cluster), their normalized mean (centroid),
//! or an inferred pseudo-document vector — using either its own sentence
//! window or, at document level, the concatenated windows of all earlier
//! mentions of the same entity (information flows top-down only). Role
//! queries are the learned role-token vector, optionally expanded with its
//! nearest words.

mod build;
mod cache;
mod docvec;
mod role_model;
mod window;

pub use build::{
    build_representations, represent_centroid, represent_cluster, unit_normalize,
    EntityRepresentation, ReprConfig, ReprKind, RepresentationSet,
};
pub use cache::{cache_file_name, cache_key, fnv1a64, load_cache, save_cache};
pub use docvec::{represent_docvec, DocvecConfig};
pub use role_model::{build_role_query, learn_role_vectors, QueryKind, RoleQuery};
pub use window::{extract_document_context, extract_window, ContextWindow};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::EmbeddingError;

#[derive(Debug, Error)]
pub enum ReprError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("role token not in vocabulary: {0}")]
    MissingRoleToken(String),
    #[error("degenerate representation: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("bad representation cache: {0}")]
    BadCacheFile(String),
}

/// Which context feeds a mention's representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextLevel {
    Sentence,
    Document,
}
