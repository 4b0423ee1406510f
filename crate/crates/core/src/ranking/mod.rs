//! Scoring entity representations against role queries and evaluating the
//! resulting rankings.
//!
//! Both sides of a comparison are sets of unit vectors. Their similarity is
//! the group-average: the mean pairwise cosine over all distinct pairs drawn
//! from the combined set (pairs within one set included, self-pairs not).
//! Because every vector is unit length this has a closed form,
//!
//! ```text
//! sim(e, t) = (|sum v|^2 - N) / (N (N - 1))        N = |e| + |t|
//! ```
//!
//! which for two singletons reduces exactly to their cosine.

mod metrics;
mod rank;
mod report;

pub use metrics::{average_precision_at_k, map_at_k, map_curve, MapCurve};
pub use rank::{rank_entities, RankedItem, RankedList};
pub use report::{QueryResult, RankingReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RankingError {
    #[error("vector set must be non-empty")]
    EmptySet,
    #[error("vector {index} is not unit length (norm {norm})")]
    NotNormalized { index: usize, norm: f64 },
    #[error("k must be >= 1")]
    BadK,
    #[error("no queries with relevant entities to aggregate")]
    NoQueries,
}

/// Non-empty set of unit-norm vectors (tolerance 1e-9 on the norms).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    vectors: Vec<Vec<f64>>,
}

impl VectorSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self, RankingError> {
        if vectors.is_empty() {
            return Err(RankingError::EmptySet);
        }
        for (index, v) in vectors.iter().enumerate() {
            let norm = crate::embeddings::norm(v);
            if (norm - 1.0).abs() > 1e-9 {
                return Err(RankingError::NotNormalized { index, norm });
            }
        }
        Ok(VectorSet { vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }
}

/// Mean pairwise cosine over all distinct pairs of `e + t`, in closed form.
pub fn group_average_similarity(e: &VectorSet, t: &VectorSet) -> f64 {
    let dim = e.dim();
    let mut sum = vec![0.0; dim];
    for v in e.vectors().iter().chain(t.vectors()) {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let n = (e.len() + t.len()) as f64;
    let norm_sq: f64 = sum.iter().map(|x| x * x).sum();
    (norm_sq - n) / (n * (n - 1.0))
}
