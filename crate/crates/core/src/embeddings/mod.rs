//! Skip-gram word embeddings with negative sampling: vocabulary
//! construction, training (optionally warm-started from pretrained
//! vectors), similarity queries, and persistence.

mod io;
mod model;
pub mod sgns;
mod train;
mod vocab;

pub use io::{
    init_pretrained, load_model, load_text_vectors, save_model, save_text_vectors,
    PretrainedCoverage,
};
pub use model::{cosine, norm, EmbeddingModel, Matrix};
pub use train::{train_skipgram, TrainConfig, TrainSummary};
pub(crate) use train::draw_negatives as draw_negatives_for_inference;
pub use vocab::{count_tokens, Vocabulary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("token stream is empty")]
    EmptyStream,
    #[error("token not in vocabulary: {0}")]
    OutOfVocabulary(String),
    #[error("matrix shapes do not match the vocabulary")]
    ShapeMismatch,
    #[error("non-finite value detected during {context}")]
    NonFinite { context: String },
    #[error("negative-sampling distribution has zero total mass")]
    DegenerateSamplingDistribution,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("malformed vector file at line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("vector dimension mismatch: model has {model}, file has {file}")]
    DimensionMismatch { model: usize, file: usize },
    #[error("unsupported model file: {0}")]
    BadModelFile(String),
}
