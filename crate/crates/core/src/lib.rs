//! Entity role detection toolkit.
//!
//! Detects domain-specific roles of named entities in an annotated corpus by
//! two complementary routes:
//!
//! * retrieval: rank the entities of a document against a role query using
//!   learned word/role vectors and a group-average set similarity, evaluated
//!   with mAP@K;
//! * tagging: classical sequence labelers (HMM, linear-chain CRF) over BIO
//!   role tags, evaluated with role-wise precision.
//!
//! The crate is organized along the pipeline: [`corpus`] (loading,
//! preprocessing, statistics, synthesis), [`phrases`] (collocation and
//! relation phrase mining), [`embeddings`] (skip-gram training),
//! [`representations`] (entity and role query vectors), [`ranking`]
//! (group-average scoring and mAP@K), [`taggers`] (HMM/CRF), and
//! [`pipeline`] (end-to-end orchestration with reproducible configs).

pub mod corpus;
pub mod embeddings;
pub mod phrases;
pub mod pipeline;
pub mod ranking;
pub mod representations;
pub mod taggers;

pub use corpus::{AnnotatedCorpus, CorpusError, RoleLabel};
pub use embeddings::{EmbeddingModel, TrainConfig, Vocabulary};
pub use ranking::{group_average_similarity, VectorSet};
