//! Sequence-tagging route: supervised HMM and linear-chain CRF over BIO
//! role tags, with mention-level precision evaluation.

mod crf;
mod features;
mod hmm;
mod report;

pub use crf::{crf_decode, crf_train, CrfInstance, CrfModel, CrfTrainConfig, CrfTrainSummary};
pub use features::position_features;
pub use hmm::{hmm_train, viterbi_decode, HmmModel};
pub use report::{extract_spans, role_precision_report, TaggerReport};

use thiserror::Error;

use crate::corpus::AnnotatedCorpus;

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("sequence has no tokens")]
    EmptySequence,
    #[error("gold and predicted sequences are not aligned: {0}")]
    LengthMismatch(String),
    #[error("non-finite value during {0}")]
    NonFinite(String),
    #[error("unknown tag in training data: {0}")]
    UnknownTag(String),
}

/// One training/decoding unit: surface tokens with their BIO tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
}

/// Flatten a corpus into per-sentence tagged sequences (`B-<Role>`,
/// `I-<Role>`, `O`), the view both taggers train on.
pub fn corpus_to_sequences(corpus: &AnnotatedCorpus) -> Vec<Sequence> {
    let mut sequences = Vec::new();
    for doc in corpus.documents() {
        let owner = doc.span_ownership();
        for (si, sent) in doc.sentences.iter().enumerate() {
            if sent.is_empty() {
                continue;
            }
            let tokens: Vec<String> = sent.iter().map(|t| t.surface.clone()).collect();
            let tags: Vec<String> = (0..sent.len())
                .map(|ti| match owner[si][ti] {
                    Some(mi) => {
                        let m = &doc.mentions[mi];
                        if ti == m.span.start {
                            format!("B-{}", m.role)
                        } else {
                            format!("I-{}", m.role)
                        }
                    }
                    None => "O".to_string(),
                })
                .collect();
            sequences.push(Sequence { tokens, tags });
        }
    }
    sequences
}
