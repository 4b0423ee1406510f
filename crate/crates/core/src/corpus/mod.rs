//! Annotated corpora: documents of tokenized sentences with gold entity
//! mentions carrying role labels, plus the preprocessing, role substitution,
//! mention statistics, format conversion, and synthetic generation built on
//! top of them.

mod column;
mod jsonl;
mod preprocess;
mod roles;
mod stats;
mod substitute;
mod synthetic;

pub use column::{load_column, parse_column, save_column, to_column_string};
pub use jsonl::{load_jsonl, parse_jsonl, save_jsonl, to_jsonl_string};
pub use preprocess::{preprocess, stem, PreprocessConfig, Stemmer, DEFAULT_STOPWORDS};
pub use roles::{RoleLabel, ALL_ROLES, IN_STUDY_ROLES};
pub use stats::{mention_statistics, BucketStat, StatisticsReport};
pub use substitute::substitute_roles;
pub use synthetic::{generate_synthetic, GroundTruth, SyntheticSpec};

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown role label: {0}")]
    UnknownRole(String),
    #[error("document {document}: {detail}")]
    SpanOutOfRange { document: String, detail: String },
    #[error("document {document}: mention spans overlap in sentence {sentence}")]
    OverlappingSpans { document: String, sentence: usize },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// One token of a sentence. `normalized` is the post stopword/stem form,
/// empty when the token was removed; before preprocessing it equals the
/// surface form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        let normalized = surface.clone();
        Token {
            surface,
            normalized,
        }
    }
}

/// Token span inside one sentence; `end` is inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

#[allow(clippy::len_without_is_empty)] // a span always covers at least one token
impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, sentence: usize, token: usize) -> bool {
        self.sentence == sentence && (self.start..=self.end).contains(&token)
    }
}

/// One gold mention of an entity. `entity_key` groups coreferent mentions of
/// the same document; `mention_ordinal` is the 0-based position among this
/// key's mentions in document order (derived at construction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    pub entity_key: String,
    pub span: Span,
    pub role: RoleLabel,
    pub mention_ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Vec<Token>>,
    pub mentions: Vec<EntityMention>,
}

impl Document {
    /// For every token, the index into `mentions` of the span that owns it.
    pub fn span_ownership(&self) -> Vec<Vec<Option<usize>>> {
        let mut owner: Vec<Vec<Option<usize>>> = self
            .sentences
            .iter()
            .map(|s| vec![None; s.len()])
            .collect();
        for (mi, m) in self.mentions.iter().enumerate() {
            for t in m.span.start..=m.span.end {
                owner[m.span.sentence][t] = Some(mi);
            }
        }
        owner
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }
}

/// An immutable validated corpus. Mentions are held in document order
/// (sentence, start) with ordinals derived per entity key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedCorpus {
    documents: Vec<Document>,
}

impl AnnotatedCorpus {
    /// Validates spans and derives mention order and ordinals. Rejects rather
    /// than repairs malformed input.
    pub fn new(mut documents: Vec<Document>) -> Result<Self, CorpusError> {
        for doc in &mut documents {
            for m in &doc.mentions {
                let span = m.span;
                if span.sentence >= doc.sentences.len() {
                    return Err(CorpusError::SpanOutOfRange {
                        document: doc.id.clone(),
                        detail: format!(
                            "mention {:?} refers to sentence {} but document has {}",
                            m.entity_key,
                            span.sentence,
                            doc.sentences.len()
                        ),
                    });
                }
                let sent_len = doc.sentences[span.sentence].len();
                if span.end < span.start {
                    return Err(CorpusError::SpanOutOfRange {
                        document: doc.id.clone(),
                        detail: format!(
                            "mention {:?} has end {} before start {}",
                            m.entity_key, span.end, span.start
                        ),
                    });
                }
                if span.end >= sent_len {
                    return Err(CorpusError::SpanOutOfRange {
                        document: doc.id.clone(),
                        detail: format!(
                            "mention {:?} span {}..={} exceeds sentence {} length {}",
                            m.entity_key, span.start, span.end, span.sentence, sent_len
                        ),
                    });
                }
            }
            doc.mentions
                .sort_by_key(|m| (m.span.sentence, m.span.start, m.span.end));
            // Overlap check within each sentence, after sorting by start.
            for pair in doc.mentions.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                if a.span.sentence == b.span.sentence && b.span.start <= a.span.end {
                    return Err(CorpusError::OverlappingSpans {
                        document: doc.id.clone(),
                        sentence: a.span.sentence,
                    });
                }
            }
            let mut seen: HashMap<String, usize> = HashMap::new();
            for m in &mut doc.mentions {
                let next = seen.entry(m.entity_key.clone()).or_insert(0);
                m.mention_ordinal = *next;
                *next += 1;
            }
        }
        Ok(AnnotatedCorpus { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    /// Recount of mentions per role across the whole corpus.
    pub fn role_frequencies(&self) -> BTreeMap<RoleLabel, usize> {
        let mut freq = BTreeMap::new();
        for doc in &self.documents {
            for m in &doc.mentions {
                *freq.entry(m.role).or_insert(0) += 1;
            }
        }
        freq
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|d| d.token_count()).sum()
    }

    pub fn mention_count(&self) -> usize {
        self.documents.iter().map(|d| d.mentions.len()).sum()
    }

    /// Sentences as streams of non-empty normalized tokens, corpus order.
    /// This is the view embedding training and phrase counting consume.
    pub fn normalized_sentences(&self) -> Vec<Vec<String>> {
        self.documents
            .iter()
            .flat_map(|d| d.sentences.iter())
            .map(|s| {
                s.iter()
                    .filter(|t| !t.normalized.is_empty())
                    .map(|t| t.normalized.clone())
                    .collect()
            })
            .collect()
    }
}
