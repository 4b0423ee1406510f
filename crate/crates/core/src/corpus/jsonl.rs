//! Canonical corpus persistence: one JSON document per line.
//!
//! `{"id": "...", "sentences": [["tok", ...], ...], "mentions": [{"entity":
//! "...", "sent": 0, "start": 0, "end": 0, "role": "PER_Victim"}, ...]}`
//!
//! Only surface tokens are persisted; normalized forms are derived state and
//! are recomputed by `preprocess`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnnotatedCorpus, CorpusError, Document, EntityMention, Span, Token};

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    id: String,
    sentences: Vec<Vec<String>>,
    mentions: Vec<JsonMention>,
}

#[derive(Serialize, Deserialize)]
struct JsonMention {
    entity: String,
    sent: usize,
    start: usize,
    end: usize,
    role: String,
}

pub fn load_jsonl(path: impl AsRef<Path>) -> Result<AnnotatedCorpus, CorpusError> {
    let text = fs::read_to_string(path)?;
    parse_jsonl(&text)
}

pub fn parse_jsonl(text: &str) -> Result<AnnotatedCorpus, CorpusError> {
    let mut documents = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: JsonDocument =
            serde_json::from_str(line).map_err(|e| CorpusError::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
        let mut mentions = Vec::with_capacity(raw.mentions.len());
        for m in raw.mentions {
            mentions.push(EntityMention {
                entity_key: m.entity,
                span: Span {
                    sentence: m.sent,
                    start: m.start,
                    end: m.end,
                },
                role: m.role.parse()?,
                mention_ordinal: 0,
            });
        }
        documents.push(Document {
            id: raw.id,
            sentences: raw
                .sentences
                .into_iter()
                .map(|s| s.into_iter().map(Token::new).collect())
                .collect(),
            mentions,
        });
    }
    AnnotatedCorpus::new(documents)
}

pub fn to_jsonl_string(corpus: &AnnotatedCorpus) -> String {
    let mut out = String::new();
    for doc in corpus.documents() {
        let raw = JsonDocument {
            id: doc.id.clone(),
            sentences: doc
                .sentences
                .iter()
                .map(|s| s.iter().map(|t| t.surface.clone()).collect())
                .collect(),
            mentions: doc
                .mentions
                .iter()
                .map(|m| JsonMention {
                    entity: m.entity_key.clone(),
                    sent: m.span.sentence,
                    start: m.span.start,
                    end: m.span.end,
                    role: m.role.to_string(),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&raw).expect("corpus serialization"));
        out.push('\n');
    }
    out
}

pub fn save_jsonl(corpus: &AnnotatedCorpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    fs::write(path, to_jsonl_string(corpus))?;
    Ok(())
}
