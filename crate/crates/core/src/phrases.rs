//! Bigram phrase mining and corpus rewriting.
//!
//! Two sources of phrases: collocations scored with the count-discount
//! formula `(count(ab) - delta) / (count(a) * count(b))`, and relation
//! phrases ingested from externally extracted (subject, relation, object)
//! tuples. Accepted bigrams are merged into single underscore-joined tokens
//! so that representation learning can treat them as words.
//!
//! The persisted table stores the joined phrase; loading splits it at the
//! last underscore, which reconstructs pairs produced by left-to-right
//! merging (left components accrete first).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedCorpus, Document, PreprocessConfig, Stemmer, Token};

pub const JOINER: char = '_';

#[derive(Debug, Error)]
pub enum PhraseError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid phrase config: {0}")]
    InvalidConfig(String),
    #[error("malformed phrase table at line {line}: {message}")]
    MalformedTable { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhraseSource {
    Collocation,
    Relation,
}

impl PhraseSource {
    fn as_str(&self) -> &'static str {
        match self {
            PhraseSource::Collocation => "collocation",
            PhraseSource::Relation => "relation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhraseEntry {
    pub score: f64,
    pub source: PhraseSource,
}

/// Scored bigrams keyed by their component tokens.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseTable {
    entries: BTreeMap<(String, String), PhraseEntry>,
}

impl PhraseTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, first: impl Into<String>, second: impl Into<String>, entry: PhraseEntry) {
        self.entries.insert((first.into(), second.into()), entry);
    }

    pub fn get(&self, first: &str, second: &str) -> Option<&PhraseEntry> {
        self.entries.get(&(first.to_string(), second.to_string()))
    }

    pub fn contains(&self, first: &str, second: &str) -> bool {
        self.get(first, second).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &PhraseEntry)> {
        self.entries.iter()
    }

    /// Merge another table in; on key collision the higher score wins.
    pub fn extend(&mut self, other: PhraseTable) {
        for (key, entry) in other.entries {
            self.entries
                .entry(key)
                .and_modify(|e| {
                    if entry.score > e.score {
                        *e = entry;
                    }
                })
                .or_insert(entry);
        }
    }

    /// `phrase<TAB>score<TAB>source` rows, phrase joined with `_`.
    pub fn to_tsv_string(&self) -> String {
        let mut out = String::from("phrase\tscore\tsource\n");
        for ((a, b), entry) in &self.entries {
            out.push_str(&format!(
                "{a}{JOINER}{b}\t{}\t{}\n",
                entry.score,
                entry.source.as_str()
            ));
        }
        out
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<(), PhraseError> {
        fs::write(path, self.to_tsv_string())?;
        Ok(())
    }

    pub fn parse_tsv(text: &str) -> Result<PhraseTable, PhraseError> {
        let mut table = PhraseTable::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 && line.starts_with("phrase\t") {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (phrase, score, source) = match (fields.next(), fields.next(), fields.next()) {
                (Some(p), Some(s), Some(src)) => (p, s, src),
                _ => {
                    return Err(PhraseError::MalformedTable {
                        line: lineno + 1,
                        message: "expected 3 tab-separated fields".into(),
                    })
                }
            };
            let (a, b) = phrase.rsplit_once(JOINER).ok_or(PhraseError::MalformedTable {
                line: lineno + 1,
                message: "phrase is not a joined bigram".into(),
            })?;
            let score: f64 = score.parse().map_err(|e| PhraseError::MalformedTable {
                line: lineno + 1,
                message: format!("bad score: {e}"),
            })?;
            let source = match source {
                "collocation" => PhraseSource::Collocation,
                "relation" => PhraseSource::Relation,
                other => {
                    return Err(PhraseError::MalformedTable {
                        line: lineno + 1,
                        message: format!("unknown source {other:?}"),
                    })
                }
            };
            table.insert(a, b, PhraseEntry { score, source });
        }
        Ok(table)
    }

    pub fn load_tsv(path: impl AsRef<Path>) -> Result<PhraseTable, PhraseError> {
        Self::parse_tsv(&fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PhraseConfig {
    /// Count discount: bigrams with count <= delta are excluded.
    pub delta: f64,
    /// Cutoff on the per-million-token normalized score
    /// `raw_score * total_tokens / 1e6`.
    pub threshold: f64,
    /// Merge rounds applied by `merge_phrases`.
    pub passes: usize,
    /// When non-empty, bigrams containing any of these tokens are dropped
    /// from collocation tables. Off by default: the noisy phrases this
    /// admits are part of the studied behavior.
    pub stopword_filter: Vec<String>,
}

impl Default for PhraseConfig {
    fn default() -> Self {
        PhraseConfig {
            delta: 5.0,
            threshold: 1e-4,
            passes: 1,
            stopword_filter: Vec::new(),
        }
    }
}

impl PhraseConfig {
    pub fn validate(&self) -> Result<(), PhraseError> {
        if self.delta < 0.0 {
            return Err(PhraseError::InvalidConfig("delta must be >= 0".into()));
        }
        if self.passes < 1 {
            return Err(PhraseError::InvalidConfig("passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// The count-discount collocation score.
pub fn discounted_score(count_ab: u64, count_a: u64, count_b: u64, delta: f64) -> f64 {
    (count_ab as f64 - delta) / (count_a as f64 * count_b as f64)
}

/// Score adjacent within-sentence bigrams; the table keeps every bigram
/// whose discounted count survives the per-million-normalized threshold.
pub fn collocation_scores(
    sentences: &[Vec<String>],
    cfg: &PhraseConfig,
) -> Result<PhraseTable, PhraseError> {
    cfg.validate()?;
    let mut unigrams: HashMap<&str, u64> = HashMap::new();
    let mut bigrams: HashMap<(&str, &str), u64> = HashMap::new();
    let mut total: u64 = 0;
    for sent in sentences {
        for tok in sent {
            *unigrams.entry(tok).or_insert(0) += 1;
            total += 1;
        }
        for pair in sent.windows(2) {
            *bigrams.entry((&pair[0], &pair[1])).or_insert(0) += 1;
        }
    }
    let stop: HashSet<&str> = cfg.stopword_filter.iter().map(String::as_str).collect();
    let mut table = PhraseTable::new();
    if total == 0 {
        return Ok(table);
    }
    let per_million = total as f64 / 1e6;
    for ((a, b), count_ab) in bigrams {
        if (count_ab as f64) <= cfg.delta {
            continue;
        }
        if stop.contains(a) || stop.contains(b) {
            continue;
        }
        let raw = discounted_score(count_ab, unigrams[a], unigrams[b], cfg.delta);
        if raw * per_million >= cfg.threshold {
            table.insert(
                a,
                b,
                PhraseEntry {
                    score: raw,
                    source: PhraseSource::Collocation,
                },
            );
        }
    }
    Ok(table)
}

#[derive(Debug)]
pub struct RelationLoad {
    pub table: PhraseTable,
    pub skipped_rows: usize,
}

/// Ingest `doc_id<TAB>subject<TAB>relation<TAB>object` tuples. The relation
/// text is tokenized and normalized with the given preprocessing config;
/// every consecutive token pair becomes a phrase whose score is its
/// occurrence count across all tuples. Relation phrases bypass the
/// collocation threshold entirely.
pub fn load_relation_phrases(
    path: impl AsRef<Path>,
    pre: &PreprocessConfig,
) -> Result<RelationLoad, PhraseError> {
    let text = fs::read_to_string(path)?;
    parse_relation_phrases(&text, pre)
}

pub fn parse_relation_phrases(
    text: &str,
    pre: &PreprocessConfig,
) -> Result<RelationLoad, PhraseError> {
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut skipped = 0usize;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            skipped += 1;
            continue;
        }
        let relation = fields[2];
        let tokens: Vec<String> = relation
            .split_whitespace()
            .map(|w| normalize_word(w, pre))
            .filter(|w| !w.is_empty())
            .collect();
        for pair in tokens.windows(2) {
            *counts.entry((pair[0].clone(), pair[1].clone())).or_insert(0) += 1;
        }
    }
    let mut table = PhraseTable::new();
    for ((a, b), count) in counts {
        table.insert(
            a,
            b,
            PhraseEntry {
                score: count as f64,
                source: PhraseSource::Relation,
            },
        );
    }
    Ok(RelationLoad {
        table,
        skipped_rows: skipped,
    })
}

fn normalize_word(word: &str, pre: &PreprocessConfig) -> String {
    if pre.is_stopword(word) {
        return String::new();
    }
    let base = if pre.lowercase {
        word.to_lowercase()
    } else {
        word.to_string()
    };
    match pre.stemmer {
        Stemmer::None => base,
        Stemmer::SuffixStripping => crate::corpus::stem(&base),
    }
}

/// Rewrite the corpus merging table bigrams into single tokens: `passes`
/// rounds of a greedy left-to-right scan. Matching happens on normalized
/// forms (both non-empty); a merged token joins both surfaces and both
/// normalized forms with `_`. Mention spans are re-indexed, and a merge
/// never pairs a token inside a mention with one outside it.
pub fn merge_phrases(
    corpus: &AnnotatedCorpus,
    table: &PhraseTable,
    passes: usize,
) -> AnnotatedCorpus {
    let mut documents: Vec<Document> = corpus.documents().to_vec();
    for _ in 0..passes.max(1) {
        for doc in &mut documents {
            merge_document(doc, table);
        }
    }
    AnnotatedCorpus::new(documents).expect("merging preserves span validity")
}

fn merge_document(doc: &mut Document, table: &PhraseTable) {
    let owner = doc.span_ownership();
    for (si, sent) in doc.sentences.iter_mut().enumerate() {
        let own = &owner[si];
        let mut merged: Vec<Token> = Vec::with_capacity(sent.len());
        // old index -> new index, for span re-indexing
        let mut remap: Vec<usize> = Vec::with_capacity(sent.len());
        let mut i = 0;
        while i < sent.len() {
            let mergeable = i + 1 < sent.len()
                && own[i] == own[i + 1]
                && !sent[i].normalized.is_empty()
                && !sent[i + 1].normalized.is_empty()
                && table.contains(&sent[i].normalized, &sent[i + 1].normalized);
            if mergeable {
                let joined = Token {
                    surface: format!("{}{JOINER}{}", sent[i].surface, sent[i + 1].surface),
                    normalized: format!(
                        "{}{JOINER}{}",
                        sent[i].normalized, sent[i + 1].normalized
                    ),
                };
                remap.push(merged.len());
                remap.push(merged.len());
                merged.push(joined);
                i += 2;
            } else {
                remap.push(merged.len());
                merged.push(sent[i].clone());
                i += 1;
            }
        }
        for m in &mut doc.mentions {
            if m.span.sentence == si {
                m.span.start = remap[m.span.start];
                m.span.end = remap[m.span.end];
            }
        }
        *sent = merged;
    }
}
