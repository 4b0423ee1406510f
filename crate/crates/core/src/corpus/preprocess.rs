//! Stopword removal and suffix-stripping normalization.
//!
//! Preprocessing only fills the `normalized` field of each token; surfaces
//! and mention spans are untouched, so spans keep indexing the original
//! token positions. Tokens inside mention spans are never stopword-removed:
//! the entity's own words must survive for substitution and representation
//! building.

use std::collections::HashSet;

use super::{AnnotatedCorpus, Token};

/// Contents of the bundled stopword list (one word per line, `#` comments).
pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stemmer {
    None,
    #[default]
    SuffixStripping,
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    stopwords: HashSet<String>,
    pub stemmer: Stemmer,
    pub lowercase: bool,
}

impl PreprocessConfig {
    /// Stopword matching is case-insensitive: the list is lowercased here and
    /// tokens are compared by their lowercased surface.
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(
        stopwords: I,
        stemmer: Stemmer,
        lowercase: bool,
    ) -> Self {
        PreprocessConfig {
            stopwords: stopwords
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
            stemmer,
            lowercase,
        }
    }

    pub fn parse_stopword_list(text: &str) -> Vec<String> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    }

    pub fn is_stopword(&self, surface: &str) -> bool {
        self.stopwords.contains(&surface.to_lowercase())
    }
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig::new(
            Self::parse_stopword_list(DEFAULT_STOPWORDS),
            Stemmer::SuffixStripping,
            true,
        )
    }
}

/// Strip one common inflectional suffix. Deliberately crude: the goal is
/// collapsing surface variants ("arrested"/"arrest"), not linguistic
/// correctness.
pub fn stem(word: &str) -> String {
    const RULES: [(&str, &str); 7] = [
        ("ing", ""),
        ("ied", "y"),
        ("ies", "y"),
        ("ed", ""),
        ("es", ""),
        ("ly", ""),
        ("s", ""),
    ];
    for (suffix, replacement) in RULES {
        if let Some(base) = word.strip_suffix(suffix) {
            if suffix == "s" && base.ends_with('s') {
                continue;
            }
            if base.chars().count() >= 3 {
                return format!("{base}{replacement}");
            }
        }
    }
    word.to_string()
}

/// Populate normalized forms. Deterministic in (surface, config), hence
/// idempotent: re-running recomputes the same values from the surfaces.
pub fn preprocess(corpus: &AnnotatedCorpus, cfg: &PreprocessConfig) -> AnnotatedCorpus {
    let mut documents = corpus.documents().to_vec();
    for doc in &mut documents {
        let owner = doc.span_ownership();
        for (si, sent) in doc.sentences.iter_mut().enumerate() {
            for (ti, tok) in sent.iter_mut().enumerate() {
                let in_mention = owner[si][ti].is_some();
                *tok = Token {
                    surface: std::mem::take(&mut tok.surface),
                    normalized: String::new(),
                };
                let base = if cfg.lowercase {
                    tok.surface.to_lowercase()
                } else {
                    tok.surface.clone()
                };
                if !in_mention && cfg.is_stopword(&tok.surface) {
                    continue; // normalized stays empty: removed
                }
                tok.normalized = match cfg.stemmer {
                    Stemmer::None => base,
                    Stemmer::SuffixStripping => stem(&base),
                };
            }
        }
    }
    AnnotatedCorpus::new(documents).expect("preprocess cannot invalidate spans")
}
