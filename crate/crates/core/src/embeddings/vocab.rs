use std::collections::HashMap;

use super::EmbeddingError;

/// Token inventory with dense indices `0..len`. Ordering is deterministic:
/// by descending frequency, ties by token. Special tokens (role tokens,
/// phrase tokens) are retained regardless of the min-count threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total: u64,
}

impl Vocabulary {
    pub fn build<I, S>(stream: I, min_count: u64, specials: &[String]) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total = 0u64;
        for tok in stream {
            *counts.entry(tok.as_ref().to_string()).or_insert(0) += 1;
            total += 1;
        }
        if total == 0 {
            return Err(EmbeddingError::EmptyStream);
        }
        for sp in specials {
            counts.entry(sp.clone()).or_insert(0);
        }
        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(tok, c)| *c >= min_count || specials.contains(tok))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(Self::from_entries(entries))
    }

    /// From (token, count) pairs in their final index order.
    pub fn from_entries(entries: Vec<(String, u64)>) -> Self {
        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (tok, c) in entries {
            index.insert(tok.clone(), tokens.len());
            tokens.push(tok);
            counts.push(c);
        }
        let total = counts.iter().sum();
        Vocabulary {
            tokens,
            counts,
            index,
            total,
        }
    }

    /// New vocabulary keeping this one's token order, appending the missing
    /// `extra` tokens, and replacing all counts with a recount (absent
    /// tokens get 0). Used to warm-start a model over a rewritten stream.
    pub fn extended(&self, extra: &[String], recount: &HashMap<String, u64>) -> Vocabulary {
        let mut entries: Vec<(String, u64)> = self
            .tokens
            .iter()
            .map(|t| (t.clone(), recount.get(t).copied().unwrap_or(0)))
            .collect();
        for tok in extra {
            if !self.index.contains_key(tok) {
                entries.push((tok.clone(), recount.get(tok).copied().unwrap_or(0)));
            }
        }
        Vocabulary::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Total token occurrences counted at build time.
    pub fn total_count(&self) -> u64 {
        self.total
    }
}

pub fn count_tokens<'a, I: IntoIterator<Item = &'a Vec<String>>>(
    sentences: I,
) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for sent in sentences {
        for tok in sent {
            *counts.entry(tok.clone()).or_insert(0) += 1;
        }
    }
    counts
}
