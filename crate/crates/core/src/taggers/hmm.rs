//! Supervised hidden Markov tagger: maximum-likelihood counts with additive
//! smoothing, Viterbi decoding in log space.

use std::collections::{BTreeSet, HashMap};

use super::{Sequence, TaggerError};

/// Tag/word inventories are sorted for deterministic indices. Emissions
/// reserve one extra column of smoothed mass for unknown words.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    tags: Vec<String>,
    words: HashMap<String, usize>,
    log_initial: Vec<f64>,
    /// T x T, row = from.
    log_transition: Vec<f64>,
    /// T x (W + 1); the last column is the unknown word.
    log_emission: Vec<f64>,
}

pub fn hmm_train(
    sequences: &[Sequence],
    alpha_transition: f64,
    alpha_emission: f64,
) -> Result<HmmModel, TaggerError> {
    if sequences.is_empty() || sequences.iter().all(|s| s.tokens.is_empty()) {
        return Err(TaggerError::EmptyTrainingSet);
    }
    let mut tag_set = BTreeSet::new();
    let mut word_set = BTreeSet::new();
    for seq in sequences {
        for tag in &seq.tags {
            tag_set.insert(tag.clone());
        }
        for tok in &seq.tokens {
            word_set.insert(tok.clone());
        }
    }
    let tags: Vec<String> = tag_set.into_iter().collect();
    let tag_idx: HashMap<String, usize> = tags
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    let words: HashMap<String, usize> = word_set
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w, i))
        .collect();
    let t = tags.len();
    let w = words.len();

    let mut start_counts = vec![0u64; t];
    let mut trans_counts = vec![0u64; t * t];
    let mut emit_counts = vec![0u64; t * (w + 1)];
    let mut n_sequences = 0u64;
    for seq in sequences {
        if seq.tokens.is_empty() {
            continue;
        }
        n_sequences += 1;
        let tag_ids: Vec<usize> = seq.tags.iter().map(|x| tag_idx[x]).collect();
        start_counts[tag_ids[0]] += 1;
        for pair in tag_ids.windows(2) {
            trans_counts[pair[0] * t + pair[1]] += 1;
        }
        for (tok, &ti) in seq.tokens.iter().zip(&tag_ids) {
            emit_counts[ti * (w + 1) + words[tok]] += 1;
        }
    }

    // Smoothed log distributions. A denominator of zero (possible only with
    // alpha = 0 and an unobserved conditioning event) yields -inf rows.
    let smooth = |count: u64, total: u64, alpha: f64, bins: usize| -> f64 {
        let denom = total as f64 + alpha * bins as f64;
        if denom == 0.0 {
            return f64::NEG_INFINITY;
        }
        (count as f64 + alpha).ln() - denom.ln()
    };
    let log_initial: Vec<f64> = (0..t)
        .map(|i| smooth(start_counts[i], n_sequences, alpha_transition, t))
        .collect();
    let mut log_transition = vec![0.0; t * t];
    for from in 0..t {
        let total: u64 = trans_counts[from * t..(from + 1) * t].iter().sum();
        for to in 0..t {
            log_transition[from * t + to] =
                smooth(trans_counts[from * t + to], total, alpha_transition, t);
        }
    }
    let mut log_emission = vec![0.0; t * (w + 1)];
    for ti in 0..t {
        let total: u64 = emit_counts[ti * (w + 1)..(ti + 1) * (w + 1)].iter().sum();
        for wi in 0..=w {
            log_emission[ti * (w + 1) + wi] =
                smooth(emit_counts[ti * (w + 1) + wi], total, alpha_emission, w + 1);
        }
    }
    Ok(HmmModel {
        tags,
        words,
        log_initial,
        log_transition,
        log_emission,
    })
}

impl HmmModel {
    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    fn word_index(&self, token: &str) -> usize {
        self.words.get(token).copied().unwrap_or(self.words.len())
    }

    pub fn log_initial(&self, tag: usize) -> f64 {
        self.log_initial[tag]
    }

    pub fn log_transition(&self, from: usize, to: usize) -> f64 {
        self.log_transition[from * self.tags.len() + to]
    }

    pub fn log_emission(&self, tag: usize, token: &str) -> f64 {
        self.log_emission[tag * (self.words.len() + 1) + self.word_index(token)]
    }

    /// Joint log probability of (tags, tokens), summed left to right.
    pub fn sequence_log_prob(&self, tokens: &[String], tag_ids: &[usize]) -> f64 {
        let mut score = self.log_initial(tag_ids[0]) + self.log_emission(tag_ids[0], &tokens[0]);
        for i in 1..tokens.len() {
            score += self.log_transition(tag_ids[i - 1], tag_ids[i])
                + self.log_emission(tag_ids[i], &tokens[i]);
        }
        score
    }
}

/// Most probable tag sequence; ties break toward the lower tag index.
pub fn viterbi_decode(model: &HmmModel, tokens: &[String]) -> Vec<String> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let t = model.tags.len();
    let mut scores: Vec<f64> = (0..t)
        .map(|ti| model.log_initial(ti) + model.log_emission(ti, &tokens[0]))
        .collect();
    let mut backpointers: Vec<Vec<usize>> = Vec::with_capacity(tokens.len() - 1);
    for token in &tokens[1..] {
        let mut next = vec![f64::NEG_INFINITY; t];
        let mut back = vec![0usize; t];
        for to in 0..t {
            let mut best = f64::NEG_INFINITY;
            let mut best_from = 0usize;
            for from in 0..t {
                let s = scores[from] + model.log_transition(from, to);
                if s > best {
                    best = s;
                    best_from = from;
                }
            }
            next[to] = best + model.log_emission(to, token);
            back[to] = best_from;
        }
        scores = next;
        backpointers.push(back);
    }
    let mut best_tag = 0usize;
    for ti in 1..t {
        if scores[ti] > scores[best_tag] {
            best_tag = ti;
        }
    }
    let mut path = vec![best_tag];
    for back in backpointers.iter().rev() {
        path.push(back[*path.last().unwrap()]);
    }
    path.reverse();
    path.into_iter().map(|ti| model.tags[ti].clone()).collect()
}
