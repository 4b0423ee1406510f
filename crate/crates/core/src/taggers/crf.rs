//! Linear-chain conditional random field.
//!
//! Potentials are unary (position features conjoined with the tag) plus one
//! transition weight per tag pair. Training maximizes the L2-regularized
//! conditional log-likelihood by mini-batch gradient ascent with per-epoch
//! step decay; gradients come from forward-backward expectations.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::features::position_features;
use super::{Sequence, TaggerError};

#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    tags: Vec<String>,
    feature_index: HashMap<String, usize>,
    /// `n_features * n_tags` unary weights, then `n_tags * n_tags`
    /// transition weights.
    weights: Vec<f64>,
    lambda: f64,
}

/// A featurized sequence: per-position feature ids plus gold tag ids.
#[derive(Debug, Clone)]
pub struct CrfInstance {
    pub features: Vec<Vec<usize>>,
    pub tags: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CrfTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Per-epoch multiplicative step decay.
    pub decay: f64,
    pub lambda: f64,
}

impl Default for CrfTrainConfig {
    fn default() -> Self {
        CrfTrainConfig {
            epochs: 40,
            batch_size: 8,
            learning_rate: 0.2,
            decay: 0.95,
            lambda: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrfTrainSummary {
    /// Penalized negative log-likelihood after each epoch.
    pub epoch_losses: Vec<f64>,
}

impl CrfModel {
    /// Index tags and features from training data; weights start at zero.
    pub fn build_untrained(sequences: &[Sequence], lambda: f64) -> Result<Self, TaggerError> {
        if sequences.is_empty() || sequences.iter().all(|s| s.tokens.is_empty()) {
            return Err(TaggerError::EmptyTrainingSet);
        }
        let mut tag_set = BTreeSet::new();
        let mut feature_set = BTreeSet::new();
        for seq in sequences {
            for tag in &seq.tags {
                tag_set.insert(tag.clone());
            }
            for i in 0..seq.tokens.len() {
                for f in position_features(&seq.tokens, i) {
                    feature_set.insert(f);
                }
            }
        }
        let tags: Vec<String> = tag_set.into_iter().collect();
        let feature_index: HashMap<String, usize> = feature_set
            .into_iter()
            .enumerate()
            .map(|(i, f)| (f, i))
            .collect();
        let n = feature_index.len() * tags.len() + tags.len() * tags.len();
        Ok(CrfModel {
            tags,
            feature_index,
            weights: vec![0.0; n],
            lambda,
        })
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_parameters(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) {
        assert_eq!(weights.len(), self.weights.len());
        self.weights = weights;
    }

    fn unary_weight(&self, feature: usize, tag: usize) -> f64 {
        self.weights[feature * self.tags.len() + tag]
    }

    fn transition_base(&self) -> usize {
        self.feature_index.len() * self.tags.len()
    }

    pub fn transition_weight(&self, from: usize, to: usize) -> f64 {
        self.weights[self.transition_base() + from * self.tags.len() + to]
    }

    /// Feature ids per position; unseen features are dropped.
    pub fn featurize(&self, tokens: &[String]) -> Vec<Vec<usize>> {
        (0..tokens.len())
            .map(|i| {
                position_features(tokens, i)
                    .into_iter()
                    .filter_map(|f| self.feature_index.get(&f).copied())
                    .collect()
            })
            .collect()
    }

    pub fn instance(&self, seq: &Sequence) -> Result<CrfInstance, TaggerError> {
        let tags = seq
            .tags
            .iter()
            .map(|t| {
                self.tags
                    .iter()
                    .position(|x| x == t)
                    .ok_or_else(|| TaggerError::UnknownTag(t.clone()))
            })
            .collect::<Result<Vec<usize>, _>>()?;
        Ok(CrfInstance {
            features: self.featurize(&seq.tokens),
            tags,
        })
    }

    fn unary_scores(&self, features: &[Vec<usize>]) -> Vec<Vec<f64>> {
        let t = self.tags.len();
        features
            .iter()
            .map(|feats| {
                (0..t)
                    .map(|tag| feats.iter().map(|&f| self.unary_weight(f, tag)).sum())
                    .collect()
            })
            .collect()
    }

    /// Unnormalized log potential of one tag path.
    pub fn sequence_score(&self, features: &[Vec<usize>], tags: &[usize]) -> f64 {
        let unary = self.unary_scores(features);
        let mut score = unary[0][tags[0]];
        for i in 1..tags.len() {
            score += self.transition_weight(tags[i - 1], tags[i]) + unary[i][tags[i]];
        }
        score
    }

    /// Forward-algorithm log partition function.
    pub fn log_normalizer(&self, features: &[Vec<usize>]) -> f64 {
        let unary = self.unary_scores(features);
        let t = self.tags.len();
        let mut alpha: Vec<f64> = unary[0].clone();
        for u in &unary[1..] {
            let mut next = vec![0.0; t];
            for (to, item) in next.iter_mut().enumerate() {
                let terms: Vec<f64> = (0..t)
                    .map(|from| alpha[from] + self.transition_weight(from, to))
                    .collect();
                *item = log_sum_exp(&terms) + u[to];
            }
            alpha = next;
        }
        log_sum_exp(&alpha)
    }

    pub fn conditional_log_likelihood(&self, instance: &CrfInstance) -> f64 {
        self.sequence_score(&instance.features, &instance.tags)
            - self.log_normalizer(&instance.features)
    }

    /// Penalized objective and its gradient over a dataset:
    /// `sum log p(y|x) - lambda/2 |w|^2`. The gradient comes from
    /// forward-backward marginal expectations.
    pub fn objective_and_gradient(&self, instances: &[CrfInstance]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.weights.len()];
        let mut objective = 0.0;
        for inst in instances {
            objective += self.accumulate_gradient(inst, &mut grad);
        }
        for (g, w) in grad.iter_mut().zip(&self.weights) {
            *g -= self.lambda * w;
        }
        objective -= 0.5 * self.lambda * self.weights.iter().map(|w| w * w).sum::<f64>();
        (objective, grad)
    }

    /// Adds this instance's log-likelihood gradient into `grad`; returns its
    /// log-likelihood.
    fn accumulate_gradient(&self, inst: &CrfInstance, grad: &mut [f64]) -> f64 {
        let t = self.tags.len();
        let n = inst.features.len();
        let unary = self.unary_scores(&inst.features);

        // forward
        let mut alpha = vec![vec![0.0; t]; n];
        alpha[0].clone_from_slice(&unary[0]);
        for i in 1..n {
            for to in 0..t {
                let terms: Vec<f64> = (0..t)
                    .map(|from| alpha[i - 1][from] + self.transition_weight(from, to))
                    .collect();
                alpha[i][to] = log_sum_exp(&terms) + unary[i][to];
            }
        }
        let log_z = log_sum_exp(&alpha[n - 1]);

        // backward
        let mut beta = vec![vec![0.0; t]; n];
        for i in (0..n - 1).rev() {
            for from in 0..t {
                let terms: Vec<f64> = (0..t)
                    .map(|to| self.transition_weight(from, to) + unary[i + 1][to] + beta[i + 1][to])
                    .collect();
                beta[i][from] = log_sum_exp(&terms);
            }
        }

        let t_base = self.transition_base();
        // expected counts
        for i in 0..n {
            for tag in 0..t {
                let p = (alpha[i][tag] + beta[i][tag] - log_z).exp();
                for &f in &inst.features[i] {
                    grad[f * t + tag] -= p;
                }
            }
            if i + 1 < n {
                for from in 0..t {
                    for to in 0..t {
                        let p = (alpha[i][from]
                            + self.transition_weight(from, to)
                            + unary[i + 1][to]
                            + beta[i + 1][to]
                            - log_z)
                            .exp();
                        grad[t_base + from * t + to] -= p;
                    }
                }
            }
        }
        // empirical counts
        for i in 0..n {
            for &f in &inst.features[i] {
                grad[f * t + inst.tags[i]] += 1.0;
            }
            if i + 1 < n {
                grad[t_base + inst.tags[i] * t + inst.tags[i + 1]] += 1.0;
            }
        }
        self.sequence_score(&inst.features, &inst.tags) - log_z
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn crf_train(
    sequences: &[Sequence],
    cfg: &CrfTrainConfig,
) -> Result<(CrfModel, CrfTrainSummary), TaggerError> {
    let mut model = CrfModel::build_untrained(sequences, cfg.lambda)?;
    let instances: Vec<CrfInstance> = sequences
        .iter()
        .filter(|s| !s.tokens.is_empty())
        .map(|s| model.instance(s))
        .collect::<Result<_, _>>()?;
    let total = instances.len() as f64;
    let mut lr = cfg.learning_rate;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        for batch in instances.chunks(cfg.batch_size.max(1)) {
            let mut grad = vec![0.0; model.weights.len()];
            for inst in batch {
                model.accumulate_gradient(inst, &mut grad);
            }
            // Proximal handling of the L2 term: gradient step on the
            // likelihood, then an exact shrink for the quadratic penalty.
            // Stable for any lambda, unlike the explicit penalty gradient.
            let reg_scale = cfg.lambda * batch.len() as f64 / total;
            let shrink = 1.0 / (1.0 + lr * reg_scale);
            for (w, g) in model.weights.iter_mut().zip(&grad) {
                *w = (*w + lr * g) * shrink;
            }
        }
        let loss: f64 = {
            let ll: f64 = instances
                .iter()
                .map(|i| model.conditional_log_likelihood(i))
                .sum();
            -(ll - 0.5 * cfg.lambda * model.weights.iter().map(|w| w * w).sum::<f64>())
        };
        if !loss.is_finite() {
            return Err(TaggerError::NonFinite(format!("crf epoch {epoch} loss")));
        }
        epoch_losses.push(loss);
        lr *= cfg.decay;
    }
    Ok((model, CrfTrainSummary { epoch_losses }))
}

/// Viterbi under the learned potentials; ties break toward the lower tag
/// index (a zero-weight model decodes everything as the first tag).
pub fn crf_decode(model: &CrfModel, tokens: &[String]) -> Vec<String> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let features = model.featurize(tokens);
    let unary = model.unary_scores(&features);
    let t = model.tags.len();
    let mut scores = unary[0].clone();
    let mut backpointers: Vec<Vec<usize>> = Vec::new();
    for u in &unary[1..] {
        let mut next = vec![f64::NEG_INFINITY; t];
        let mut back = vec![0usize; t];
        for to in 0..t {
            let mut best = f64::NEG_INFINITY;
            let mut best_from = 0usize;
            for from in 0..t {
                let s = scores[from] + model.transition_weight(from, to);
                if s > best {
                    best = s;
                    best_from = from;
                }
            }
            next[to] = best + u[to];
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

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn seq(pairs: &[(&str, &str)]) -> Sequence {
        Sequence {
            tokens: pairs.iter().map(|(w, _)| w.to_string()).collect(),
            tags: pairs.iter().map(|(_, t)| t.to_string()).collect(),
        }
    }

    fn random_sequences(rng: &mut ChaCha20Rng, n_tags: usize, count: usize) -> Vec<Sequence> {
        let tags = ["A", "B", "C", "D"];
        let words = ["Blast", "police", "ISRO", "at", "Mr"];
        (0..count)
            .map(|_| {
                let len = rng.gen_range(1..=6);
                let pairs: Vec<(&str, &str)> = (0..len)
                    .map(|_| {
                        (
                            words[rng.gen_range(0..words.len())],
                            tags[rng.gen_range(0..n_tags)],
                        )
                    })
                    .collect();
                seq(&pairs)
            })
            .collect()
    }

    fn randomize_weights(model: &mut CrfModel, rng: &mut ChaCha20Rng) {
        let w: Vec<f64> = (0..model.n_parameters())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        model.set_weights(w);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(83);
        let data = vec![seq(&[("Blast", "A"), ("at", "B"), ("ISRO", "C")])];
        let mut model = CrfModel::build_untrained(&data, 0.1).unwrap();
        randomize_weights(&mut model, &mut rng);
        let instances: Vec<CrfInstance> =
            data.iter().map(|s| model.instance(s).unwrap()).collect();
        let (_, grad) = model.objective_and_gradient(&instances);
        let h = 1e-5;
        for p in 0..model.n_parameters() {
            let mut plus = model.clone();
            let mut w = plus.weights().to_vec();
            w[p] += h;
            plus.set_weights(w);
            let mut minus = model.clone();
            let mut w = minus.weights().to_vec();
            w[p] -= h;
            minus.set_weights(w);
            let fd = (plus.objective_and_gradient(&instances).0
                - minus.objective_and_gradient(&instances).0)
                / (2.0 * h);
            let denom = fd.abs().max(grad[p].abs()).max(1e-8);
            assert!(
                ((fd - grad[p]) / denom).abs() < 1e-4,
                "param {p}: fd {fd} analytic {}",
                grad[p]
            );
        }
    }

    #[test]
    fn normalizer_matches_exhaustive_enumeration() {
        let mut rng = ChaCha20Rng::seed_from_u64(89);
        for _ in 0..60 {
            let n_tags = rng.gen_range(2..=4);
            let data = random_sequences(&mut rng, n_tags, 6);
            let mut model = CrfModel::build_untrained(&data, 0.0).unwrap();
            randomize_weights(&mut model, &mut rng);
            let len = rng.gen_range(1..=6);
            let tokens: Vec<String> = (0..len)
                .map(|_| ["Blast", "police", "at"][rng.gen_range(0..3)].to_string())
                .collect();
            let features = model.featurize(&tokens);
            let t = model.tags().len();
            let mut scores = Vec::new();
            let mut assignment = vec![0usize; len];
            loop {
                scores.push(model.sequence_score(&features, &assignment));
                let mut pos = len;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    assignment[pos] += 1;
                    if assignment[pos] < t {
                        break;
                    }
                    assignment[pos] = 0;
                }
                if assignment.iter().all(|&x| x == 0) {
                    break;
                }
            }
            let brute = log_sum_exp(&scores);
            let fast = model.log_normalizer(&features);
            assert!((brute - fast).abs() < 1e-8, "{brute} vs {fast}");
        }
    }

    #[test]
    fn decode_matches_exhaustive_argmax() {
        let mut rng = ChaCha20Rng::seed_from_u64(97);
        for _ in 0..60 {
            let n_tags = rng.gen_range(2..=4);
            let data = random_sequences(&mut rng, n_tags, 6);
            let mut model = CrfModel::build_untrained(&data, 0.0).unwrap();
            randomize_weights(&mut model, &mut rng);
            let len = rng.gen_range(1..=6);
            let tokens: Vec<String> = (0..len)
                .map(|_| ["Blast", "police", "at"][rng.gen_range(0..3)].to_string())
                .collect();
            let decoded = crf_decode(&model, &tokens);
            let features = model.featurize(&tokens);
            let t = model.tags().len();
            let mut best = f64::NEG_INFINITY;
            let mut best_path = Vec::new();
            let mut assignment = vec![0usize; len];
            loop {
                let s = model.sequence_score(&features, &assignment);
                if s > best {
                    best = s;
                    best_path = assignment.clone();
                }
                let mut pos = len;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    assignment[pos] += 1;
                    if assignment[pos] < t {
                        break;
                    }
                    assignment[pos] = 0;
                }
                if assignment.iter().all(|&x| x == 0) {
                    break;
                }
            }
            let expected: Vec<String> = best_path
                .iter()
                .map(|&i| model.tags()[i].clone())
                .collect();
            assert_eq!(decoded, expected);
        }
    }

    #[test]
    fn zero_weight_model_decodes_first_tag_everywhere() {
        let data = vec![seq(&[("a", "T1"), ("b", "T2")])];
        let model = CrfModel::build_untrained(&data, 0.0).unwrap();
        let tokens: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        assert_eq!(crf_decode(&model, &tokens), vec!["T1", "T1", "T1"]);
    }

    #[test]
    fn single_tag_set_decodes_that_tag() {
        let data = vec![seq(&[("a", "ONLY"), ("b", "ONLY")])];
        let (model, _) = crf_train(&data, &CrfTrainConfig::default()).unwrap();
        let tokens: Vec<String> = ["q", "r"].iter().map(|s| s.to_string()).collect();
        assert_eq!(crf_decode(&model, &tokens), vec!["ONLY", "ONLY"]);
    }

    #[test]
    fn stronger_regularization_shrinks_weights() {
        let mut rng = ChaCha20Rng::seed_from_u64(101);
        let data = random_sequences(&mut rng, 3, 20);
        let norm = |lambda: f64| -> f64 {
            let cfg = CrfTrainConfig {
                lambda,
                epochs: 30,
                ..CrfTrainConfig::default()
            };
            let (model, _) = crf_train(&data, &cfg).unwrap();
            model.weights().iter().map(|w| w * w).sum::<f64>().sqrt()
        };
        assert!(norm(100.0) < norm(0.01));
    }

    #[test]
    fn training_loss_is_non_increasing_within_tolerance() {
        let data = vec![
            seq(&[("the", "O"), ("Blast", "B"), ("Site", "I")]),
            seq(&[("Police", "O"), ("arrested", "O"), ("Salman", "P")]),
            seq(&[("a", "O"), ("Blast", "B")]),
        ];
        let (_, summary) = crf_train(&data, &CrfTrainConfig::default()).unwrap();
        for w in summary.epoch_losses.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{:?}", summary.epoch_losses);
        }
    }

    #[test]
    fn learns_to_tag_training_data() {
        let data = vec![
            seq(&[("police", "O"), ("arrested", "O"), ("Salman", "B-PER_Accused")]),
            seq(&[("Blast", "B-LOC_Event"), ("hit", "O"), ("Delhi", "B-LOC_Event")]),
            seq(&[("police", "O"), ("arrested", "O"), ("Afzal", "B-PER_Accused")]),
        ];
        let cfg = CrfTrainConfig {
            epochs: 80,
            ..CrfTrainConfig::default()
        };
        let (model, _) = crf_train(&data, &cfg).unwrap();
        let tokens: Vec<String> = ["police", "arrested", "Salman"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            crf_decode(&model, &tokens),
            vec!["O", "O", "B-PER_Accused"]
        );
    }
}
