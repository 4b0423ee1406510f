//! Pseudo-document vector inference, distributed-bag-of-words style.
//!
//! The context window is treated as a tiny document: a fresh random vector
//! is trained to predict the window tokens with negative sampling while the
//! model's word tables stay frozen. Only the document vector moves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::build::{unit_normalize, EntityRepresentation, ReprKind};
use super::window::ContextWindow;
use super::ReprError;
use crate::embeddings::sgns::{pair_gradient, NegativeSampler};
use crate::embeddings::{EmbeddingError, EmbeddingModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DocvecConfig {
    /// Gradient passes over the window tokens.
    pub steps: usize,
    pub learning_rate: f64,
    pub negatives: usize,
    pub unigram_power: f64,
    pub seed: u64,
}

impl Default for DocvecConfig {
    fn default() -> Self {
        DocvecConfig {
            steps: 50,
            learning_rate: 0.025,
            negatives: 5,
            unigram_power: 0.75,
            seed: 1,
        }
    }
}

/// Deterministic for a fixed seed. With zero steps the result is just the
/// normalized random initialization.
pub fn represent_docvec(
    window: &ContextWindow,
    model: &EmbeddingModel,
    cfg: &DocvecConfig,
) -> Result<Option<EntityRepresentation>, ReprError> {
    let targets: Vec<usize> = window
        .tokens
        .iter()
        .filter_map(|t| model.vocab().get(t))
        .collect();
    if targets.is_empty() {
        return Ok(None);
    }
    let dim = model.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let scale = 0.5 / dim as f64;
    let mut doc: Vec<f64> = (0..dim).map(|_| rng.gen_range(-scale..=scale)).collect();
    let sampler = NegativeSampler::new(model.vocab().counts(), cfg.unigram_power)?;
    for _ in 0..cfg.steps {
        for &t in &targets {
            let negs = crate::embeddings::draw_negatives_for_inference(
                &sampler,
                &mut rng,
                cfg.negatives,
                t,
            );
            let neg_rows: Vec<&[f64]> = negs.iter().map(|&k| model.output().row(k)).collect();
            let grad = pair_gradient(&doc, model.output().row(t), &neg_rows);
            if !grad.loss.is_finite() {
                return Err(ReprError::Embedding(EmbeddingError::NonFinite {
                    context: "document-vector inference".into(),
                }));
            }
            for (x, g) in doc.iter_mut().zip(&grad.center) {
                *x -= cfg.learning_rate * g;
            }
        }
    }
    let normalized = unit_normalize(&doc)
        .ok_or_else(|| ReprError::Degenerate("inferred document vector is zero".into()))?;
    Ok(Some(EntityRepresentation {
        kind: ReprKind::Docvec,
        vectors: vec![normalized],
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{EmbeddingModel, Matrix, Vocabulary};
    use rand::Rng;

    fn trained_like_model(v: usize, dim: usize, seed: u64) -> EmbeddingModel {
        let vocab =
            Vocabulary::from_entries((0..v).map(|i| (format!("t{i}"), 3u64)).collect());
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut input = Matrix::zeros(0, dim);
        let mut output = Matrix::zeros(0, dim);
        for _ in 0..v {
            let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.8..0.8)).collect();
            input.push_row(&a);
            output.push_row(&b);
        }
        EmbeddingModel::from_parts(vocab, input, output).unwrap()
    }

    fn window_of(tokens: &[&str]) -> ContextWindow {
        ContextWindow {
            mention_index: 0,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    #[test]
    fn same_seed_gives_identical_vector() {
        let model = trained_like_model(20, 8, 3);
        let cfg = DocvecConfig {
            seed: 42,
            ..DocvecConfig::default()
        };
        let w = window_of(&["t1", "t2", "t3"]);
        let a = represent_docvec(&w, &model, &cfg).unwrap().unwrap();
        let b = represent_docvec(&w, &model, &cfg).unwrap().unwrap();
        assert_eq!(a, b);
        let c = represent_docvec(
            &w,
            &model,
            &DocvecConfig {
                seed: 43,
                ..cfg
            },
        )
        .unwrap()
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_steps_is_the_normalized_random_init() {
        let model = trained_like_model(10, 6, 5);
        let cfg = DocvecConfig {
            steps: 0,
            seed: 9,
            ..DocvecConfig::default()
        };
        let got = represent_docvec(&window_of(&["t0"]), &model, &cfg)
            .unwrap()
            .unwrap();
        // Recompute the initialization independently.
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let scale = 0.5 / 6.0;
        let init: Vec<f64> = (0..6).map(|_| rng.gen_range(-scale..=scale)).collect();
        let expected = unit_normalize(&init).unwrap();
        assert_eq!(got.vectors[0], expected);
    }

    #[test]
    fn oov_window_is_unrankable() {
        let model = trained_like_model(4, 6, 5);
        let out = represent_docvec(&window_of(&["nope"]), &model, &DocvecConfig::default()).unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn result_is_unit_norm() {
        let model = trained_like_model(20, 8, 3);
        let got = represent_docvec(&window_of(&["t1", "t5", "t7"]), &model, &DocvecConfig::default())
            .unwrap()
            .unwrap();
        let n = crate::embeddings::norm(&got.vectors[0]);
        assert!((n - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inference_moves_doc_toward_target_outputs() {
        // One target token: after enough steps the doc vector should score
        // the target's output vector higher than a random control's.
        let model = trained_like_model(30, 8, 11);
        let cfg = DocvecConfig {
            steps: 100,
            ..DocvecConfig::default()
        };
        let got = represent_docvec(&window_of(&["t3", "t3", "t3"]), &model, &cfg)
            .unwrap()
            .unwrap();
        let doc = &got.vectors[0];
        let target = model.output().row(3);
        let control = model.output().row(17);
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        assert!(dot(doc, target) > dot(doc, control));
    }
}
