//! Stochastic training loop over (center, context) pairs.
//!
//! The default single-threaded mode is fully deterministic for a fixed seed.
//! The opt-in multi-threaded mode shards sentences across threads and lets
//! them update shared vectors without synchronization (last write wins per
//! scalar, staged through atomic bit stores so no value is ever torn); it
//! keeps the probe-loss contract but forfeits bitwise reproducibility.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::sgns::{pair_gradient, pair_loss, NegativeSampler};
use super::{EmbeddingError, EmbeddingModel};

const PROBE_PAIRS: usize = 1000;
const LR_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    /// Context window half-width: pairs are formed within this many tokens.
    pub window_radius: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    /// Initial learning rate; decays linearly to a small floor.
    pub learning_rate: f64,
    /// Frequent-word subsampling threshold; <= 0 disables subsampling.
    pub subsample_threshold: f64,
    /// Negative-sampling distribution is frequency^unigram_power.
    pub unigram_power: f64,
    pub min_count: u64,
    pub seed: u64,
    /// 1 = deterministic; > 1 shards sentences across unsynchronized threads.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            window_radius: 5,
            negative_samples: 5,
            epochs: 5,
            learning_rate: 0.025,
            subsample_threshold: 1e-3,
            unigram_power: 0.75,
            min_count: 2,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.window_radius < 1 {
            return Err(EmbeddingError::InvalidConfig("window_radius must be >= 1".into()));
        }
        if self.negative_samples < 1 {
            return Err(EmbeddingError::InvalidConfig("negative_samples must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 || self.learning_rate.is_nan() {
            return Err(EmbeddingError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.dim == 0 {
            return Err(EmbeddingError::InvalidConfig("dim must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(EmbeddingError::InvalidConfig("threads must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    /// Mean loss over a fixed probe batch, evaluated before training and
    /// after every epoch (`epochs + 1` entries).
    pub probe_losses: Vec<f64>,
    pub pairs_trained: u64,
}

/// A frozen batch of (center, output, negatives) index triples used to
/// track loss across epochs without the noise of resampling.
struct ProbeBatch {
    triples: Vec<(usize, usize, Vec<usize>)>,
}

impl ProbeBatch {
    fn build(
        sequences: &[Vec<usize>],
        window: usize,
        negatives: usize,
        sampler: &NegativeSampler,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut triples = Vec::new();
        'outer: for seq in sequences {
            for (i, &center) in seq.iter().enumerate() {
                let lo = i.saturating_sub(window);
                let hi = (i + window).min(seq.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let output = seq[j];
                    let negs = draw_negatives(sampler, &mut rng, negatives, output);
                    triples.push((center, output, negs));
                    if triples.len() >= PROBE_PAIRS {
                        break 'outer;
                    }
                }
            }
        }
        ProbeBatch { triples }
    }

    fn mean_loss(&self, model: &EmbeddingModel) -> f64 {
        if self.triples.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        for (c, o, negs) in &self.triples {
            let neg_rows: Vec<&[f64]> = negs.iter().map(|&k| model.output().row(k)).collect();
            total += pair_loss(model.input().row(*c), model.output().row(*o), &neg_rows);
        }
        total / self.triples.len() as f64
    }
}

/// Negatives equal to the positive output are skipped rather than redrawn,
/// so a pair may train against fewer than the configured count.
pub(crate) fn draw_negatives<R: Rng>(
    sampler: &NegativeSampler,
    rng: &mut R,
    count: usize,
    output: usize,
) -> Vec<usize> {
    let mut negs = Vec::with_capacity(count);
    for _ in 0..count {
        let k = sampler.sample(rng);
        if k != output {
            negs.push(k);
        }
    }
    negs
}

fn keep_probability(count: u64, total: u64, threshold: f64) -> f64 {
    if threshold <= 0.0 || count == 0 {
        return 1.0;
    }
    let f = count as f64 / total as f64;
    ((threshold / f).sqrt() + threshold / f).min(1.0)
}

/// Minimize the negative-sampling objective by SGD over (center, context)
/// pairs within the window radius. The vocabulary must have been built over
/// the same stream. Aborts with diagnostics if any update goes non-finite.
pub fn train_skipgram(
    model: &mut EmbeddingModel,
    sentences: &[Vec<String>],
    cfg: &TrainConfig,
) -> Result<TrainSummary, EmbeddingError> {
    cfg.validate()?;
    let vocab = model.vocab().clone();
    let sampler = NegativeSampler::new(vocab.counts(), cfg.unigram_power)?;
    let sequences: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.get(t)).collect())
        .collect();

    let probe = ProbeBatch::build(
        &sequences,
        cfg.window_radius,
        cfg.negative_samples,
        &sampler,
        cfg.seed,
    );
    let mut probe_losses = vec![probe.mean_loss(model)];

    let total_tokens: u64 = sequences.iter().map(|s| s.len() as u64).sum();
    let schedule_total = (total_tokens * cfg.epochs as u64).max(1);

    let pairs = if cfg.threads <= 1 {
        train_single_threaded(model, &sequences, cfg, &sampler, schedule_total, &mut probe_losses, &probe)?
    } else {
        train_parallel(model, &sequences, cfg, &sampler, schedule_total, &mut probe_losses, &probe)?
    };

    Ok(TrainSummary {
        probe_losses,
        pairs_trained: pairs,
    })
}

fn train_single_threaded(
    model: &mut EmbeddingModel,
    sequences: &[Vec<usize>],
    cfg: &TrainConfig,
    sampler: &NegativeSampler,
    schedule_total: u64,
    probe_losses: &mut Vec<f64>,
    probe: &ProbeBatch,
) -> Result<u64, EmbeddingError> {
    let total_count = model.vocab().total_count();
    let counts = model.vocab().counts().to_vec();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut processed: u64 = 0;
    let mut pairs: u64 = 0;
    let mut kept: Vec<usize> = Vec::new();

    for epoch in 0..cfg.epochs {
        for seq in sequences {
            kept.clear();
            for &w in seq {
                processed += 1;
                let p = keep_probability(counts[w], total_count, cfg.subsample_threshold);
                if p >= 1.0 || rng.gen::<f64>() < p {
                    kept.push(w);
                }
            }
            let lr = cfg.learning_rate
                * (1.0 - processed as f64 / schedule_total as f64).max(LR_FLOOR);
            for i in 0..kept.len() {
                let center = kept[i];
                let lo = i.saturating_sub(cfg.window_radius);
                let hi = (i + cfg.window_radius).min(kept.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let output = kept[j];
                    let negs = draw_negatives(sampler, &mut rng, cfg.negative_samples, output);
                    let (input, out_table) = model.tables_mut();
                    let grad = {
                        let neg_rows: Vec<&[f64]> =
                            negs.iter().map(|&k| out_table.row(k)).collect();
                        pair_gradient(input.row(center), out_table.row(output), &neg_rows)
                    };
                    if !grad.loss.is_finite() {
                        return Err(EmbeddingError::NonFinite {
                            context: format!("skip-gram update (epoch {epoch}, pair {pairs})"),
                        });
                    }
                    apply(input.row_mut(center), &grad.center, lr);
                    apply(out_table.row_mut(output), &grad.output, lr);
                    for (k, gneg) in negs.iter().zip(&grad.negatives) {
                        apply(out_table.row_mut(*k), gneg, lr);
                    }
                    pairs += 1;
                }
            }
        }
        probe_losses.push(probe.mean_loss(model));
    }
    Ok(pairs)
}

fn apply(row: &mut [f64], grad: &[f64], lr: f64) {
    for (x, g) in row.iter_mut().zip(grad) {
        *x -= lr * g;
    }
}

/// Hogwild-style sharded training. Vector tables are staged as atomic bit
/// cells; concurrent updates race by contract (last write wins).
fn train_parallel(
    model: &mut EmbeddingModel,
    sequences: &[Vec<usize>],
    cfg: &TrainConfig,
    sampler: &NegativeSampler,
    schedule_total: u64,
    probe_losses: &mut Vec<f64>,
    probe: &ProbeBatch,
) -> Result<u64, EmbeddingError> {
    let dim = model.dim();
    let total_count = model.vocab().total_count();
    let counts = model.vocab().counts().to_vec();
    let input_cells: Vec<AtomicU64> = model
        .input()
        .data()
        .iter()
        .map(|v| AtomicU64::new(v.to_bits()))
        .collect();
    let output_cells: Vec<AtomicU64> = model
        .output()
        .data()
        .iter()
        .map(|v| AtomicU64::new(v.to_bits()))
        .collect();
    let processed = AtomicUsize::new(0);
    let pairs = AtomicU64::new(0);
    let nonfinite = AtomicUsize::new(0);

    let load_row = |cells: &[AtomicU64], r: usize| -> Vec<f64> {
        cells[r * dim..(r + 1) * dim]
            .iter()
            .map(|c| f64::from_bits(c.load(Ordering::Relaxed)))
            .collect()
    };
    let store_update = |cells: &[AtomicU64], r: usize, grad: &[f64], lr: f64| {
        for (cell, g) in cells[r * dim..(r + 1) * dim].iter().zip(grad) {
            let v = f64::from_bits(cell.load(Ordering::Relaxed)) - lr * g;
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    };

    for _epoch in 0..cfg.epochs {
        std::thread::scope(|scope| {
            for tid in 0..cfg.threads {
                let shard: Vec<&Vec<usize>> = sequences
                    .iter()
                    .skip(tid)
                    .step_by(cfg.threads)
                    .collect();
                let (input_cells, output_cells) = (&input_cells, &output_cells);
                let (processed, pairs, nonfinite) = (&processed, &pairs, &nonfinite);
                let counts = &counts;
                scope.spawn(move || {
                    let mut rng =
                        ChaCha20Rng::seed_from_u64(cfg.seed.wrapping_add(1 + tid as u64));
                    let mut kept: Vec<usize> = Vec::new();
                    for seq in shard {
                        kept.clear();
                        for &w in seq {
                            processed.fetch_add(1, Ordering::Relaxed);
                            let p =
                                keep_probability(counts[w], total_count, cfg.subsample_threshold);
                            if p >= 1.0 || rng.gen::<f64>() < p {
                                kept.push(w);
                            }
                        }
                        let done = processed.load(Ordering::Relaxed) as f64;
                        let lr = cfg.learning_rate
                            * (1.0 - done / schedule_total as f64).max(LR_FLOOR);
                        for i in 0..kept.len() {
                            let center = kept[i];
                            let lo = i.saturating_sub(cfg.window_radius);
                            let hi = (i + cfg.window_radius).min(kept.len() - 1);
                            for j in lo..=hi {
                                if j == i {
                                    continue;
                                }
                                let output = kept[j];
                                let negs = draw_negatives(
                                    sampler,
                                    &mut rng,
                                    cfg.negative_samples,
                                    output,
                                );
                                let center_row = load_row(input_cells, center);
                                let output_row = load_row(output_cells, output);
                                let neg_rows: Vec<Vec<f64>> =
                                    negs.iter().map(|&k| load_row(output_cells, k)).collect();
                                let neg_refs: Vec<&[f64]> =
                                    neg_rows.iter().map(|v| v.as_slice()).collect();
                                let grad = pair_gradient(&center_row, &output_row, &neg_refs);
                                if !grad.loss.is_finite() {
                                    nonfinite.fetch_add(1, Ordering::Relaxed);
                                    return;
                                }
                                store_update(input_cells, center, &grad.center, lr);
                                store_update(output_cells, output, &grad.output, lr);
                                for (k, gneg) in negs.iter().zip(&grad.negatives) {
                                    store_update(output_cells, *k, gneg, lr);
                                }
                                pairs.fetch_add(1, Ordering::Relaxed);
                            }
                        }
                    }
                });
            }
        });
        if nonfinite.load(Ordering::Relaxed) > 0 {
            return Err(EmbeddingError::NonFinite {
                context: "parallel skip-gram update".into(),
            });
        }
        // Snapshot for the probe evaluation.
        let (input, out_table) = model.tables_mut();
        for (x, cell) in input.data_mut().iter_mut().zip(&input_cells) {
            *x = f64::from_bits(cell.load(Ordering::Relaxed));
        }
        for (x, cell) in out_table.data_mut().iter_mut().zip(&output_cells) {
            *x = f64::from_bits(cell.load(Ordering::Relaxed));
        }
        probe_losses.push(probe.mean_loss(model));
    }
    Ok(pairs.load(Ordering::Relaxed))
}
