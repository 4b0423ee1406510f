//! Negative-sampling objective for one (center, output, negatives) triple,
//! and the frequency-powered sampler that draws the negatives.
//!
//! For a center vector `v`, a positive output vector `u_o` and negative
//! output vectors `u_1..u_K` the loss is
//!
//! ```text
//! L = -log s(u_o . v) - sum_k log s(-u_k . v)      s = logistic sigmoid
//! ```
//!
//! Training applies plain SGD steps of the analytic gradient below; the same
//! functions back paragraph-vector inference, which only uses the center
//! gradient.

use rand::Rng;

use super::EmbeddingError;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// log(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn pair_loss(center: &[f64], output: &[f64], negatives: &[&[f64]]) -> f64 {
    let mut loss = softplus(-dot(output, center));
    for neg in negatives {
        loss += softplus(dot(neg, center));
    }
    loss
}

pub struct PairGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub output: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn pair_gradient(center: &[f64], output: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let dim = center.len();
    let s_o = dot(output, center);
    let g_o = sigmoid(s_o) - 1.0;
    let mut loss = softplus(-s_o);
    let mut grad_center = vec![0.0; dim];
    for (gc, &u) in grad_center.iter_mut().zip(output) {
        *gc = g_o * u;
    }
    let grad_output: Vec<f64> = center.iter().map(|&v| g_o * v).collect();
    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let s_k = dot(neg, center);
        let g_k = sigmoid(s_k);
        loss += softplus(s_k);
        for (gc, &u) in grad_center.iter_mut().zip(neg.iter()) {
            *gc += g_k * u;
        }
        grad_negatives.push(center.iter().map(|&v| g_k * v).collect());
    }
    PairGradient {
        loss,
        center: grad_center,
        output: grad_output,
        negatives: grad_negatives,
    }
}

/// Draws vocabulary indices with probability proportional to
/// `count^power`. Zero-count entries are never drawn.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64], power: f64) -> Result<Self, EmbeddingError> {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut acc = 0.0;
        for &c in counts {
            acc += (c as f64).powf(power);
            cumulative.push(acc);
        }
        if acc <= 0.0 || !acc.is_finite() {
            return Err(EmbeddingError::DegenerateSamplingDistribution);
        }
        Ok(NegativeSampler { cumulative })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty by construction");
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}
