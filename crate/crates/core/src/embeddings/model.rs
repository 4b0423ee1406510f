use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{EmbeddingError, Vocabulary};

/// Dense row-major matrix of f64; one row per vocabulary entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    /// Rows filled uniformly from `[-0.5/dim, 0.5/dim]`, the usual skip-gram
    /// input initialization.
    pub fn uniform(rows: usize, dim: usize, rng: &mut ChaCha20Rng) -> Self {
        let scale = 0.5 / dim as f64;
        Matrix {
            dim,
            data: (0..rows * dim).map(|_| rng.gen_range(-scale..=scale)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim);
        self.data.extend_from_slice(row);
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Skip-gram embedding model: a vocabulary plus input (word) and output
/// (context) vector tables of equal dimension. After role substitution
/// training the table also hosts role-token vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    vocab: Vocabulary,
    input: Matrix,
    output: Matrix,
}

impl EmbeddingModel {
    /// Fresh model: random input rows, zero output rows.
    pub fn new(vocab: Vocabulary, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rows = vocab.len();
        EmbeddingModel {
            vocab,
            input: Matrix::uniform(rows, dim, &mut rng),
            output: Matrix::zeros(rows, dim),
        }
    }

    pub fn from_parts(vocab: Vocabulary, input: Matrix, output: Matrix) -> Result<Self, EmbeddingError> {
        if input.dim() != output.dim()
            || input.rows() != vocab.len()
            || output.rows() != vocab.len()
        {
            return Err(EmbeddingError::ShapeMismatch);
        }
        if !input.is_finite() || !output.is_finite() {
            return Err(EmbeddingError::NonFinite {
                context: "model construction".into(),
            });
        }
        Ok(EmbeddingModel {
            vocab,
            input,
            output,
        })
    }

    /// Model over `vocab` reusing this model's rows for shared tokens; new
    /// tokens get random input rows and zero output rows, drawn in
    /// vocabulary order for determinism.
    pub fn warm_start(&self, vocab: Vocabulary, seed: u64) -> EmbeddingModel {
        let dim = self.dim();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let scale = 0.5 / dim as f64;
        let mut input = Matrix::zeros(0, dim);
        let mut output = Matrix::zeros(0, dim);
        for tok in vocab.tokens() {
            match self.vocab.get(tok) {
                Some(old) => {
                    input.push_row(self.input.row(old));
                    output.push_row(self.output.row(old));
                }
                None => {
                    let fresh: Vec<f64> =
                        (0..dim).map(|_| rng.gen_range(-scale..=scale)).collect();
                    input.push_row(&fresh);
                    output.push_row(&vec![0.0; dim]);
                }
            }
        }
        EmbeddingModel {
            vocab,
            input,
            output,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub(crate) fn tables_mut(&mut self) -> (&mut Matrix, &mut Matrix) {
        (&mut self.input, &mut self.output)
    }

    /// Input vector for a token, if in vocabulary.
    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.get(token).map(|i| self.input.row(i))
    }

    /// Tokens ranked by descending cosine against the query's input vector.
    /// The query itself is excluded; ties break by vocabulary index.
    pub fn top_n_similar(&self, query: &str, n: usize) -> Result<Vec<(String, f64)>, EmbeddingError> {
        let qi = self
            .vocab
            .get(query)
            .ok_or_else(|| EmbeddingError::OutOfVocabulary(query.to_string()))?;
        let q = self.input.row(qi);
        let qn = norm(q);
        let mut scored: Vec<(usize, f64)> = (0..self.vocab.len())
            .filter(|&i| i != qi)
            .map(|i| (i, cosine_with_norm(q, qn, self.input.row(i))))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(scored
            .into_iter()
            .take(n)
            .map(|(i, c)| (self.vocab.token(i).to_string(), c))
            .collect())
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn cosine_with_norm(a: &[f64], an: f64, b: &[f64]) -> f64 {
    let bn = norm(b);
    if an == 0.0 || bn == 0.0 {
        return 0.0;
    }
    super::sgns::dot(a, b) / (an * bn)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    cosine_with_norm(a, norm(a), b)
}
