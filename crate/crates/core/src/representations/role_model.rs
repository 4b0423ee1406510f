//! Role-token vector learning and role query construction.
//!
//! Role vectors are learned by continuing skip-gram training on the
//! role-substituted stream: ordinary words warm-start from the base model,
//! the ten role tokens start random. A role query is then either the single
//! role-token vector (TV) or that vector expanded with its n most similar
//! tokens by cosine (TV-SWn).

use crate::corpus::{substitute_roles, AnnotatedCorpus, RoleLabel};
use crate::embeddings::{
    count_tokens, train_skipgram, EmbeddingError, EmbeddingModel, TrainConfig, TrainSummary,
};

use super::build::unit_normalize;
use super::ReprError;

/// Continue training over the role-substituted stream. The resulting model
/// contains every base-vocabulary token plus the ten role tokens.
pub fn learn_role_vectors(
    corpus: &AnnotatedCorpus,
    base: &EmbeddingModel,
    cfg: &TrainConfig,
) -> Result<(EmbeddingModel, TrainSummary), EmbeddingError> {
    let substituted = substitute_roles(corpus);
    let recount = count_tokens(&substituted);
    let vocab = base.vocab().extended(&RoleLabel::all_tokens(), &recount);
    let mut model = base.warm_start(vocab, cfg.seed);
    let summary = train_skipgram(&mut model, &substituted, cfg)?;
    Ok((model, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    /// The role-token vector alone.
    TypeVector,
    /// The role-token vector plus its n nearest tokens by cosine.
    Expanded(usize),
}

/// A role posed as a retrieval query: a set of unit-norm vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleQuery {
    pub role: RoleLabel,
    pub kind: QueryKind,
    pub vectors: Vec<Vec<f64>>,
}

pub fn build_role_query(
    model: &EmbeddingModel,
    role: RoleLabel,
    kind: QueryKind,
) -> Result<RoleQuery, ReprError> {
    let token = role.token();
    let base = model
        .vector(&token)
        .ok_or_else(|| ReprError::MissingRoleToken(token.clone()))?;
    let mut vectors = vec![unit_normalize(base)
        .ok_or_else(|| ReprError::Degenerate(format!("{token} has a zero vector")))?];
    if let QueryKind::Expanded(n) = kind {
        for (similar, _) in model.top_n_similar(&token, n)? {
            let v = model.vector(&similar).expect("similar tokens are in vocabulary");
            if let Some(u) = unit_normalize(v) {
                vectors.push(u);
            }
        }
    }
    Ok(RoleQuery {
        role,
        kind,
        vectors,
    })
}
