//! Deterministic synthetic corpora with planted, recoverable structure.
//!
//! Every mention lives in its own sentence whose context contains a cue
//! phrase for the mention's role (unless suppressed by the noise rate or the
//! first-mention-only switch). Multi-mention rate, majority agreement and
//! first-mention placement are planted so that the statistics module can be
//! checked against known ground truth, and rankers trained on the corpus
//! have a recoverable signal.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{
    AnnotatedCorpus, CorpusError, Document, EntityMention, RoleLabel, Span, Token, ALL_ROLES,
    IN_STUDY_ROLES,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub documents: usize,
    pub entities_per_document: usize,
    /// Role -> cue phrases (space-separated words). A mention's sentence
    /// embeds one of its role's phrases directly before the entity token.
    pub cue_phrases: BTreeMap<RoleLabel, Vec<String>>,
    /// Probability that an entity has more than one mention.
    pub multi_mention_rate: f64,
    /// Multi-mention entities draw their mention count uniformly from
    /// `2..=max_mentions` (at most 10 so that deviant roles stay distinct).
    pub max_mentions: usize,
    /// Target mean fraction of a multi-mention entity's mentions that carry
    /// its majority role.
    pub majority_share_rate: f64,
    /// Target fraction of multi-mention entities whose first mention carries
    /// the majority role.
    pub first_mention_majority_rate: f64,
    /// Probability that a mention's sentence carries no cue phrase.
    pub cue_noise_rate: f64,
    /// Plant cues only in first mentions; later mentions of the same entity
    /// get filler-only context. Exercises document-level context.
    pub cue_on_first_mention_only: bool,
    /// Size of the role-neutral filler vocabulary ("w000", "w001", ...).
    pub filler_vocabulary: usize,
    /// Filler tokens on each side of the cue + entity core.
    pub filler_per_side: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            documents: 100,
            entities_per_document: 6,
            cue_phrases: default_cue_phrases(),
            multi_mention_rate: 0.23,
            max_mentions: 6,
            majority_share_rate: 0.85,
            first_mention_majority_rate: 0.98,
            cue_noise_rate: 0.0,
            cue_on_first_mention_only: false,
            filler_vocabulary: 120,
            filler_per_side: 2,
        }
    }
}

fn default_cue_phrases() -> BTreeMap<RoleLabel, Vec<String>> {
    use RoleLabel::*;
    [
        (PerVictim, vec!["killed victim", "succumbed injuries"]),
        (PerAccused, vec!["arrested suspect", "alleged operative"]),
        (PerOthers, vec!["minister commented", "spokesman said"]),
        (OrgVictim, vec!["convoy ambushed", "office targeted"]),
        (OrgAccused, vec!["claimed responsibility", "militant outfit"]),
        (OrgOthers, vec!["agency condemned", "panel probe"]),
        (LocEvent, vec!["blast occurred", "explosion site"]),
        (LocAccused, vec!["training camp", "hideout raided"]),
        (LocVictim, vec!["tourists visiting", "pilgrims visiting"]),
        (LocOthers, vec!["returned capital", "flew toward"]),
    ]
    .into_iter()
    .map(|(r, v)| (r, v.into_iter().map(String::from).collect()))
    .collect()
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let rates = [
            ("multi_mention_rate", self.multi_mention_rate),
            ("majority_share_rate", self.majority_share_rate),
            ("first_mention_majority_rate", self.first_mention_majority_rate),
            ("cue_noise_rate", self.cue_noise_rate),
        ];
        for (name, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return Err(CorpusError::InvalidSpec(format!(
                    "{name} must be in [0,1], got {v}"
                )));
            }
        }
        if self.documents == 0 || self.entities_per_document == 0 {
            return Err(CorpusError::InvalidSpec(
                "documents and entities_per_document must be positive".into(),
            ));
        }
        if !(2..=10).contains(&self.max_mentions) {
            return Err(CorpusError::InvalidSpec(
                "max_mentions must be in 2..=10".into(),
            ));
        }
        if self.filler_vocabulary == 0 {
            return Err(CorpusError::InvalidSpec(
                "filler_vocabulary must be positive".into(),
            ));
        }
        for role in ALL_ROLES {
            if self.cue_phrases.get(&role).is_none_or(|v| v.is_empty()) {
                return Err(CorpusError::InvalidSpec(format!(
                    "cue_phrases missing role {role}"
                )));
            }
        }
        Ok(())
    }
}

/// Realized (not just configured) rates, recorded during generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub entity_count: usize,
    pub mention_count: usize,
    pub multi_mention_fraction: f64,
    pub majority_share_multi: Option<f64>,
    pub first_mention_majority_multi: Option<f64>,
    /// Fraction of mentions whose own sentence carries their role's cue.
    pub cued_mention_fraction: f64,
}

struct EntityPlan {
    name: String,
    roles: Vec<RoleLabel>, // one per mention, in document order
}

pub fn generate_synthetic(
    seed: u64,
    spec: &SyntheticSpec,
) -> Result<(AnnotatedCorpus, GroundTruth), CorpusError> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    // Pass 1: per-entity mention counts and majority-mention counts. The
    // fractional part of `m * majority_share_rate` is distributed by an
    // error accumulator instead of per-entity coin flips, so the realized
    // mean share tracks the planted rate to O(1/entities).
    // (doc, entity, m, k, primary)
    let mut plans: Vec<(usize, usize, usize, usize, RoleLabel)> = Vec::new();
    let mut share_error = 0.0;
    for d in 0..spec.documents {
        for e in 0..spec.entities_per_document {
            let primary = if e < IN_STUDY_ROLES.len() {
                IN_STUDY_ROLES[e]
            } else {
                ALL_ROLES[rng.gen_range(0..ALL_ROLES.len())]
            };
            let m = if rng.gen::<f64>() < spec.multi_mention_rate {
                rng.gen_range(2..=spec.max_mentions)
            } else {
                1
            };
            let k = if m == 1 {
                1
            } else {
                let t = m as f64 * spec.majority_share_rate;
                let mut k = t.floor() as usize;
                share_error += t.fract();
                if share_error >= 1.0 {
                    k += 1;
                    share_error -= 1.0;
                }
                k.clamp(1, m)
            };
            plans.push((d, e, m, k, primary));
        }
    }

    // First-mention violations are budgeted globally so the realized rate
    // tracks the configured one. Only entities with 2 <= k < m can violate:
    // with distinct deviant roles, k = 1 ties resolve to the first mention's
    // role and k = m has no deviants at all.
    let multi_count = plans.iter().filter(|p| p.2 >= 2).count();
    let mut flippable: Vec<usize> = plans
        .iter()
        .enumerate()
        .filter(|(_, p)| p.2 >= 2 && p.3 >= 2 && p.3 < p.2)
        .map(|(i, _)| i)
        .collect();
    flippable.shuffle(&mut rng);
    let target_violations =
        ((1.0 - spec.first_mention_majority_rate) * multi_count as f64).round() as usize;
    let violations: std::collections::HashSet<usize> = flippable
        .into_iter()
        .take(target_violations)
        .collect();

    // Pass 2: role sequences per entity.
    let mut entities: Vec<EntityPlan> = Vec::with_capacity(plans.len());
    for (i, &(d, e, m, k, primary)) in plans.iter().enumerate() {
        let alternatives: Vec<RoleLabel> =
            ALL_ROLES.iter().copied().filter(|r| *r != primary).collect();
        let start = rng.gen_range(0..alternatives.len());
        let deviants: Vec<RoleLabel> = (0..m - k)
            .map(|j| alternatives[(start + j) % alternatives.len()])
            .collect();
        let mut rest: Vec<RoleLabel>;
        let first: RoleLabel;
        if violations.contains(&i) {
            first = deviants[0];
            rest = deviants[1..].to_vec();
            rest.extend(std::iter::repeat_n(primary, k));
        } else {
            first = primary;
            rest = deviants.clone();
            rest.extend(std::iter::repeat_n(primary, k - 1));
        }
        rest.shuffle(&mut rng);
        let mut roles = vec![first];
        roles.extend(rest);
        entities.push(EntityPlan {
            name: format!("ent{d:03}x{e}"),
            roles,
        });
    }

    // Pass 3: materialize documents. Mentions are laid out round-robin by
    // ordinal so entities interleave while each entity's own mentions stay
    // in order.
    let epd = spec.entities_per_document;
    let filler = |rng: &mut ChaCha20Rng| format!("w{:03}", rng.gen_range(0..spec.filler_vocabulary));
    let mut documents = Vec::with_capacity(spec.documents);
    let mut cued_mentions = 0usize;
    let mut total_mentions = 0usize;
    for d in 0..spec.documents {
        let doc_entities = &entities[d * epd..(d + 1) * epd];
        let mut sentences: Vec<Vec<Token>> = Vec::new();
        let mut mentions: Vec<EntityMention> = Vec::new();
        let max_ord = doc_entities.iter().map(|e| e.roles.len()).max().unwrap_or(0);
        for ordinal in 0..max_ord {
            for ent in doc_entities {
                let Some(&role) = ent.roles.get(ordinal) else {
                    continue;
                };
                let suppressed = spec.cue_on_first_mention_only && ordinal > 0;
                let cued = !suppressed && rng.gen::<f64>() >= spec.cue_noise_rate;
                let mut words: Vec<String> = Vec::new();
                for _ in 0..spec.filler_per_side {
                    words.push(filler(&mut rng));
                }
                if cued {
                    let phrases = &spec.cue_phrases[&role];
                    let phrase = &phrases[rng.gen_range(0..phrases.len())];
                    words.extend(phrase.split_whitespace().map(String::from));
                    cued_mentions += 1;
                } else {
                    words.push(filler(&mut rng));
                }
                let entity_pos = words.len();
                words.push(ent.name.clone());
                for _ in 0..spec.filler_per_side {
                    words.push(filler(&mut rng));
                }
                let si = sentences.len();
                sentences.push(words.into_iter().map(Token::new).collect());
                mentions.push(EntityMention {
                    entity_key: ent.name.clone(),
                    span: Span {
                        sentence: si,
                        start: entity_pos,
                        end: entity_pos,
                    },
                    role,
                    mention_ordinal: 0,
                });
                total_mentions += 1;
            }
        }
        documents.push(Document {
            id: format!("doc{d:04}"),
            sentences,
            mentions,
        });
    }

    let corpus = AnnotatedCorpus::new(documents)?;

    // Realized rates straight from the plans.
    let multi: Vec<&EntityPlan> = entities.iter().filter(|e| e.roles.len() >= 2).collect();
    let share = |e: &EntityPlan| {
        let (_, count) = super::stats::majority_role(&e.roles);
        count as f64 / e.roles.len() as f64
    };
    let first_maj = |e: &EntityPlan| {
        let (role, _) = super::stats::majority_role(&e.roles);
        e.roles[0] == role
    };
    let truth = GroundTruth {
        seed,
        entity_count: entities.len(),
        mention_count: total_mentions,
        multi_mention_fraction: multi.len() as f64 / entities.len() as f64,
        majority_share_multi: (!multi.is_empty())
            .then(|| multi.iter().map(|e| share(e)).sum::<f64>() / multi.len() as f64),
        first_mention_majority_multi: (!multi.is_empty()).then(|| {
            multi.iter().filter(|e| first_maj(e)).count() as f64 / multi.len() as f64
        }),
        cued_mention_fraction: if total_mentions == 0 {
            0.0
        } else {
            cued_mentions as f64 / total_mentions as f64
        },
    };
    Ok((corpus, truth))
}
