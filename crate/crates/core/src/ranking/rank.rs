use std::collections::HashMap;

use crate::corpus::{Document, RoleLabel};
use crate::representations::{EntityRepresentation, RoleQuery};

use super::{group_average_similarity, RankingError, VectorSet};

/// One entity in a ranked list: the best-scoring mention represents the
/// entity after deduplication. Unrankable entities (no mention had a usable
/// representation) carry a sentinel score and sort last.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedItem {
    pub entity_key: String,
    /// Index into the document's mentions of the kept mention.
    pub mention_index: usize,
    pub score: f64,
    pub rankable: bool,
    /// Whether any mention of this entity carries the query role.
    pub relevant: bool,
}

/// Deduplicated ranking of one document's entities against one role query.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub document_id: String,
    pub role: RoleLabel,
    pub items: Vec<RankedItem>,
}

impl RankedList {
    pub fn relevance(&self) -> Vec<bool> {
        self.items.iter().map(|i| i.relevant).collect()
    }

    pub fn relevant_count(&self) -> usize {
        self.items.iter().filter(|i| i.relevant).count()
    }

    pub fn unrankable_count(&self) -> usize {
        self.items.iter().filter(|i| !i.rankable).count()
    }
}

/// Score every mention with the group-average similarity, keep the best
/// mention per entity key, and sort descending (ties by the kept mention's
/// document position). Mentions without representations are appended last
/// with a sentinel score and flagged.
pub fn rank_entities(
    doc: &Document,
    representations: &[Option<EntityRepresentation>],
    query: &RoleQuery,
) -> Result<RankedList, RankingError> {
    assert_eq!(
        doc.mentions.len(),
        representations.len(),
        "representations must align with the document's mentions"
    );
    let query_set = VectorSet::new(query.vectors.clone())?;

    struct Candidate {
        best: Option<(f64, usize)>,
        first_mention: usize,
        relevant: bool,
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_key: HashMap<String, Candidate> = HashMap::new();
    for (mi, mention) in doc.mentions.iter().enumerate() {
        let score = match &representations[mi] {
            Some(repr) => Some(group_average_similarity(
                &VectorSet::new(repr.vectors.clone())?,
                &query_set,
            )),
            None => None,
        };
        let entry = by_key
            .entry(mention.entity_key.clone())
            .or_insert_with(|| {
                order.push(mention.entity_key.clone());
                Candidate {
                    best: None,
                    first_mention: mi,
                    relevant: false,
                }
            });
        entry.relevant |= mention.role == query.role;
        if let Some(s) = score {
            let better = match entry.best {
                None => true,
                Some((current, _)) => s > current,
            };
            if better {
                entry.best = Some((s, mi));
            }
        }
    }

    let mut rankable: Vec<RankedItem> = Vec::new();
    let mut unrankable: Vec<RankedItem> = Vec::new();
    for key in order {
        let c = &by_key[&key];
        match c.best {
            Some((score, mi)) => rankable.push(RankedItem {
                entity_key: key,
                mention_index: mi,
                score,
                rankable: true,
                relevant: c.relevant,
            }),
            None => unrankable.push(RankedItem {
                entity_key: key,
                mention_index: c.first_mention,
                score: f64::NEG_INFINITY,
                rankable: false,
                relevant: c.relevant,
            }),
        }
    }
    rankable.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.mention_index.cmp(&b.mention_index))
    });
    unrankable.sort_by_key(|i| i.mention_index);
    rankable.extend(unrankable);
    Ok(RankedList {
        document_id: doc.id.clone(),
        role: query.role,
        items: rankable,
    })
}
