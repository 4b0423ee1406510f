//! Document-level mention statistics: how often entities have multiple
//! mentions, how strongly mentions of one entity agree on a single role, and
//! how often the first mention already carries that majority role.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnnotatedCorpus, RoleLabel};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BucketStat {
    pub entities: usize,
    /// Mean fraction of mentions carrying the entity's majority role.
    pub majority_share: f64,
    /// Fraction of entities whose first mention carries the majority role.
    pub first_mention_majority: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatisticsReport {
    pub entity_count: usize,
    pub multi_mention_entity_count: usize,
    pub multi_mention_fraction: f64,
    /// mention count per entity -> number of entities.
    pub mention_count_histogram: BTreeMap<usize, usize>,
    /// Singletons count as 100% on both assumptions; the `_multi` variants
    /// exclude them.
    pub majority_share_all: f64,
    pub majority_share_multi: Option<f64>,
    pub first_mention_majority_all: f64,
    pub first_mention_majority_multi: Option<f64>,
    /// Buckets keyed by mention count.
    pub by_mention_count: BTreeMap<usize, BucketStat>,
    /// Keyed by the entity's majority role: how often its first mention
    /// already carries that role.
    pub first_mention_majority_by_role: BTreeMap<RoleLabel, f64>,
}

impl StatisticsReport {
    /// `mention_count,entities` rows.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("mention_count,entities\n");
        for (count, entities) in &self.mention_count_histogram {
            out.push_str(&format!("{count},{entities}\n"));
        }
        out
    }

    /// `mention_count,entities,majority_share,first_mention_majority` rows.
    pub fn assumptions_csv(&self) -> String {
        let mut out = String::from("mention_count,entities,majority_share,first_mention_majority\n");
        for (count, stat) in &self.by_mention_count {
            out.push_str(&format!(
                "{count},{},{},{}\n",
                stat.entities, stat.majority_share, stat.first_mention_majority
            ));
        }
        out
    }

    /// `role,first_mention_majority` rows.
    pub fn positional_by_role_csv(&self) -> String {
        let mut out = String::from("majority_role,first_mention_majority\n");
        for (role, frac) in &self.first_mention_majority_by_role {
            out.push_str(&format!("{role},{frac}\n"));
        }
        out
    }
}

/// Majority ties break toward the earliest-occurring role of the entity.
pub(crate) fn majority_role(roles: &[RoleLabel]) -> (RoleLabel, usize) {
    let mut counts: Vec<(RoleLabel, usize)> = Vec::new();
    for &r in roles {
        match counts.iter_mut().find(|(role, _)| *role == r) {
            Some((_, c)) => *c += 1,
            None => counts.push((r, 1)),
        }
    }
    // counts is in first-occurrence order; a stable max-scan keeps the
    // earliest role on ties.
    let mut best = counts[0];
    for &(role, c) in &counts[1..] {
        if c > best.1 {
            best = (role, c);
        }
    }
    best
}

pub fn mention_statistics(corpus: &AnnotatedCorpus) -> StatisticsReport {
    // (mention count, majority share, first-mention-majority, majority role)
    let mut entities: Vec<(usize, f64, bool, RoleLabel)> = Vec::new();
    for doc in corpus.documents() {
        let mut per_entity: BTreeMap<&str, Vec<RoleLabel>> = BTreeMap::new();
        // Mentions are in document order, so pushed roles are ordered too.
        for m in &doc.mentions {
            per_entity
                .entry(m.entity_key.as_str())
                .or_default()
                .push(m.role);
        }
        for roles in per_entity.values() {
            let (majority, count) = majority_role(roles);
            entities.push((
                roles.len(),
                count as f64 / roles.len() as f64,
                roles[0] == majority,
                majority,
            ));
        }
    }

    let entity_count = entities.len();
    let multi: Vec<&(usize, f64, bool, RoleLabel)> =
        entities.iter().filter(|e| e.0 >= 2).collect();

    let mean = |it: &mut dyn Iterator<Item = f64>| -> Option<f64> {
        let (mut sum, mut n) = (0.0, 0usize);
        for v in it {
            sum += v;
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    };

    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut buckets: BTreeMap<usize, Vec<(f64, bool)>> = BTreeMap::new();
    let mut by_role: BTreeMap<RoleLabel, Vec<bool>> = BTreeMap::new();
    for &(m, share, first, role) in &entities {
        *histogram.entry(m).or_insert(0) += 1;
        buckets.entry(m).or_default().push((share, first));
        by_role.entry(role).or_default().push(first);
    }

    StatisticsReport {
        entity_count,
        multi_mention_entity_count: multi.len(),
        multi_mention_fraction: if entity_count == 0 {
            0.0
        } else {
            multi.len() as f64 / entity_count as f64
        },
        mention_count_histogram: histogram,
        majority_share_all: mean(&mut entities.iter().map(|e| e.1)).unwrap_or(0.0),
        majority_share_multi: mean(&mut multi.iter().map(|e| e.1)),
        first_mention_majority_all: mean(&mut entities.iter().map(|e| e.2 as u8 as f64))
            .unwrap_or(0.0),
        first_mention_majority_multi: mean(&mut multi.iter().map(|e| e.2 as u8 as f64)),
        by_mention_count: buckets
            .into_iter()
            .map(|(m, v)| {
                let n = v.len();
                (
                    m,
                    BucketStat {
                        entities: n,
                        majority_share: v.iter().map(|(s, _)| s).sum::<f64>() / n as f64,
                        first_mention_majority: v.iter().filter(|(_, f)| *f).count() as f64
                            / n as f64,
                    },
                )
            })
            .collect(),
        first_mention_majority_by_role: by_role
            .into_iter()
            .map(|(r, v)| {
                (
                    r,
                    v.iter().filter(|f| **f).count() as f64 / v.len() as f64,
                )
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, EntityMention, Span, Token};

    /// Build a one-document corpus where entity `i` has `roles[i]` as its
    /// mention roles, one mention per sentence.
    fn corpus_of(role_seqs: &[Vec<RoleLabel>]) -> AnnotatedCorpus {
        let mut sentences = Vec::new();
        let mut mentions = Vec::new();
        for (ei, roles) in role_seqs.iter().enumerate() {
            for &role in roles {
                let si = sentences.len();
                sentences.push(vec![Token::new(format!("ent{ei}")), Token::new("x")]);
                mentions.push(EntityMention {
                    entity_key: format!("e{ei}"),
                    span: Span {
                        sentence: si,
                        start: 0,
                        end: 0,
                    },
                    role,
                    mention_ordinal: 0,
                });
            }
        }
        AnnotatedCorpus::new(vec![Document {
            id: "d".into(),
            sentences,
            mentions,
        }])
        .unwrap()
    }

    #[test]
    fn majority_share_two_of_three() {
        use RoleLabel::*;
        let report = mention_statistics(&corpus_of(&[vec![PerAccused, PerAccused, PerOthers]]));
        assert!((report.majority_share_all - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.first_mention_majority_all, 1.0);
    }

    #[test]
    fn singleton_only_corpus() {
        use RoleLabel::*;
        let report = mention_statistics(&corpus_of(&[vec![LocEvent], vec![PerVictim]]));
        assert_eq!(report.multi_mention_fraction, 0.0);
        assert_eq!(report.majority_share_all, 1.0);
        assert_eq!(report.majority_share_multi, None);
        assert_eq!(report.first_mention_majority_all, 1.0);
    }

    #[test]
    fn ties_break_to_earliest_role() {
        use RoleLabel::*;
        // [B, A]: tie 1-1, earliest is B, so first mention has the majority.
        let report = mention_statistics(&corpus_of(&[vec![OrgVictim, OrgAccused]]));
        assert_eq!(report.first_mention_majority_all, 1.0);
        assert!((report.majority_share_all - 0.5).abs() < 1e-12);
    }

    #[test]
    fn all_equal_roles_give_full_agreement() {
        use RoleLabel::*;
        let report = mention_statistics(&corpus_of(&[
            vec![LocEvent, LocEvent, LocEvent],
            vec![PerAccused, PerAccused],
        ]));
        assert_eq!(report.majority_share_all, 1.0);
        assert_eq!(report.first_mention_majority_all, 1.0);
        assert_eq!(report.multi_mention_fraction, 1.0);
        assert_eq!(report.mention_count_histogram.get(&3), Some(&1));
        assert_eq!(report.mention_count_histogram.get(&2), Some(&1));
    }

    #[test]
    fn entity_keys_are_document_scoped() {
        use RoleLabel::*;
        // The same key in two documents is two entities.
        let doc = |id: &str| Document {
            id: id.into(),
            sentences: vec![vec![Token::new("ent"), Token::new("x")]],
            mentions: vec![EntityMention {
                entity_key: "shared".into(),
                span: Span {
                    sentence: 0,
                    start: 0,
                    end: 0,
                },
                role: PerVictim,
                mention_ordinal: 0,
            }],
        };
        let corpus = AnnotatedCorpus::new(vec![doc("a"), doc("b")]).unwrap();
        let report = mention_statistics(&corpus);
        assert_eq!(report.entity_count, 2);
        assert_eq!(report.multi_mention_fraction, 0.0);
    }
}
