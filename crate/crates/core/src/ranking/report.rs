use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::RoleLabel;

use super::{average_precision_at_k, map_curve, RankedList, RankingError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryResult {
    pub document_id: String,
    pub role: RoleLabel,
    /// AP@1..=k_max; `None` marks an excluded (zero-relevant) query.
    pub ap: Option<Vec<f64>>,
    pub entities: usize,
    pub relevant: usize,
    pub unrankable: usize,
}

/// Evaluation of a batch of (document, role) queries: the mAP@K curve,
/// per-role breakdown, and per-query detail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankingReport {
    pub k_max: usize,
    /// `map[k-1]` is mAP@k over all included queries.
    pub map: Vec<f64>,
    pub included_queries: usize,
    pub excluded_queries: usize,
    /// Sum of unrankable entities across query lists.
    pub unrankable_entities: usize,
    pub per_role: BTreeMap<RoleLabel, Vec<f64>>,
    pub per_query: Vec<QueryResult>,
}

impl RankingReport {
    pub fn build(lists: &[RankedList], k_max: usize) -> Result<Self, RankingError> {
        let overall = map_curve(lists, k_max)?;
        let mut per_role: BTreeMap<RoleLabel, Vec<&RankedList>> = BTreeMap::new();
        for list in lists {
            per_role.entry(list.role).or_default().push(list);
        }
        let per_role = per_role
            .into_iter()
            .filter_map(|(role, ls)| {
                let owned: Vec<RankedList> = ls.into_iter().cloned().collect();
                map_curve(&owned, k_max).ok().map(|c| (role, c.points))
            })
            .collect();
        let per_query = lists
            .iter()
            .map(|l| {
                let rel = l.relevance();
                let ap = rel.iter().any(|x| *x).then(|| {
                    (1..=k_max)
                        .map(|k| average_precision_at_k(&rel, k).expect("has relevant"))
                        .collect()
                });
                QueryResult {
                    document_id: l.document_id.clone(),
                    role: l.role,
                    ap,
                    entities: l.items.len(),
                    relevant: l.relevant_count(),
                    unrankable: l.unrankable_count(),
                }
            })
            .collect();
        Ok(RankingReport {
            k_max,
            map: overall.points,
            included_queries: overall.included_queries,
            excluded_queries: overall.excluded_queries,
            unrankable_entities: lists.iter().map(|l| l.unrankable_count()).sum(),
            per_role,
            per_query,
        })
    }

    /// Two-column plot data: `K,mAP`.
    pub fn map_curve_csv(&self) -> String {
        let mut out = String::from("K,mAP\n");
        for (i, v) in self.map.iter().enumerate() {
            out.push_str(&format!("{},{v}\n", i + 1));
        }
        out
    }

    /// One row per role: `role,mAP@1,...,mAP@k`.
    pub fn per_role_csv(&self) -> String {
        let mut out = String::from("role");
        for k in 1..=self.k_max {
            out.push_str(&format!(",mAP@{k}"));
        }
        out.push('\n');
        for (role, points) in &self.per_role {
            out.push_str(role.as_str());
            for v in points {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}
