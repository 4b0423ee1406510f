//! Truncated average precision and its mean over queries.
//!
//! `AP@K = (sum of precision@i over relevant ranks i <= K) / min(K, R)`
//! where R is the query's total relevant count. The min(K, R) denominator
//! makes a perfect ranking score 1.0 at every K. Queries without any
//! relevant entity are excluded from aggregation and counted separately.

use super::{RankedList, RankingError};

/// `None` when the list has no relevant entity (the query is excluded).
pub fn average_precision_at_k(relevance: &[bool], k: usize) -> Option<f64> {
    let total_relevant = relevance.iter().filter(|r| **r).count();
    if total_relevant == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &rel) in relevance.iter().take(k).enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / k.min(total_relevant) as f64)
}

/// The full mAP curve for K = 1..=k_max.
#[derive(Debug, Clone, PartialEq)]
pub struct MapCurve {
    /// `points[k-1]` is mAP@k.
    pub points: Vec<f64>,
    pub included_queries: usize,
    pub excluded_queries: usize,
}

pub fn map_curve(lists: &[RankedList], k_max: usize) -> Result<MapCurve, RankingError> {
    if k_max < 1 {
        return Err(RankingError::BadK);
    }
    let relevances: Vec<Vec<bool>> = lists.iter().map(|l| l.relevance()).collect();
    let included: Vec<&Vec<bool>> = relevances
        .iter()
        .filter(|r| r.iter().any(|x| *x))
        .collect();
    if included.is_empty() {
        return Err(RankingError::NoQueries);
    }
    let mut points = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let sum: f64 = included
            .iter()
            .map(|r| average_precision_at_k(r, k).expect("included queries have relevance"))
            .sum();
        points.push(sum / included.len() as f64);
    }
    Ok(MapCurve {
        points,
        included_queries: included.len(),
        excluded_queries: lists.len() - included.len(),
    })
}

pub fn map_at_k(lists: &[RankedList], k: usize) -> Result<f64, RankingError> {
    Ok(*map_curve(lists, k)?.points.last().expect("k >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RoleLabel;
    use crate::ranking::RankedItem;

    fn list_of(relevance: &[bool]) -> RankedList {
        RankedList {
            document_id: "d".into(),
            role: RoleLabel::PerVictim,
            items: relevance
                .iter()
                .enumerate()
                .map(|(i, &relevant)| RankedItem {
                    entity_key: format!("e{i}"),
                    mention_index: i,
                    score: 1.0 - i as f64 * 0.01,
                    rankable: true,
                    relevant,
                })
                .collect(),
        }
    }

    #[test]
    fn single_relevant_at_top() {
        assert_eq!(average_precision_at_k(&[true], 1), Some(1.0));
    }

    #[test]
    fn textbook_example() {
        // [1,0,1], R = 2, K = 3: (1/1 + 2/3) / 2
        let ap = average_precision_at_k(&[true, false, true], 3).unwrap();
        assert!((ap - 0.833_333_333_333).abs() < 1e-9);
    }

    #[test]
    fn zero_relevant_is_excluded() {
        assert_eq!(average_precision_at_k(&[false, false], 2), None);
        let err = map_curve(&[list_of(&[false, false])], 3).unwrap_err();
        assert!(matches!(err, RankingError::NoQueries));
    }

    #[test]
    fn single_query_map_equals_its_ap() {
        let l = list_of(&[false, true, true]);
        let map = map_at_k(std::slice::from_ref(&l), 3).unwrap();
        let ap = average_precision_at_k(&l.relevance(), 3).unwrap();
        assert_eq!(map, ap);
    }

    #[test]
    fn perfect_rankings_score_one_at_every_k() {
        let lists = vec![list_of(&[true, true, false]), list_of(&[true, false, false])];
        let curve = map_curve(&lists, 5).unwrap();
        for p in curve.points {
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_is_constant_past_the_last_relevant_rank() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(43);
        for _ in 0..200 {
            let n = rng.gen_range(1..10);
            let rel: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
            if !rel.iter().any(|x| *x) {
                continue;
            }
            let last_rel = rel.iter().rposition(|x| *x).unwrap() + 1;
            let curve = map_curve(&[list_of(&rel)], n + 5).unwrap();
            for k in last_rel..curve.points.len() {
                assert_eq!(curve.points[k], curve.points[last_rel - 1]);
            }
        }
    }

    #[test]
    fn ap_stays_within_unit_interval_and_tops_only_when_prefix_relevant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(47);
        for _ in 0..500 {
            let n = rng.gen_range(1..12);
            let rel: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            let total: usize = rel.iter().filter(|x| **x).count();
            if total == 0 {
                continue;
            }
            let k = rng.gen_range(1..=n + 3);
            let ap = average_precision_at_k(&rel, k).unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&ap));
            let want = k.min(total);
            let prefix_perfect = rel.iter().take(want).all(|x| *x);
            if (ap - 1.0).abs() < 1e-12 {
                assert!(prefix_perfect, "AP=1 but prefix not all relevant: {rel:?} k={k}");
            }
            if prefix_perfect && rel.iter().skip(want).take(k - want).all(|x| !*x) {
                assert!((ap - 1.0).abs() < 1e-12, "perfect prefix must score 1: {rel:?} k={k} ap={ap}");
            }
        }
    }

    #[test]
    fn excluded_queries_are_counted() {
        let lists = vec![list_of(&[true, false]), list_of(&[false, false])];
        let curve = map_curve(&lists, 2).unwrap();
        assert_eq!(curve.included_queries, 1);
        assert_eq!(curve.excluded_queries, 1);
    }
}
