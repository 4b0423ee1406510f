//! Role-wise precision over predicted BIO spans.
//!
//! A predicted span counts as correct only when both its boundaries and its
//! role match a gold span (mention-level). Token-level precision is emitted
//! alongside since it is the other defensible reading of the metric. Roles
//! with no predicted spans report `n/a` and stay out of the macro average.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{RoleLabel, IN_STUDY_ROLES};

use super::TaggerError;

/// Spans as (sequence, start, end inclusive, role).
type Span = (usize, usize, usize, RoleLabel);

/// Decode BIO tags into spans. A dangling `I-X` (after `O`, after a
/// different role, or at sequence start) is repaired to `B-X`; the repair
/// count is returned. Unknown role names inside tags end the current span
/// and are otherwise treated as `O`.
pub fn extract_spans(sequences: &[Vec<String>]) -> (Vec<Span>, usize) {
    let mut spans = Vec::new();
    let mut repairs = 0usize;
    for (si, tags) in sequences.iter().enumerate() {
        let mut open: Option<(usize, RoleLabel)> = None;
        for (ti, tag) in tags.iter().enumerate() {
            let (kind, role) = match tag.split_once('-') {
                Some((k, r)) => (k, r.parse::<RoleLabel>().ok()),
                None => ("O", None),
            };
            match (kind, role) {
                ("B", Some(role)) => {
                    if let Some((start, r)) = open.take() {
                        spans.push((si, start, ti - 1, r));
                    }
                    open = Some((ti, role));
                }
                ("I", Some(role)) => match open {
                    Some((_, r)) if r == role => {}
                    _ => {
                        if let Some((start, r)) = open.take() {
                            spans.push((si, start, ti - 1, r));
                        }
                        repairs += 1;
                        open = Some((ti, role));
                    }
                },
                _ => {
                    if let Some((start, r)) = open.take() {
                        spans.push((si, start, ti - 1, r));
                    }
                }
            }
        }
        if let Some((start, r)) = open.take() {
            spans.push((si, start, tags.len() - 1, r));
        }
    }
    (spans, repairs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RolePrecision {
    pub predicted: usize,
    pub correct: usize,
    /// `None` when nothing was predicted for the role.
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaggerReport {
    /// Mention-level (exact span + role) precision per in-study role.
    pub per_role: BTreeMap<RoleLabel, RolePrecision>,
    /// Macro average over roles with defined precision.
    pub average_precision: Option<f64>,
    /// Token-level precision per in-study role.
    pub token_per_role: BTreeMap<RoleLabel, RolePrecision>,
    pub token_average_precision: Option<f64>,
    /// Dangling-I repairs applied to the predictions.
    pub repairs: usize,
}

pub fn role_precision_report(
    gold: &[Vec<String>],
    predicted: &[Vec<String>],
) -> Result<TaggerReport, TaggerError> {
    if gold.len() != predicted.len() {
        return Err(TaggerError::LengthMismatch(format!(
            "{} gold vs {} predicted sequences",
            gold.len(),
            predicted.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(TaggerError::LengthMismatch(format!(
                "sequence {i}: {} gold vs {} predicted tokens",
                g.len(),
                p.len()
            )));
        }
    }
    let (gold_spans, _) = extract_spans(gold);
    let (pred_spans, repairs) = extract_spans(predicted);

    let mut per_role = BTreeMap::new();
    for role in IN_STUDY_ROLES {
        let predicted_count = pred_spans.iter().filter(|s| s.3 == role).count();
        let correct = pred_spans
            .iter()
            .filter(|s| s.3 == role && gold_spans.contains(s))
            .count();
        per_role.insert(
            role,
            RolePrecision {
                predicted: predicted_count,
                correct,
                precision: (predicted_count > 0)
                    .then(|| correct as f64 / predicted_count as f64),
            },
        );
    }

    let role_of = |tag: &str| -> Option<RoleLabel> {
        tag.split_once('-').and_then(|(_, r)| r.parse().ok())
    };
    let mut token_per_role = BTreeMap::new();
    for role in IN_STUDY_ROLES {
        let mut predicted_count = 0usize;
        let mut correct = 0usize;
        for (g_seq, p_seq) in gold.iter().zip(predicted) {
            for (g, p) in g_seq.iter().zip(p_seq) {
                if role_of(p) == Some(role) {
                    predicted_count += 1;
                    if role_of(g) == Some(role) {
                        correct += 1;
                    }
                }
            }
        }
        token_per_role.insert(
            role,
            RolePrecision {
                predicted: predicted_count,
                correct,
                precision: (predicted_count > 0)
                    .then(|| correct as f64 / predicted_count as f64),
            },
        );
    }

    let macro_avg = |m: &BTreeMap<RoleLabel, RolePrecision>| -> Option<f64> {
        let defined: Vec<f64> = m.values().filter_map(|r| r.precision).collect();
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
    };

    Ok(TaggerReport {
        average_precision: macro_avg(&per_role),
        token_average_precision: macro_avg(&token_per_role),
        per_role,
        token_per_role,
        repairs,
    })
}
