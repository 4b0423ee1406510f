//! The tagging pipeline: train the selected sequence taggers on a train
//! split, decode a test split, and report role-wise precision.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{load_column, IN_STUDY_ROLES};
use crate::taggers::{
    corpus_to_sequences, crf_decode, crf_train, hmm_train, role_precision_report,
    viterbi_decode, Sequence, TaggerReport,
};

use super::{ensure_dir, write, PipelineConfig, PipelineError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaggingOutcome {
    /// Per-method evaluation, keyed by method name (HMM, CRF, externals).
    pub methods: BTreeMap<String, TaggerReport>,
}

fn load_sequences(path: &Path) -> Result<Vec<Sequence>, PipelineError> {
    let corpus = load_column(path)
        .map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?;
    Ok(corpus_to_sequences(&corpus))
}

fn predictions_to_column(sequences: &[Sequence], predictions: &[Vec<String>]) -> String {
    let mut out = String::from("-DOCSTART- predictions\n\n");
    for (seq, tags) in sequences.iter().zip(predictions) {
        for (tok, tag) in seq.tokens.iter().zip(tags) {
            out.push_str(&format!("{tok}\t{tag}\n"));
        }
        out.push('\n');
    }
    out
}

/// Rows follow the role-wise table layout: six roles then the macro
/// average, one column per method.
fn table_csv(methods: &BTreeMap<String, TaggerReport>) -> String {
    let names: Vec<&String> = methods.keys().collect();
    let mut out = String::from("role");
    for name in &names {
        out.push_str(&format!(",{name}"));
    }
    out.push('\n');
    for role in IN_STUDY_ROLES {
        out.push_str(role.as_str());
        for name in &names {
            match methods[*name].per_role[&role].precision {
                Some(p) => out.push_str(&format!(",{p}")),
                None => out.push_str(",n/a"),
            }
        }
        out.push('\n');
    }
    out.push_str("Average Precision");
    for name in &names {
        match methods[*name].average_precision {
            Some(p) => out.push_str(&format!(",{p}")),
            None => out.push_str(",n/a"),
        }
    }
    out.push('\n');
    out
}

pub fn run_tagging(
    cfg: &PipelineConfig,
    out_dir: Option<&Path>,
) -> Result<TaggingOutcome, PipelineError> {
    let train_path = cfg.tagging.train.as_ref().ok_or_else(|| {
        PipelineError::Input("tagging.train: a column-format training file is required".into())
    })?;
    let test_path = cfg.tagging.test.as_ref().ok_or_else(|| {
        PipelineError::Input("tagging.test: a column-format test file is required".into())
    })?;
    let train = load_sequences(train_path)?;
    let test = load_sequences(test_path)?;
    let gold: Vec<Vec<String>> = test.iter().map(|s| s.tags.clone()).collect();

    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write(&dir.join("config.json"), cfg.snapshot_json())?;
    }

    let mut methods: BTreeMap<String, TaggerReport> = BTreeMap::new();
    for tagger in &cfg.tagging.taggers {
        let (name, predictions): (String, Vec<Vec<String>>) = match tagger.as_str() {
            "hmm" => {
                let model = hmm_train(
                    &train,
                    cfg.tagging.hmm_alpha_transition,
                    cfg.tagging.hmm_alpha_emission,
                )
                .map_err(|e| PipelineError::stage("tag-hmm", e))?;
                (
                    "HMM".into(),
                    test.iter().map(|s| viterbi_decode(&model, &s.tokens)).collect(),
                )
            }
            "crf" => {
                let (model, _) = crf_train(&train, &cfg.tagging.crf)
                    .map_err(|e| PipelineError::stage("tag-crf", e))?;
                (
                    "CRF".into(),
                    test.iter().map(|s| crf_decode(&model, &s.tokens)).collect(),
                )
            }
            other => {
                return Err(PipelineError::Input(format!(
                    "unknown tagger {other:?} (expected \"hmm\" or \"crf\")"
                )))
            }
        };
        let report = role_precision_report(&gold, &predictions)
            .map_err(|e| PipelineError::stage("tag-evaluate", e))?;
        if let Some(dir) = out_dir {
            write(
                &dir.join(format!("predictions_{}.column", name.to_lowercase())),
                predictions_to_column(&test, &predictions),
            )?;
        }
        methods.insert(name, report);
    }

    // Externally produced predictions join the same comparison table.
    for external in &cfg.tagging.external {
        let seqs = load_sequences(&external.path)?;
        let predictions: Vec<Vec<String>> = seqs.iter().map(|s| s.tags.clone()).collect();
        let report = role_precision_report(&gold, &predictions).map_err(|e| {
            PipelineError::Input(format!(
                "external predictions {}: {e}",
                external.path.display()
            ))
        })?;
        methods.insert(external.name.clone(), report);
    }

    let outcome = TaggingOutcome { methods };
    if let Some(dir) = out_dir {
        write(
            &dir.join("tagging_report.json"),
            serde_json::to_string_pretty(&outcome).expect("outcome serializes"),
        )?;
        write(&dir.join("role_precision.csv"), table_csv(&outcome.methods))?;
    }
    Ok(outcome)
}
