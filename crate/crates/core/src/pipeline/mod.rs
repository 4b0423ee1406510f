//! End-to-end orchestration with reproducible configuration.
//!
//! Every run receives a config and an output directory, writes its outputs
//! plus a resolved-config snapshot (`config.json`) there, and is
//! byte-identical when rerun with the same seed in deterministic mode.
//! Output locations are deliberately not part of the snapshot so that two
//! runs of the same experiment into different directories produce the same
//! bytes.

mod ranking_run;
mod tagging_run;

pub use ranking_run::{
    run_embed, run_phrases, run_ranking, run_ranking_on, run_represent, EmbedOutcome,
    PhrasesOutcome, RankingOutcome, RepresentOutcome,
};
pub use tagging_run::{run_tagging, TaggingOutcome};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    generate_synthetic, load_column, load_jsonl, mention_statistics, save_column, save_jsonl,
    AnnotatedCorpus, PreprocessConfig, RoleLabel, Stemmer, StatisticsReport, SyntheticSpec,
    DEFAULT_STOPWORDS,
};
use crate::embeddings::TrainConfig;
use crate::phrases::PhraseConfig;
use crate::representations::{ContextLevel, DocvecConfig, ReprKind};
use crate::taggers::CrfTrainConfig;

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Bad input files or configuration; the CLI exits 2.
    #[error("input error: {0}")]
    Input(String),
    /// A pipeline stage failed; the CLI exits 1.
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    pub fn input(err: impl std::fmt::Display) -> Self {
        PipelineError::Input(err.to_string())
    }

    pub fn stage(stage: &'static str, err: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Column,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessSettings {
    /// Path to a stopword list; the bundled English list when unset and
    /// `use_default_stopwords` is true.
    pub stopwords: Option<PathBuf>,
    pub use_default_stopwords: bool,
    /// "none" or "suffix".
    pub stemmer: String,
    pub lowercase: bool,
}

impl Default for PreprocessSettings {
    fn default() -> Self {
        PreprocessSettings {
            stopwords: None,
            use_default_stopwords: true,
            stemmer: "suffix".into(),
            lowercase: true,
        }
    }
}

impl PreprocessSettings {
    pub fn build(&self) -> Result<PreprocessConfig, PipelineError> {
        let stemmer = match self.stemmer.as_str() {
            "none" => Stemmer::None,
            "suffix" => Stemmer::SuffixStripping,
            other => {
                return Err(PipelineError::Input(format!(
                    "unknown stemmer {other:?} (expected \"none\" or \"suffix\")"
                )))
            }
        };
        let words: Vec<String> = match &self.stopwords {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    PipelineError::Input(format!("stopword list {}: {e}", path.display()))
                })?;
                PreprocessConfig::parse_stopword_list(&text)
            }
            None if self.use_default_stopwords => {
                PreprocessConfig::parse_stopword_list(DEFAULT_STOPWORDS)
            }
            None => Vec::new(),
        };
        Ok(PreprocessConfig::new(words, stemmer, self.lowercase))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhraseMode {
    None,
    Collocation,
    Relation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PhraseSettings {
    pub mode: PhraseMode,
    /// Relation tuple TSV, required in relation mode.
    pub relations: Option<PathBuf>,
    pub delta: f64,
    pub threshold: f64,
    pub passes: usize,
    /// Drop collocations containing preprocessing stopwords.
    pub filter_stopwords: bool,
}

impl Default for PhraseSettings {
    fn default() -> Self {
        let base = PhraseConfig::default();
        PhraseSettings {
            mode: PhraseMode::None,
            relations: None,
            delta: base.delta,
            threshold: base.threshold,
            passes: base.passes,
            filter_stopwords: false,
        }
    }
}

impl PhraseSettings {
    pub fn phrase_config(&self, stopwords: Vec<String>) -> PhraseConfig {
        PhraseConfig {
            delta: self.delta,
            threshold: self.threshold,
            passes: self.passes,
            stopword_filter: if self.filter_stopwords { stopwords } else { Vec::new() },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ReprSettings {
    pub kind: ReprKind,
    /// Window half-width d.
    pub radius: usize,
    pub context: ContextLevel,
    pub docvec: DocvecConfig,
}

impl Default for ReprSettings {
    fn default() -> Self {
        ReprSettings {
            kind: ReprKind::Centroid,
            radius: 5,
            context: ContextLevel::Sentence,
            docvec: DocvecConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct QuerySettings {
    /// "tv" or "tv-sw".
    pub kind: String,
    /// n for tv-sw expansion.
    pub expansion: usize,
}

impl Default for QuerySettings {
    fn default() -> Self {
        QuerySettings {
            kind: "tv".into(),
            expansion: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TaggingSettings {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Which taggers to run: "hmm", "crf".
    pub taggers: Vec<String>,
    pub hmm_alpha_transition: f64,
    pub hmm_alpha_emission: f64,
    pub crf: CrfTrainConfig,
    /// Externally produced prediction files to include in the comparison
    /// table, e.g. a neural baseline decoded elsewhere.
    pub external: Vec<ExternalPredictions>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalPredictions {
    pub name: String,
    pub path: PathBuf,
}

impl Default for TaggingSettings {
    fn default() -> Self {
        TaggingSettings {
            train: None,
            test: None,
            taggers: vec!["hmm".into(), "crf".into()],
            hmm_alpha_transition: 0.1,
            hmm_alpha_emission: 0.1,
            crf: CrfTrainConfig::default(),
            external: Vec::new(),
        }
    }
}

/// The experiment description. Serialized verbatim as the resolved-config
/// snapshot next to each run's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub format: CorpusFormat,
    pub preprocess: PreprocessSettings,
    pub phrases: PhraseSettings,
    pub embedding: TrainConfig,
    /// Pretrained text vectors for warm initialization.
    pub pretrained: Option<PathBuf>,
    /// Training config for the role-substitution pass; the embedding config
    /// (with a shifted seed) when unset.
    pub role_training: Option<TrainConfig>,
    pub representation: ReprSettings,
    pub query: QuerySettings,
    pub k_max: usize,
    /// Force single-threaded training regardless of per-stage settings.
    pub deterministic: bool,
    /// Extra methods to evaluate side by side, one comparison row each.
    pub compare_representations: Vec<ReprKind>,
    pub compare_contexts: Vec<ContextLevel>,
    pub compare_phrase_modes: Vec<PhraseMode>,
    pub tagging: TaggingSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: PathBuf::from("corpus.jsonl"),
            format: CorpusFormat::Jsonl,
            preprocess: PreprocessSettings::default(),
            phrases: PhraseSettings::default(),
            embedding: TrainConfig::default(),
            pretrained: None,
            role_training: None,
            representation: ReprSettings::default(),
            query: QuerySettings::default(),
            k_max: 5,
            deterministic: true,
            compare_representations: Vec::new(),
            compare_contexts: Vec::new(),
            compare_phrase_modes: Vec::new(),
            tagging: TaggingSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(&path).map_err(|e| {
            PipelineError::Input(format!("config {}: {e}", path.as_ref().display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| PipelineError::Input(format!("config parse: {e}")))
    }

    /// Reseed every stage from one base seed: embedding = seed, role
    /// training = seed + 1, docvec inference = seed + 2.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.embedding.seed = seed;
        if let Some(role) = self.role_training.as_mut() {
            role.seed = seed.wrapping_add(1);
        }
        self.representation.docvec.seed = seed.wrapping_add(2);
        self
    }

    /// The role-substitution training config: explicit when given,
    /// otherwise the embedding config with a shifted seed.
    pub fn role_training_config(&self) -> TrainConfig {
        self.role_training.clone().unwrap_or_else(|| TrainConfig {
            seed: self.embedding.seed.wrapping_add(1),
            ..self.embedding.clone()
        })
    }

    pub fn effective_threads(&self, requested: usize) -> usize {
        if self.deterministic {
            1
        } else {
            requested
        }
    }

    pub fn snapshot_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn load_corpus_any(
    path: impl AsRef<Path>,
    format: CorpusFormat,
) -> Result<AnnotatedCorpus, PipelineError> {
    let path = path.as_ref();
    match format {
        CorpusFormat::Jsonl => load_jsonl(path),
        CorpusFormat::Column => load_column(path),
    }
    .map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    fs::write(path, contents)
        .map_err(|e| PipelineError::stage("write-output", format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir)
        .map_err(|e| PipelineError::stage("write-output", format!("{}: {e}", dir.display())))
}

/// Validate and normalize a corpus; write it in the requested format and
/// return the role-frequency table.
pub fn run_ingest(
    input: impl AsRef<Path>,
    input_format: CorpusFormat,
    emit_format: CorpusFormat,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<(RoleLabel, usize)>, PipelineError> {
    let corpus = load_corpus_any(&input, input_format)?;
    let out_dir = out_dir.as_ref();
    ensure_dir(out_dir)?;
    match emit_format {
        CorpusFormat::Jsonl => save_jsonl(&corpus, out_dir.join("corpus.jsonl")),
        CorpusFormat::Column => save_column(&corpus, out_dir.join("corpus.column")),
    }
    .map_err(|e| PipelineError::stage("ingest", e))?;
    let freq = corpus.role_frequencies();
    let mut table = String::from("role,frequency\n");
    let rows: Vec<(RoleLabel, usize)> = crate::corpus::ALL_ROLES
        .iter()
        .map(|r| (*r, freq.get(r).copied().unwrap_or(0)))
        .collect();
    for (role, count) in &rows {
        table.push_str(&format!("{role},{count}\n"));
    }
    write(&out_dir.join("role_frequencies.csv"), &table)?;
    Ok(rows)
}

/// Mention statistics files: JSON report plus the plot-ready CSVs.
pub fn run_stats(
    input: impl AsRef<Path>,
    format: CorpusFormat,
    out_dir: impl AsRef<Path>,
) -> Result<StatisticsReport, PipelineError> {
    let corpus = load_corpus_any(&input, format)?;
    let report = mention_statistics(&corpus);
    let out_dir = out_dir.as_ref();
    ensure_dir(out_dir)?;
    write(
        &out_dir.join("stats.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    write(&out_dir.join("mention_histogram.csv"), report.histogram_csv())?;
    write(&out_dir.join("assumptions_by_count.csv"), report.assumptions_csv())?;
    write(
        &out_dir.join("positional_by_role.csv"),
        report.positional_by_role_csv(),
    )?;
    Ok(report)
}

/// Generate a synthetic corpus; writes the corpus, the generator ground
/// truth, and the spec snapshot.
pub fn run_synth(
    spec: &SyntheticSpec,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<(), PipelineError> {
    let (corpus, truth) =
        generate_synthetic(seed, spec).map_err(PipelineError::input)?;
    let out_dir = out_dir.as_ref();
    ensure_dir(out_dir)?;
    save_jsonl(&corpus, out_dir.join("corpus.jsonl"))
        .map_err(|e| PipelineError::stage("synth", e))?;
    save_column(&corpus, out_dir.join("corpus.column"))
        .map_err(|e| PipelineError::stage("synth", e))?;
    write(
        &out_dir.join("ground_truth.json"),
        serde_json::to_string_pretty(&truth).expect("truth serializes"),
    )?;
    write(
        &out_dir.join("synthetic_spec.json"),
        serde_json::to_string_pretty(spec).expect("spec serializes"),
    )?;
    Ok(())
}
