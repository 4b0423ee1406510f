//! The retrieval pipeline: preprocess, optional phrase merge, embed, learn
//! role vectors, represent, rank, evaluate.

use std::path::Path;

use crate::corpus::{preprocess, AnnotatedCorpus, PreprocessConfig, IN_STUDY_ROLES};
use crate::embeddings::{
    init_pretrained, save_model, train_skipgram, EmbeddingModel, Vocabulary,
};
use crate::phrases::{collocation_scores, load_relation_phrases, merge_phrases, PhraseTable};
use crate::ranking::{rank_entities, RankedList, RankingReport};
use crate::representations::{
    build_role_query, build_representations, cache_file_name, cache_key, learn_role_vectors,
    load_cache, save_cache, ContextLevel, QueryKind, ReprConfig, ReprKind, RepresentationSet,
};

use super::{ensure_dir, write, PhraseMode, PipelineConfig, PipelineError};

pub struct RankingOutcome {
    pub report: RankingReport,
    /// (method label, mAP curve) rows for each comparison table written.
    pub comparisons: Vec<(String, Vec<f64>)>,
}

struct TrainedStack {
    corpus: AnnotatedCorpus,
    role_model: EmbeddingModel,
}

pub struct EmbedOutcome {
    pub vocabulary: usize,
    pub dim: usize,
    pub pretrained_loaded: Option<usize>,
}

pub struct PhrasesOutcome {
    pub phrases: usize,
}

pub struct RepresentOutcome {
    pub mentions: usize,
    pub unrankable: usize,
    pub degenerate: usize,
    pub cache_file: String,
}

/// The phrase-mining stage alone: write the table and the rewritten corpus.
pub fn run_phrases(cfg: &PipelineConfig, out_dir: &Path) -> Result<PhrasesOutcome, PipelineError> {
    let raw = super::load_corpus_any(&cfg.corpus, cfg.format)?;
    ensure_dir(out_dir)?;
    write(&out_dir.join("config.json"), cfg.snapshot_json())?;
    let pre = cfg.preprocess.build()?;
    let corpus = preprocess(&raw, &pre);
    if matches!(cfg.phrases.mode, PhraseMode::None) {
        return Err(PipelineError::Input(
            "phrases stage needs phrases.mode = collocation or relation".into(),
        ));
    }
    let merged = apply_phrases(&corpus, cfg.phrases.mode, cfg, &pre, Some(out_dir))?;
    crate::corpus::save_jsonl(&merged, out_dir.join("merged_corpus.jsonl"))
        .map_err(|e| PipelineError::stage("phrases", e))?;
    let table_file = match cfg.phrases.mode {
        PhraseMode::Collocation => "phrases_collocation.tsv",
        PhraseMode::Relation => "phrases_relation.tsv",
        PhraseMode::None => unreachable!(),
    };
    let table = PhraseTable::load_tsv(out_dir.join(table_file))
        .map_err(|e| PipelineError::stage("phrases", e))?;
    Ok(PhrasesOutcome {
        phrases: table.len(),
    })
}

/// The embedding stage alone: preprocess, optional phrase merge, train the
/// word model, persist it in both formats.
pub fn run_embed(cfg: &PipelineConfig, out_dir: &Path) -> Result<EmbedOutcome, PipelineError> {
    let raw = super::load_corpus_any(&cfg.corpus, cfg.format)?;
    ensure_dir(out_dir)?;
    write(&out_dir.join("config.json"), cfg.snapshot_json())?;
    let pre = cfg.preprocess.build()?;
    let corpus = preprocess(&raw, &pre);
    let corpus = apply_phrases(&corpus, cfg.phrases.mode, cfg, &pre, Some(out_dir))?;
    let (model, coverage) = train_word_model(&corpus, cfg)?;
    save_model(&model, out_dir.join("word_model.bin"))
        .map_err(|e| PipelineError::stage("embed", e))?;
    crate::embeddings::save_text_vectors(&model, out_dir.join("word_vectors.txt"))
        .map_err(|e| PipelineError::stage("embed", e))?;
    Ok(EmbedOutcome {
        vocabulary: model.vocab().len(),
        dim: model.dim(),
        pretrained_loaded: coverage,
    })
}

/// The representation stage alone: train the stack, build the configured
/// representations, persist the sidecar cache and the role model.
pub fn run_represent(cfg: &PipelineConfig, out_dir: &Path) -> Result<RepresentOutcome, PipelineError> {
    let raw = super::load_corpus_any(&cfg.corpus, cfg.format)?;
    ensure_dir(out_dir)?;
    write(&out_dir.join("config.json"), cfg.snapshot_json())?;
    let stack = train_stack(&raw, cfg, cfg.phrases.mode, Some(out_dir))?;
    let set = represent(
        &stack,
        cfg,
        cfg.representation.kind,
        cfg.representation.context,
        Some(out_dir),
    )?;
    save_model(&stack.role_model, out_dir.join("role_model.bin"))
        .map_err(|e| PipelineError::stage("represent", e))?;
    let repr_cfg = ReprConfig {
        kind: cfg.representation.kind,
        radius: cfg.representation.radius,
        context: cfg.representation.context,
        docvec: cfg.representation.docvec.clone(),
    };
    let config_json = serde_json::to_string(&repr_cfg).expect("repr config serializes");
    let cache_file = cache_file_name(cache_key(&stack.corpus, &stack.role_model, &config_json));
    Ok(RepresentOutcome {
        mentions: stack.corpus.mention_count(),
        unrankable: set.unrankable,
        degenerate: set.degenerate,
        cache_file,
    })
}

fn query_kind(cfg: &PipelineConfig) -> Result<QueryKind, PipelineError> {
    match cfg.query.kind.as_str() {
        "tv" => Ok(QueryKind::TypeVector),
        "tv-sw" => Ok(QueryKind::Expanded(cfg.query.expansion)),
        other => Err(PipelineError::Input(format!(
            "unknown query kind {other:?} (expected \"tv\" or \"tv-sw\")"
        ))),
    }
}

fn apply_phrases(
    corpus: &AnnotatedCorpus,
    mode: PhraseMode,
    cfg: &PipelineConfig,
    pre: &PreprocessConfig,
    out_dir: Option<&Path>,
) -> Result<AnnotatedCorpus, PipelineError> {
    let table: PhraseTable = match mode {
        PhraseMode::None => return Ok(corpus.clone()),
        PhraseMode::Collocation => {
            let stop_filter = if cfg.phrases.filter_stopwords {
                corpus
                    .normalized_sentences()
                    .iter()
                    .flatten()
                    .filter(|t| pre.is_stopword(t))
                    .cloned()
                    .collect()
            } else {
                Vec::new()
            };
            let pcfg = cfg.phrases.phrase_config(stop_filter);
            collocation_scores(&corpus.normalized_sentences(), &pcfg)
                .map_err(|e| PipelineError::stage("phrases", e))?
        }
        PhraseMode::Relation => {
            let path = cfg.phrases.relations.as_ref().ok_or_else(|| {
                PipelineError::Input("relation phrase mode needs a relations file".into())
            })?;
            load_relation_phrases(path, pre)
                .map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?
                .table
        }
    };
    if let Some(dir) = out_dir {
        let name = match mode {
            PhraseMode::Collocation => "phrases_collocation.tsv",
            PhraseMode::Relation => "phrases_relation.tsv",
            PhraseMode::None => unreachable!(),
        };
        write(&dir.join(name), table.to_tsv_string())?;
    }
    Ok(merge_phrases(corpus, &table, cfg.phrases.passes))
}

fn train_word_model(
    corpus: &AnnotatedCorpus,
    cfg: &PipelineConfig,
) -> Result<(EmbeddingModel, Option<usize>), PipelineError> {
    let sentences = corpus.normalized_sentences();
    let mut embed_cfg = cfg.embedding.clone();
    embed_cfg.threads = cfg.effective_threads(embed_cfg.threads);
    let vocab = Vocabulary::build(
        sentences.iter().flatten().map(String::as_str),
        embed_cfg.min_count,
        &[],
    )
    .map_err(|e| PipelineError::stage("embed", e))?;
    let mut model = EmbeddingModel::new(vocab, embed_cfg.dim, embed_cfg.seed);
    let coverage = match &cfg.pretrained {
        Some(path) => Some(
            init_pretrained(&mut model, path)
                .map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?
                .loaded,
        ),
        None => None,
    };
    train_skipgram(&mut model, &sentences, &embed_cfg)
        .map_err(|e| PipelineError::stage("embed", e))?;
    Ok((model, coverage))
}

/// Preprocess, merge phrases, train the word model, then the role model.
fn train_stack(
    raw: &AnnotatedCorpus,
    cfg: &PipelineConfig,
    mode: PhraseMode,
    out_dir: Option<&Path>,
) -> Result<TrainedStack, PipelineError> {
    let pre = cfg.preprocess.build()?;
    let corpus = preprocess(raw, &pre);
    let corpus = apply_phrases(&corpus, mode, cfg, &pre, out_dir)?;
    let (model, _) = train_word_model(&corpus, cfg)?;
    let mut role_cfg = cfg.role_training_config();
    role_cfg.threads = cfg.effective_threads(role_cfg.threads);
    let (role_model, _) = learn_role_vectors(&corpus, &model, &role_cfg)
        .map_err(|e| PipelineError::stage("role-vectors", e))?;
    Ok(TrainedStack { corpus, role_model })
}

/// Representations for one (kind, context) choice, via the sidecar cache
/// when an output directory is available.
fn represent(
    stack: &TrainedStack,
    cfg: &PipelineConfig,
    kind: ReprKind,
    context: ContextLevel,
    out_dir: Option<&Path>,
) -> Result<RepresentationSet, PipelineError> {
    let repr_cfg = ReprConfig {
        kind,
        radius: cfg.representation.radius,
        context,
        docvec: cfg.representation.docvec.clone(),
    };
    let cache_path = out_dir.map(|dir| {
        let config_json = serde_json::to_string(&repr_cfg).expect("repr config serializes");
        dir.join(cache_file_name(cache_key(
            &stack.corpus,
            &stack.role_model,
            &config_json,
        )))
    });
    if let Some(path) = &cache_path {
        if path.exists() {
            if let Ok(cached) = load_cache(path) {
                return Ok(cached);
            }
        }
    }
    let set = build_representations(&stack.corpus, &stack.role_model, &repr_cfg)
        .map_err(|e| PipelineError::stage("represent", e))?;
    if let Some(path) = &cache_path {
        save_cache(&set, path).map_err(|e| PipelineError::stage("represent", e))?;
    }
    Ok(set)
}

/// Queries are (document, in-study role) pairs; zero-relevant queries are
/// excluded from the mean inside the report and counted there.
fn rank_all(
    stack: &TrainedStack,
    set: &RepresentationSet,
    kind: QueryKind,
) -> Result<Vec<RankedList>, PipelineError> {
    let mut lists = Vec::new();
    let queries: Vec<_> = IN_STUDY_ROLES
        .iter()
        .map(|role| build_role_query(&stack.role_model, *role, kind))
        .collect::<Result<_, _>>()
        .map_err(|e| PipelineError::stage("rank", e))?;
    for (doc, reprs) in stack.corpus.documents().iter().zip(&set.per_document) {
        for query in &queries {
            lists.push(
                rank_entities(doc, reprs, query)
                    .map_err(|e| PipelineError::stage("rank", e))?,
            );
        }
    }
    Ok(lists)
}

fn evaluate(
    stack: &TrainedStack,
    set: &RepresentationSet,
    cfg: &PipelineConfig,
    kind: QueryKind,
) -> Result<RankingReport, PipelineError> {
    let lists = rank_all(stack, set, kind)?;
    RankingReport::build(&lists, cfg.k_max).map_err(|e| PipelineError::stage("evaluate", e))
}

fn comparison_csv(rows: &[(String, Vec<f64>)], k_max: usize) -> String {
    let mut out = String::from("method");
    for k in 1..=k_max {
        out.push_str(&format!(",mAP@{k}"));
    }
    out.push('\n');
    for (name, curve) in rows {
        out.push_str(name);
        for v in curve {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

fn kind_label(kind: ReprKind, radius: usize) -> String {
    let name = match kind {
        ReprKind::Cluster => "cluster",
        ReprKind::Centroid => "centroid",
        ReprKind::Docvec => "docvec",
    };
    format!("{name}-d{radius}")
}

/// Execute the full retrieval pipeline and write the report files. Pass
/// `None` as the output directory for an in-memory run (used by tests).
pub fn run_ranking(
    cfg: &PipelineConfig,
    out_dir: Option<&Path>,
) -> Result<RankingOutcome, PipelineError> {
    let raw = super::load_corpus_any(&cfg.corpus, cfg.format)?;
    run_ranking_on(&raw, cfg, out_dir)
}

/// Same as [`run_ranking`] but over an already-loaded corpus.
pub fn run_ranking_on(
    raw: &AnnotatedCorpus,
    cfg: &PipelineConfig,
    out_dir: Option<&Path>,
) -> Result<RankingOutcome, PipelineError> {
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write(&dir.join("config.json"), cfg.snapshot_json())?;
    }
    let qkind = query_kind(cfg)?;
    let stack = train_stack(raw, cfg, cfg.phrases.mode, out_dir)?;
    let set = represent(
        &stack,
        cfg,
        cfg.representation.kind,
        cfg.representation.context,
        out_dir,
    )?;
    let report = evaluate(&stack, &set, cfg, qkind)?;

    let mut comparisons: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(dir) = out_dir {
        write(
            &dir.join("ranking_report.json"),
            serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
        write(&dir.join("map_curve.csv"), report.map_curve_csv())?;
        write(&dir.join("per_role.csv"), report.per_role_csv())?;
        save_model(&stack.role_model, dir.join("role_model.bin"))
            .map_err(|e| PipelineError::stage("write-output", e))?;
    }

    // Side-by-side method comparisons, one table per enumerated axis.
    if !cfg.compare_representations.is_empty() {
        let mut rows = Vec::new();
        for kind in &cfg.compare_representations {
            let set = represent(&stack, cfg, *kind, cfg.representation.context, out_dir)?;
            let rep = evaluate(&stack, &set, cfg, qkind)?;
            rows.push((kind_label(*kind, cfg.representation.radius), rep.map));
        }
        if let Some(dir) = out_dir {
            write(
                &dir.join("representation_comparison.csv"),
                comparison_csv(&rows, cfg.k_max),
            )?;
        }
        comparisons.extend(rows);
    }
    if !cfg.compare_contexts.is_empty() {
        let mut rows = Vec::new();
        for context in &cfg.compare_contexts {
            let set = represent(&stack, cfg, cfg.representation.kind, *context, out_dir)?;
            let rep = evaluate(&stack, &set, cfg, qkind)?;
            let label = match context {
                ContextLevel::Sentence => "sentence",
                ContextLevel::Document => "document",
            };
            rows.push((label.to_string(), rep.map));
        }
        if let Some(dir) = out_dir {
            write(
                &dir.join("context_comparison.csv"),
                comparison_csv(&rows, cfg.k_max),
            )?;
        }
        comparisons.extend(rows);
    }
    if !cfg.compare_phrase_modes.is_empty() {
        let mut rows = Vec::new();
        for mode in &cfg.compare_phrase_modes {
            let stack = train_stack(raw, cfg, *mode, None)?;
            let set = represent(&stack, cfg, cfg.representation.kind, cfg.representation.context, None)?;
            let rep = evaluate(&stack, &set, cfg, qkind)?;
            let label = match mode {
                PhraseMode::None => "words",
                PhraseMode::Collocation => "collocation-phrases",
                PhraseMode::Relation => "relation-phrases",
            };
            rows.push((label.to_string(), rep.map));
        }
        if let Some(dir) = out_dir {
            write(
                &dir.join("phrase_comparison.csv"),
                comparison_csv(&rows, cfg.k_max),
            )?;
        }
        comparisons.extend(rows);
    }

    Ok(RankingOutcome {
        report,
        comparisons,
    })
}
