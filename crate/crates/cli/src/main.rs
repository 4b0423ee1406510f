//! `rolekit`: entity role detection pipeline driver.
//!
//! Stages are file-to-file so they can be rerun independently: `ingest`,
//! `synth`, `stats`, `phrases`, `embed`, `represent`, `rank`, `tag`. Every
//! run writes a resolved config snapshot next to its outputs. Exit codes:
//! 0 success, 1 stage failure, 2 input or config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rolekit_core::corpus::SyntheticSpec;
use rolekit_core::pipeline::{
    run_embed, run_ingest, run_phrases, run_ranking, run_represent, run_stats, run_synth,
    run_tagging, CorpusFormat, PhraseMode, PipelineConfig, PipelineError,
};
use rolekit_core::representations::{ContextLevel, ReprKind};

#[derive(Parser)]
#[command(name = "rolekit", version, about = "Detect domain-specific entity roles by ranking and tagging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Jsonl,
    Column,
}

impl From<FormatArg> for CorpusFormat {
    fn from(v: FormatArg) -> Self {
        match v {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Column => CorpusFormat::Column,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PhraseModeArg {
    None,
    Collocation,
    Relation,
}

impl From<PhraseModeArg> for PhraseMode {
    fn from(v: PhraseModeArg) -> Self {
        match v {
            PhraseModeArg::None => PhraseMode::None,
            PhraseModeArg::Collocation => PhraseMode::Collocation,
            PhraseModeArg::Relation => PhraseMode::Relation,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ContextArg {
    Sentence,
    Document,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReprArg {
    Cluster,
    Centroid,
    Docvec,
}

/// Options shared by the config-driven stages.
#[derive(Args, Debug)]
struct ConfigOpts {
    /// JSON pipeline config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus path override.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Corpus format override.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Base seed; stage seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Force single-threaded, bitwise-reproducible runs.
    #[arg(long)]
    deterministic: bool,
    /// Context window half-width d.
    #[arg(long)]
    radius: Option<usize>,
    /// Representation kind.
    #[arg(long, value_enum)]
    representation: Option<ReprArg>,
    /// Context level for entity representations.
    #[arg(long, value_enum)]
    context: Option<ContextArg>,
    /// Role query kind: tv | tv-sw.
    #[arg(long)]
    query: Option<String>,
    /// Expansion size n for tv-sw queries.
    #[arg(long)]
    expansion: Option<usize>,
    /// Phrase mode override.
    #[arg(long, value_enum)]
    phrase_mode: Option<PhraseModeArg>,
    /// Relation tuples TSV (relation phrase mode).
    #[arg(long)]
    relations: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

impl ConfigOpts {
    fn build(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(corpus) = &self.corpus {
            cfg.corpus = corpus.clone();
        }
        if let Some(format) = self.format {
            cfg.format = format.into();
        }
        if let Some(radius) = self.radius {
            cfg.representation.radius = radius;
        }
        if let Some(kind) = self.representation {
            cfg.representation.kind = match kind {
                ReprArg::Cluster => ReprKind::Cluster,
                ReprArg::Centroid => ReprKind::Centroid,
                ReprArg::Docvec => ReprKind::Docvec,
            };
        }
        if let Some(context) = self.context {
            cfg.representation.context = match context {
                ContextArg::Sentence => ContextLevel::Sentence,
                ContextArg::Document => ContextLevel::Document,
            };
        }
        if let Some(query) = &self.query {
            cfg.query.kind = query.clone();
        }
        if let Some(n) = self.expansion {
            cfg.query.expansion = n;
        }
        if let Some(mode) = self.phrase_mode {
            cfg.phrases.mode = mode.into();
        }
        if let Some(relations) = &self.relations {
            cfg.phrases.relations = Some(relations.clone());
        }
        if let Some(seed) = self.seed {
            cfg = cfg.with_seed(seed);
        }
        if self.deterministic {
            cfg.deterministic = true;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus and normalize it into the canonical format.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "jsonl")]
        format: FormatArg,
        /// Format to write: jsonl (canonical) or column (for taggers).
        #[arg(long, value_enum, default_value = "jsonl")]
        emit: FormatArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus with planted, recoverable structure.
    Synth {
        /// Synthetic spec JSON; built-in defaults when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mention statistics: multi-mention, majority and positional rates.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "jsonl")]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mine bigram phrases and rewrite the corpus.
    Phrases(ConfigOpts),
    /// Train skip-gram word vectors over the (optionally phrase-merged) corpus.
    Embed(ConfigOpts),
    /// Build entity representations into the sidecar cache.
    Represent(ConfigOpts),
    /// Full retrieval pipeline: embed, learn role vectors, rank, evaluate.
    Rank(ConfigOpts),
    /// Train and evaluate the sequence taggers.
    Tag(ConfigOpts),
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Ingest {
            input,
            format,
            emit,
            out,
        } => {
            let rows = run_ingest(&input, format.into(), emit.into(), &out)?;
            println!("{:<16} {:>9}", "Entity Role", "Frequency");
            for (role, count) in rows {
                println!("{:<16} {:>9}", role.to_string(), count);
            }
            println!("wrote normalized corpus to {}", out.display());
        }
        Command::Synth { spec, seed, out } => {
            let spec = match spec {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        PipelineError::Input(format!("{}: {e}", path.display()))
                    })?;
                    serde_json::from_str::<SyntheticSpec>(&text)
                        .map_err(|e| PipelineError::Input(format!("synthetic spec: {e}")))?
                }
                None => SyntheticSpec::default(),
            };
            run_synth(&spec, seed, &out)?;
            println!(
                "generated {} documents (seed {seed}) into {}",
                spec.documents,
                out.display()
            );
        }
        Command::Stats { input, format, out } => {
            let report = run_stats(&input, format.into(), &out)?;
            println!(
                "entities: {}  multi-mention: {:.4}  majority share (multi): {}  first-mention majority (multi): {}",
                report.entity_count,
                report.multi_mention_fraction,
                report
                    .majority_share_multi
                    .map_or("n/a".into(), |v| format!("{v:.4}")),
                report
                    .first_mention_majority_multi
                    .map_or("n/a".into(), |v| format!("{v:.4}")),
            );
            println!("reports written to {}", out.display());
        }
        Command::Phrases(opts) => {
            let cfg = opts.build()?;
            let outcome = run_phrases(&cfg, &opts.out)?;
            println!(
                "phrase table with {} bigrams and merged corpus written to {}",
                outcome.phrases,
                opts.out.display()
            );
        }
        Command::Embed(opts) => {
            let cfg = opts.build()?;
            let outcome = run_embed(&cfg, &opts.out)?;
            match outcome.pretrained_loaded {
                Some(loaded) => println!(
                    "trained {}x{} model ({} rows warm-started) into {}",
                    outcome.vocabulary,
                    outcome.dim,
                    loaded,
                    opts.out.display()
                ),
                None => println!(
                    "trained {}x{} model into {}",
                    outcome.vocabulary,
                    outcome.dim,
                    opts.out.display()
                ),
            }
        }
        Command::Represent(opts) => {
            let cfg = opts.build()?;
            let outcome = run_represent(&cfg, &opts.out)?;
            println!(
                "represented {} mentions ({} unrankable, {} degenerate), cache {}",
                outcome.mentions, outcome.unrankable, outcome.degenerate, outcome.cache_file
            );
        }
        Command::Rank(opts) => {
            let cfg = opts.build()?;
            let outcome = run_ranking(&cfg, Some(&opts.out))?;
            print!("mAP@K:");
            for (i, v) in outcome.report.map.iter().enumerate() {
                print!("  @{}={v:.4}", i + 1);
            }
            println!();
            println!(
                "{} queries evaluated ({} excluded), reports in {}",
                outcome.report.included_queries,
                outcome.report.excluded_queries,
                opts.out.display()
            );
        }
        Command::Tag(opts) => {
            let cfg = opts.build()?;
            let outcome = run_tagging(&cfg, Some(&opts.out))?;
            for (name, report) in &outcome.methods {
                println!(
                    "{name}: average precision {}",
                    report
                        .average_precision
                        .map_or("n/a".into(), |v| format!("{v:.4}"))
                );
            }
            println!("reports in {}", opts.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ PipelineError::Input(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
