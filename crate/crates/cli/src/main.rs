use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;

use reaction_miner::combolearn::{
    learn_combos, select_combos, Architecture, LearnerConfig, DEFAULT_PATTERN_BUDGET,
};
use reaction_miner::config::Config;
use reaction_miner::coocgraph::{
    build_graph, reduce_graph, CoocGraph, ReducedGraph, DEFAULT_DOMINANCE,
};
use reaction_miner::corpus::{
    load_comments, load_labeled, load_reactions, load_sarcasm_labeled, load_texts, overlap_join,
    synth_corpus, write_labeled, LabelDistribution, SynthConfig,
};
use reaction_miner::emoclass::EmotionScores;
use reaction_miner::evalharness::{
    agree_labels, grid_search_thresholds, metrics, nb_predict, nb_train, render_report,
    AnnotationSet, Features, ThresholdGrid,
};
use reaction_miner::patterns::{
    build_model, extract_patterns, EmotionModel, MiningParams, DEFAULT_MIN_FILLERS,
    DEFAULT_MIN_PATTERN_FREQ,
};
use reaction_miner::pipeline::{
    classify_comments, evaluate_predictions, run_pipeline, tokenize_all, tokenize_labeled,
    tokenizer_for, write_sarcasm, write_scores, PipelineConfig, PipelineError, Stage,
};
use reaction_miner::sarcasm::SarcasmThresholds;
use reaction_miner::textproc::{build_zh_lexicon, normalize, Tokenizer, DEFAULT_LEXICON_THRESHOLD};
use reaction_miner::Lang;

const LEARN_EXIT_CODE: u8 = 18;
const SYNTH_EXIT_CODE: u8 = 19;

#[derive(Parser, Debug)]
#[command(
    name = "reaction-miner",
    version,
    about = "Mine emotion patterns from reaction-labeled comments and detect sarcasm"
)]
struct Cli {
    /// Worker thread cap for parallel stages (0 = all cores).
    #[arg(
        long,
        global = true,
        env = "REACTION_MINER_THREADS",
        default_value_t = 0
    )]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Join comments with reactions into labeled comments.
    Ingest(IngestArgs),
    /// Build the Chinese word lexicon from raw text.
    BuildLexicon(LexiconArgs),
    /// Build a co-occurrence graph from one or more text files.
    BuildGraph(GraphArgs),
    /// Remove objective words from the subjective graph.
    ReduceGraph(ReduceArgs),
    /// Mine wildcard patterns and write the emotion model.
    ExtractPatterns(ExtractArgs),
    /// Score comments against an emotion model.
    Classify(ClassifyArgs),
    /// Label comments as sarcastic with the threshold rules.
    Sarcasm(SarcasmArgs),
    /// Learn which top-two emotion combinations mark sarcasm.
    LearnCombos(LearnArgs),
    /// Score sarcasm predictions against multi-annotator ground truth.
    Evaluate(EvaluateArgs),
    /// Naive Bayes sarcasm baseline.
    Baseline(BaselineArgs),
    /// Grid-search sarcasm thresholds against annotations.
    TuneThresholds(TuneArgs),
    /// Write a synthetic corpus with planted patterns.
    Synth(SynthArgs),
    /// Run every stage from a config file, skipping up-to-date stages.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
struct TextArgs {
    /// Language profile (en|zh).
    #[arg(long, default_value_t = Lang::En)]
    lang: Lang,
    /// Chinese lexicon; required when --lang zh.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

impl TextArgs {
    fn tokenizer(&self) -> Result<Tokenizer> {
        match (self.lang, &self.lexicon) {
            (Lang::En, _) => Ok(Tokenizer::English),
            (Lang::Zh, Some(path)) => tokenizer_for(Lang::Zh, path)
                .map_err(|e| anyhow::anyhow!(e))
                .with_context(|| format!("loading lexicon {}", path.display())),
            (Lang::Zh, None) => bail!("--lexicon is required for --lang zh"),
        }
    }
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Comment file: `id, post_id, user_id, lang, text`.
    #[arg(long)]
    comments: PathBuf,
    /// Reaction file: `post_id, user_id, reaction`.
    #[arg(long)]
    reactions: PathBuf,
    /// Keep comments in this language.
    #[arg(long, default_value_t = Lang::En)]
    lang: Lang,
    /// Labeled comment output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LexiconArgs {
    /// Post and comment files.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Minimum adjusted frequency.
    #[arg(long, default_value_t = DEFAULT_LEXICON_THRESHOLD)]
    threshold: u64,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Comment, labeled comment or post files.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[command(flatten)]
    text: TextArgs,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Graph built from comments.
    #[arg(long)]
    subjective: PathBuf,
    /// Graph built from news posts.
    #[arg(long)]
    objective: PathBuf,
    /// Remove a word when its objective relative frequency is at least
    /// this multiple of its subjective one.
    #[arg(long, default_value_t = DEFAULT_DOMINANCE)]
    dominance: f64,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Reduced graph.
    #[arg(long)]
    graph: PathBuf,
    /// Labeled comments.
    #[arg(long)]
    labeled: PathBuf,
    #[command(flatten)]
    text: TextArgs,
    /// Minimum total pattern frequency.
    #[arg(long, default_value_t = DEFAULT_MIN_PATTERN_FREQ)]
    min_freq: u64,
    /// Minimum number of distinct wildcard fillers.
    #[arg(long, default_value_t = DEFAULT_MIN_FILLERS)]
    min_fillers: usize,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Emotion model file.
    #[arg(long)]
    model: PathBuf,
    /// Comment file.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    text: TextArgs,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SarcasmArgs {
    /// Emotion model file.
    #[arg(long)]
    model: PathBuf,
    /// Comment file.
    #[arg(long)]
    input: PathBuf,
    /// Threshold profile file with [en]/[zh] sections; the language's
    /// built-in profile when omitted.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    #[command(flatten)]
    text: TextArgs,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LearnArgs {
    /// Emotion model file.
    #[arg(long)]
    model: PathBuf,
    /// Sarcasm-labeled comments: `id, lang, sarcastic, text`.
    #[arg(long)]
    annotated: PathBuf,
    /// Patterns per emotion in each score matrix.
    #[arg(long, default_value_t = DEFAULT_PATTERN_BUDGET)]
    n: usize,
    /// Training epochs.
    #[arg(long, default_value_t = LearnerConfig::default().epochs)]
    epochs: usize,
    /// Gradient descent step size.
    #[arg(long, default_value_t = LearnerConfig::default().learning_rate)]
    learning_rate: f64,
    /// Examples per gradient step.
    #[arg(long, default_value_t = LearnerConfig::default().batch_size)]
    batch_size: usize,
    /// cnn or logistic.
    #[arg(long, default_value_t = Architecture::Cnn)]
    architecture: Architecture,
    /// Number of combinations to report.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Seed for weight initialization and batch order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    text: TextArgs,
    /// Combo histogram output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Predictions: `id, sarcastic` or sarcasm command output.
    #[arg(long)]
    pred: PathBuf,
    /// Annotation file: `id, lang, l1,...,lm, text`.
    #[arg(long)]
    annotations: PathBuf,
    /// Agreement level; every level up to 3 when omitted.
    #[arg(long)]
    level: Option<usize>,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    /// tfidf or bow.
    #[arg(long, default_value = "tfidf")]
    features: Features,
    /// Sarcasm-labeled training comments: `id, lang, sarcastic, text`.
    #[arg(long)]
    train: PathBuf,
    /// Annotation file to evaluate on.
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    text: TextArgs,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TuneArgs {
    /// Emotion model file.
    #[arg(long)]
    model: PathBuf,
    /// Annotation file: `id, lang, l1,...,lm, text`.
    #[arg(long)]
    annotations: PathBuf,
    /// Grid config with a [grid] section.
    #[arg(long)]
    grid: PathBuf,
    #[command(flatten)]
    text: TextArgs,
    /// Writes the winning profile as a thresholds file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Directory for the generated files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Comments per emotion.
    #[arg(long, default_value_t = 1000)]
    per_emotion: usize,
    /// News posts.
    #[arg(long, default_value_t = 300)]
    posts: usize,
    /// Fraction of comments that mix angry and haha phrases.
    #[arg(long, default_value_t = 0.0)]
    sarcasm_rate: f64,
    /// Annotators in the multi-vote file `votes.tsv`.
    #[arg(long, default_value_t = 3)]
    annotators: usize,
    /// Probability that an annotator flips the true label.
    #[arg(long, default_value_t = 0.1)]
    flip_rate: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Pipeline config file.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key: `section.key=value` (`key=value` for top-level keys).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Reuse the existing model instead of building one.
    #[arg(long)]
    no_build: bool,
    /// Run every stage even when its outputs are up to date.
    #[arg(long)]
    force: bool,
}

/// Error tagged with the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

fn stage_code(stage: Stage) -> u8 {
    stage.exit_code() as u8
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_millis()
        .init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::warn!("cannot set thread count: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {}", describe(&error));
            ExitCode::from(code)
        }
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(error: &anyhow::Error) -> String {
    let mut msg = error.to_string();
    for cause in error.chain().skip(1) {
        let cause = cause.to_string();
        if !msg.contains(&cause) {
            msg.push_str(": ");
            msg.push_str(&cause);
        }
    }
    msg
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Ingest(a) => ingest(a).map_err(fail(stage_code(Stage::Ingest))),
        Command::BuildLexicon(a) => lexicon(a).map_err(fail(stage_code(Stage::Lexicon))),
        Command::BuildGraph(a) => graph(a).map_err(fail(stage_code(Stage::Graphs))),
        Command::ReduceGraph(a) => reduce(a).map_err(fail(stage_code(Stage::Reduce))),
        Command::ExtractPatterns(a) => extract(a).map_err(fail(stage_code(Stage::Patterns))),
        Command::Classify(a) => classify_cmd(a).map_err(fail(stage_code(Stage::Classify))),
        Command::Sarcasm(a) => sarcasm_cmd(a).map_err(fail(stage_code(Stage::Sarcasm))),
        Command::LearnCombos(a) => learn(a).map_err(fail(LEARN_EXIT_CODE)),
        Command::Evaluate(a) => evaluate(a).map_err(fail(stage_code(Stage::Evaluate))),
        Command::Baseline(a) => baseline(a).map_err(fail(stage_code(Stage::Evaluate))),
        Command::TuneThresholds(a) => tune(a).map_err(fail(stage_code(Stage::Evaluate))),
        Command::Synth(a) => synth(a).map_err(fail(SYNTH_EXIT_CODE)),
        Command::Pipeline(a) => pipeline(a),
    }
}

fn boxed(e: Box<dyn std::error::Error + Send + Sync>) -> anyhow::Error {
    anyhow::anyhow!(e)
}

fn read_model(path: &Path) -> Result<EmotionModel> {
    EmotionModel::read(path).with_context(|| format!("loading model {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    let comments = load_comments(&a.comments, a.lang)?;
    let reactions = load_reactions(&a.reactions)?;
    let joined = overlap_join(&comments.records, &reactions.records);
    write_labeled(&a.out, &joined.labeled)?;
    info!(
        "ingest: {} comments, {} reactions, {} labeled, {} unmatched, {} duplicate reactions",
        comments.records.len(),
        reactions.records.len(),
        joined.labeled.len(),
        joined.unmatched,
        joined.duplicate_reactions
    );
    let dist = LabelDistribution::from_labels(joined.labeled.iter().map(|l| l.label));
    emit(None, &dist.render_report())
}

fn lexicon(a: LexiconArgs) -> Result<()> {
    let mut texts = Vec::new();
    for path in &a.input {
        let loaded = load_texts(path, Lang::Zh)?;
        texts.extend(
            loaded
                .into_par_iter()
                .map(|(_, t)| normalize(&t))
                .collect::<Vec<_>>(),
        );
    }
    let lexicon = build_zh_lexicon(&texts, a.threshold)?;
    lexicon.write(&a.out)?;
    info!("lexicon: {} texts, {} words", texts.len(), lexicon.len());
    Ok(())
}

fn graph(a: GraphArgs) -> Result<()> {
    let tokenizer = a.text.tokenizer()?;
    let mut graph = CoocGraph::new();
    let mut records = 0;
    for path in &a.input {
        let texts = load_texts(path, a.text.lang)?;
        records += texts.len();
        let seqs = tokenize_all(
            &tokenizer,
            texts.par_iter().map(|(id, t)| (id.as_str(), t.as_str())),
        );
        graph.merge(&build_graph(&seqs));
    }
    graph.write(&a.out)?;
    info!(
        "graph: {records} texts, {} nodes, {} edges",
        graph.node_count(),
        graph.edge_count()
    );
    Ok(())
}

fn reduce(a: ReduceArgs) -> Result<()> {
    let subjective = CoocGraph::read(&a.subjective)?;
    let objective = CoocGraph::read(&a.objective)?;
    let reduced = reduce_graph(&subjective, &objective, a.dominance)?;
    reduced.write(&a.out)?;
    info!(
        "reduce: {} nodes in, {} kept, {} removed",
        subjective.node_count(),
        reduced.graph.node_count(),
        reduced.removed.len()
    );
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<()> {
    let tokenizer = a.text.tokenizer()?;
    let reduced = ReducedGraph::read(&a.graph)?;
    let labeled = load_labeled(&a.labeled, a.text.lang)?;
    let tokens = tokenize_labeled(&tokenizer, &labeled.records);
    let params = MiningParams {
        min_pattern_freq: a.min_freq,
        min_fillers: a.min_fillers,
    };
    let (patterns, stats) = extract_patterns(&reduced, &tokens, &params);
    let model = build_model(patterns, stats)?;
    model.write(&a.out)?;
    info!(
        "patterns: {} comments, {} patterns",
        tokens.len(),
        model.len()
    );
    Ok(())
}

fn score_input(
    model: &Path,
    input: &Path,
    text: &TextArgs,
) -> Result<(Vec<reaction_miner::corpus::RawComment>, Vec<EmotionScores>)> {
    let tokenizer = text.tokenizer()?;
    let model = read_model(model)?;
    let comments = load_comments(input, text.lang)?.records;
    let scores = classify_comments(&model, &tokenizer, &comments).map_err(boxed)?;
    Ok((comments, scores))
}

fn classify_cmd(a: ClassifyArgs) -> Result<()> {
    let (comments, scores) = score_input(&a.model, &a.input, &a.text)?;
    write_scores(&a.out, &comments, &scores).map_err(boxed)?;
    let signal = scores.iter().filter(|s| !s.no_signal()).count();
    info!(
        "classify: {} comments, {signal} with signal",
        comments.len()
    );
    Ok(())
}

fn sarcasm_cmd(a: SarcasmArgs) -> Result<()> {
    let thresholds = match &a.thresholds {
        Some(path) => SarcasmThresholds::read(path, a.text.lang)?,
        None => SarcasmThresholds::for_lang(a.text.lang),
    };
    let (comments, scores) = score_input(&a.model, &a.input, &a.text)?;
    let sarcastic = write_sarcasm(&a.out, &comments, &scores, &thresholds).map_err(boxed)?;
    info!(
        "sarcasm: {} comments, {sarcastic} sarcastic",
        comments.len()
    );
    Ok(())
}

fn learn(a: LearnArgs) -> Result<()> {
    let tokenizer = a.text.tokenizer()?;
    let model = read_model(&a.model)?;
    let examples = load_sarcasm_labeled(&a.annotated, a.text.lang)?.records;
    let tokens: Vec<_> = examples
        .par_iter()
        .map(|e| (tokenizer.tokenize(&e.id, &e.text), e.sarcastic))
        .collect();
    let config = LearnerConfig {
        architecture: a.architecture,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
    };
    let run = learn_combos(&model, &tokens, a.n, &config, a.seed)?;
    run.histogram.write(&a.out)?;
    info!(
        "learn-combos: {} examples, final training accuracy {:.4}",
        tokens.len(),
        run.trace.final_accuracy()
    );
    let selected = select_combos(&run.histogram, a.k)?;
    for pair in selected {
        println!("{pair}");
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let report = evaluate_predictions(&a.pred, &a.annotations, a.level).map_err(boxed)?;
    emit(a.out.as_deref(), &report)
}

fn baseline(a: BaselineArgs) -> Result<()> {
    let tokenizer = a.text.tokenizer()?;
    let train = load_sarcasm_labeled(&a.train, a.text.lang)?.records;
    let labeled: Vec<_> = train
        .par_iter()
        .map(|e| (tokenizer.tokenize(&e.id, &e.text), e.sarcastic))
        .collect();
    let model = nb_train(&labeled, a.features)?;
    let test = AnnotationSet::read(&a.test)?;
    let pred = test
        .items()
        .par_iter()
        .map(|item| {
            let tokens = tokenizer.tokenize(&item.id, &item.text);
            (item.id.clone(), nb_predict(&model, &tokens))
        })
        .collect();
    let mut rows = Vec::new();
    for k in 1..=test.annotators().min(3) {
        rows.push((k, metrics(&pred, &agree_labels(&test, k)?)?));
    }
    let method = match a.features {
        Features::Tfidf => "nb-tfidf",
        Features::Bow => "nb-bow",
    };
    emit(a.out.as_deref(), &render_report(method, &rows))
}

fn tune(a: TuneArgs) -> Result<()> {
    let tokenizer = a.text.tokenizer()?;
    let model = read_model(&a.model)?;
    let set = AnnotationSet::read(&a.annotations)?;
    let grid = ThresholdGrid::read(&a.grid)?;
    let best = grid_search_thresholds(&model, &set, &tokenizer, &grid)?;
    let t = &best.thresholds;
    info!("tune-thresholds: {} grid points evaluated", best.evaluated);
    println!(
        "x1={} x2={} y1={} y2={} f1={:.4} precision={:.4} recall={:.4}",
        t.x1, t.x2, t.y1, t.y2, best.report.f1, best.report.precision, best.report.recall
    );
    if let Some(out) = &a.out {
        let mut config = Config::new();
        t.store(&mut config, a.text.lang);
        config.write(out)?;
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut config = SynthConfig::default()
        .with_comments_per_emotion(a.per_emotion)
        .with_sarcasm_rate(a.sarcasm_rate);
    config.posts = a.posts;
    let corpus = synth_corpus(&config, a.seed)?;
    corpus.write_files(&a.out_dir)?;
    if a.annotators >= 2 {
        corpus.write_annotation_file(
            &a.out_dir.join("votes.tsv"),
            a.annotators,
            a.flip_rate,
            a.seed,
        )?;
    }
    info!(
        "synth: {} comments, {} posts, {} sarcastic",
        corpus.labeled.len(),
        corpus.posts.len(),
        corpus.sarcastic_ids.len()
    );
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<(), Failure> {
    let to_failure = |e: PipelineError| Failure {
        code: e.exit_code() as u8,
        error: e.into(),
    };
    let mut config = PipelineConfig::read(&a.config, &a.overrides).map_err(to_failure)?;
    config.no_build = a.no_build;
    config.force = a.force;
    let report = run_pipeline(&config).map_err(to_failure)?;
    let ran = report.ran();
    info!(
        "pipeline: {} stages ran, artifacts in {}",
        ran.len(),
        config.out_dir.display()
    );
    Ok(())
}
