//! Staged, file-based pipeline:
//! ingest → lexicon (zh) → graphs → reduce → patterns → classify → sarcasm
//! → evaluate.
//!
//! Every stage reads its inputs from disk and writes its artifacts to the
//! output directory. A stage is skipped when all of its outputs exist and
//! none is older than any of its inputs.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime};

use log::info;
use rayon::prelude::*;
use thiserror::Error;

use crate::combolearn::{LearnerConfig, DEFAULT_PATTERN_BUDGET};
use crate::config::Config;
use crate::coocgraph::{build_graph, reduce_graph, CoocGraph, ReducedGraph, DEFAULT_DOMINANCE};
use crate::corpus::{
    load_comments, load_labeled, load_posts, load_reactions, overlap_join, write_labeled,
    LabelDistribution, LabeledComment, Lang, RawComment,
};
use crate::emoclass::{classify, render_scores, EmotionScores};
use crate::evalharness::{agree_labels, metrics, read_predictions, render_report, AnnotationSet};
use crate::patterns::{build_model, extract_patterns, EmotionModel, MiningParams};
use crate::sarcasm::{label_sarcasm, parse_combos, SarcasmThresholds};
use crate::textproc::{
    build_zh_lexicon, normalize, TokenSeq, Tokenizer, ZhLexicon, DEFAULT_LEXICON_THRESHOLD,
};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Lexicon,
    Graphs,
    Reduce,
    Patterns,
    Classify,
    Sarcasm,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Lexicon,
        Stage::Graphs,
        Stage::Reduce,
        Stage::Patterns,
        Stage::Classify,
        Stage::Sarcasm,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Lexicon => "lexicon",
            Stage::Graphs => "graphs",
            Stage::Reduce => "reduce",
            Stage::Patterns => "patterns",
            Stage::Classify => "classify",
            Stage::Sarcasm => "sarcasm",
            Stage::Evaluate => "evaluate",
        }
    }

    /// Process exit code when this stage fails.
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Ingest => 10,
            Stage::Lexicon => 11,
            Stage::Graphs => 12,
            Stage::Reduce => 13,
            Stage::Patterns => 14,
            Stage::Classify => 15,
            Stage::Sarcasm => 16,
            Stage::Evaluate => 17,
        }
    }

    /// Stages that produce the model.
    pub fn is_build(self) -> bool {
        self <= Stage::Patterns
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const CONFIG_EXIT_CODE: i32 = 2;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: BoxError,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => CONFIG_EXIT_CODE,
            PipelineError::Stage { stage, .. } => stage.exit_code(),
        }
    }
}

/// Artifact paths inside the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub labeled: PathBuf,
    pub distribution: PathBuf,
    pub lexicon: PathBuf,
    pub subjective_graph: PathBuf,
    pub objective_graph: PathBuf,
    pub reduced_graph: PathBuf,
    pub model: PathBuf,
    pub scores: PathBuf,
    pub sarcasm: PathBuf,
    pub report: PathBuf,
}

impl Artifacts {
    pub fn in_dir(dir: &Path) -> Artifacts {
        Artifacts {
            labeled: dir.join("labeled.tsv"),
            distribution: dir.join("distribution.txt"),
            lexicon: dir.join("lexicon.tsv"),
            subjective_graph: dir.join("subjective.graph"),
            objective_graph: dir.join("objective.graph"),
            reduced_graph: dir.join("reduced.graph"),
            model: dir.join("model.tsv"),
            scores: dir.join("scores.tsv"),
            sarcasm: dir.join("sarcasm.tsv"),
            report: dir.join("report.txt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub lang: Lang,
    pub comments: PathBuf,
    pub reactions: PathBuf,
    pub posts: PathBuf,
    /// Comments to classify; defaults to `comments`.
    pub classify_input: PathBuf,
    pub annotations: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub lexicon_threshold: u64,
    pub dominance: f64,
    pub mining: MiningParams,
    pub thresholds: SarcasmThresholds,
    /// Used by combo learning, which is not a pipeline stage.
    pub learner: LearnerConfig,
    pub pattern_budget: usize,
    pub seed: u64,
    /// Use the existing model instead of running the build stages.
    pub no_build: bool,
    /// Ignore staleness and run every stage.
    pub force: bool,
    /// Config file, treated as an input of every stage.
    pub source: Option<PathBuf>,
}

impl PipelineConfig {
    /// Minimal English config with defaults for everything else.
    pub fn new(comments: &Path, reactions: &Path, posts: &Path, out_dir: &Path) -> Self {
        PipelineConfig {
            lang: Lang::En,
            comments: comments.to_path_buf(),
            reactions: reactions.to_path_buf(),
            posts: posts.to_path_buf(),
            classify_input: comments.to_path_buf(),
            annotations: None,
            out_dir: out_dir.to_path_buf(),
            lexicon_threshold: DEFAULT_LEXICON_THRESHOLD,
            dominance: DEFAULT_DOMINANCE,
            mining: MiningParams::default(),
            thresholds: SarcasmThresholds::english(),
            learner: LearnerConfig::default(),
            pattern_budget: DEFAULT_PATTERN_BUDGET,
            seed: 0,
            no_build: false,
            force: false,
            source: None,
        }
    }

    /// Reads the pipeline settings from a parsed config. Relative paths are
    /// resolved against `base`.
    ///
    /// ```text
    /// lang = en
    /// out_dir = work
    /// seed = 7
    /// [input]
    /// comments = comments.tsv
    /// reactions = reactions.tsv
    /// posts = posts.tsv
    /// classify = heldout.tsv      # optional
    /// annotations = annotated.tsv # optional
    /// [lexicon]
    /// threshold = 5
    /// [graph]
    /// dominance = 0.5
    /// [patterns]
    /// min_freq = 10
    /// min_fillers = 3
    /// [sarcasm]
    /// thresholds = thresholds.conf # optional, [en]/[zh] profile file
    /// x1 = 0.5                     # optional inline overrides
    /// [learner]
    /// architecture = cnn
    /// epochs = 50
    /// learning_rate = 0.1
    /// batch_size = 32
    /// n = 100
    /// ```
    pub fn from_config(config: &Config, base: &Path) -> Result<Self, PipelineError> {
        let err = |e: crate::config::ConfigError| PipelineError::Config(e.to_string());
        let path = |section: &str, key: &str| -> Option<PathBuf> {
            config.get(section, key).map(|p| base.join(p))
        };
        let required = |section: &str, key: &str| {
            path(section, key)
                .ok_or_else(|| PipelineError::Config(format!("missing {section}.{key}")))
        };
        let lang: Lang = config
            .get_parsed("", "lang")
            .map_err(err)?
            .unwrap_or(Lang::En);
        let comments = required("input", "comments")?;

        let mut thresholds = match path("sarcasm", "thresholds") {
            Some(file) => SarcasmThresholds::read(&file, lang)
                .map_err(|e| PipelineError::Config(e.to_string()))?,
            None => SarcasmThresholds::for_lang(lang),
        };
        if let Some(v) = config.get_parsed("sarcasm", "x1").map_err(err)? {
            thresholds.x1 = v;
        }
        if let Some(v) = config.get_parsed("sarcasm", "x2").map_err(err)? {
            thresholds.x2 = v;
        }
        if let Some(v) = config.get_parsed("sarcasm", "y1").map_err(err)? {
            thresholds.y1 = v;
        }
        if let Some(v) = config.get_parsed("sarcasm", "y2").map_err(err)? {
            thresholds.y2 = v;
        }
        if let Some(list) = config.get("sarcasm", "combos") {
            thresholds.combos = parse_combos(list).map_err(PipelineError::Config)?;
        }
        thresholds
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;

        let mining = MiningParams {
            min_pattern_freq: config
                .get_or(
                    "patterns",
                    "min_freq",
                    MiningParams::default().min_pattern_freq,
                )
                .map_err(err)?,
            min_fillers: config
                .get_or(
                    "patterns",
                    "min_fillers",
                    MiningParams::default().min_fillers,
                )
                .map_err(err)?,
        };
        let defaults = LearnerConfig::default();
        let learner = LearnerConfig {
            architecture: config
                .get_or("learner", "architecture", defaults.architecture)
                .map_err(err)?,
            epochs: config
                .get_or("learner", "epochs", defaults.epochs)
                .map_err(err)?,
            learning_rate: config
                .get_or("learner", "learning_rate", defaults.learning_rate)
                .map_err(err)?,
            batch_size: config
                .get_or("learner", "batch_size", defaults.batch_size)
                .map_err(err)?,
        };
        Ok(PipelineConfig {
            lang,
            classify_input: path("input", "classify").unwrap_or_else(|| comments.clone()),
            comments,
            reactions: required("input", "reactions")?,
            posts: required("input", "posts")?,
            annotations: path("input", "annotations"),
            out_dir: path("", "out_dir").unwrap_or_else(|| base.join("work")),
            lexicon_threshold: config
                .get_or("lexicon", "threshold", DEFAULT_LEXICON_THRESHOLD)
                .map_err(err)?,
            dominance: config
                .get_or("graph", "dominance", DEFAULT_DOMINANCE)
                .map_err(err)?,
            mining,
            thresholds,
            learner,
            pattern_budget: config
                .get_or("learner", "n", DEFAULT_PATTERN_BUDGET)
                .map_err(err)?,
            seed: config.get_or("", "seed", 0u64).map_err(err)?,
            no_build: false,
            force: false,
            source: None,
        })
    }

    pub fn read(path: &Path, overrides: &[String]) -> Result<Self, PipelineError> {
        let mut config = Config::read(path).map_err(|e| PipelineError::Config(e.to_string()))?;
        for o in overrides {
            config
                .apply_override(o)
                .map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let mut pc = Self::from_config(&config, base)?;
        pc.source = Some(path.to_path_buf());
        Ok(pc)
    }

    pub fn artifacts(&self) -> Artifacts {
        Artifacts::in_dir(&self.out_dir)
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let mut inputs = vec![&self.classify_input];
        if !self.no_build {
            inputs.extend([&self.comments, &self.reactions, &self.posts]);
        }
        inputs.extend(self.annotations.iter());
        for p in inputs {
            if !p.is_file() {
                return Err(PipelineError::Config(format!(
                    "input file {} does not exist",
                    p.display()
                )));
            }
        }
        if !(self.dominance > 0.0 && self.dominance.is_finite()) {
            return Err(PipelineError::Config(
                "graph.dominance must be positive".into(),
            ));
        }
        if self.lexicon_threshold == 0 {
            return Err(PipelineError::Config(
                "lexicon.threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    UpToDate,
    /// Not applicable: no annotations, English lexicon, or `no_build`.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    pub wall: Duration,
    pub input_records: usize,
    pub output_records: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineReport {
    pub stages: Vec<StageRecord>,
}

impl PipelineReport {
    pub fn status(&self, stage: Stage) -> Option<StageStatus> {
        self.stages
            .iter()
            .find(|r| r.stage == stage)
            .map(|r| r.status)
    }

    pub fn ran(&self) -> Vec<Stage> {
        self.stages
            .iter()
            .filter(|r| r.status == StageStatus::Ran)
            .map(|r| r.stage)
            .collect()
    }
}

fn mtime(path: &Path) -> Option<SystemTime> {
    std::fs::metadata(path).and_then(|m| m.modified()).ok()
}

/// All outputs exist and none is older than any input.
pub fn is_fresh(inputs: &[&Path], outputs: &[&Path]) -> bool {
    let Some(oldest_output) = outputs
        .iter()
        .map(|p| mtime(p))
        .collect::<Option<Vec<_>>>()
        .and_then(|v| v.into_iter().min())
    else {
        return false;
    };
    inputs
        .iter()
        .all(|p| mtime(p).is_some_and(|t| t <= oldest_output))
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    report: PipelineReport,
}

impl Runner<'_> {
    fn stage(
        &mut self,
        stage: Stage,
        inputs: &[&Path],
        outputs: &[&Path],
        body: impl FnOnce() -> Result<(usize, usize), BoxError>,
    ) -> Result<(), PipelineError> {
        let mut all_inputs: Vec<&Path> = inputs.to_vec();
        if let Some(src) = &self.config.source {
            all_inputs.push(src);
        }
        if !self.config.force && is_fresh(&all_inputs, outputs) {
            info!("stage {stage}: up to date, skipped");
            self.report.stages.push(StageRecord {
                stage,
                status: StageStatus::UpToDate,
                wall: Duration::ZERO,
                input_records: 0,
                output_records: 0,
            });
            return Ok(());
        }
        let start = Instant::now();
        let (input_records, output_records) =
            body().map_err(|source| PipelineError::Stage { stage, source })?;
        let wall = start.elapsed();
        info!(
            "stage {stage}: {:.3}s, {input_records} records in, {output_records} records out",
            wall.as_secs_f64()
        );
        self.report.stages.push(StageRecord {
            stage,
            status: StageStatus::Ran,
            wall,
            input_records,
            output_records,
        });
        Ok(())
    }

    fn not_applicable(&mut self, stage: Stage) {
        info!("stage {stage}: not applicable");
        self.report.stages.push(StageRecord {
            stage,
            status: StageStatus::NotApplicable,
            wall: Duration::ZERO,
            input_records: 0,
            output_records: 0,
        });
    }
}

/// Builds the tokenizer for `lang`, loading the lexicon for Chinese.
pub fn tokenizer_for(lang: Lang, lexicon: &Path) -> Result<Tokenizer, BoxError> {
    Ok(match lang {
        Lang::En => Tokenizer::English,
        Lang::Zh => Tokenizer::Chinese(ZhLexicon::read(lexicon)?),
    })
}

/// Tokenizes in parallel, preserving order.
pub fn tokenize_all<'a, I>(tokenizer: &Tokenizer, items: I) -> Vec<TokenSeq>
where
    I: IntoParallelIterator<Item = (&'a str, &'a str)>,
    I::Iter: IndexedParallelIterator,
{
    items
        .into_par_iter()
        .map(|(id, text)| tokenizer.tokenize(id, text))
        .collect()
}

pub fn tokenize_labeled(
    tokenizer: &Tokenizer,
    labeled: &[LabeledComment],
) -> Vec<(TokenSeq, crate::corpus::Emotion)> {
    labeled
        .par_iter()
        .map(|l| (tokenizer.tokenize(&l.comment.id, &l.comment.text), l.label))
        .collect()
}

/// Ingest → graphs → reduce → patterns on in-memory data.
pub fn build_model_from(
    tokenizer: &Tokenizer,
    labeled: &[LabeledComment],
    posts: &[crate::corpus::NewsPost],
    dominance: f64,
    mining: &MiningParams,
) -> Result<EmotionModel, BoxError> {
    let tokens = tokenize_labeled(tokenizer, labeled);
    let seqs: Vec<TokenSeq> = tokens.iter().map(|(s, _)| s.clone()).collect();
    let subjective = build_graph(&seqs);
    let objective = build_graph(&tokenize_all(
        tokenizer,
        posts.par_iter().map(|p| (p.id.as_str(), p.text.as_str())),
    ));
    let reduced = reduce_graph(&subjective, &objective, dominance)?;
    let (patterns, stats) = extract_patterns(&reduced, &tokens, mining);
    Ok(build_model(patterns, stats)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, BoxError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        format!("cannot create {}: {e}", path.display())
    })?))
}

/// Scores for every comment, in input order.
pub fn classify_comments(
    model: &EmotionModel,
    tokenizer: &Tokenizer,
    comments: &[RawComment],
) -> Result<Vec<EmotionScores>, BoxError> {
    comments
        .par_iter()
        .map(|c| classify(&tokenizer.tokenize(&c.id, &c.text), model).map_err(BoxError::from))
        .collect()
}

/// Writes `comment_id<TAB>emo1<TAB>score1...<TAB>nosignal` lines.
pub fn write_scores(
    path: &Path,
    comments: &[RawComment],
    scores: &[EmotionScores],
) -> Result<(), BoxError> {
    let mut out = create(path)?;
    for (c, s) in comments.iter().zip(scores) {
        writeln!(out, "{}\t{}", c.id, render_scores(s))?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `comment_id<TAB>candidate<TAB>distance_ratio<TAB>r23<TAB>r12<TAB>
/// sarcastic<TAB>reason` lines. Returns the number of sarcastic comments.
pub fn write_sarcasm(
    path: &Path,
    comments: &[RawComment],
    scores: &[EmotionScores],
    thresholds: &SarcasmThresholds,
) -> Result<usize, BoxError> {
    let mut out = create(path)?;
    let mut sarcastic = 0;
    for (c, s) in comments.iter().zip(scores) {
        match label_sarcasm(s, thresholds) {
            Ok(v) => {
                sarcastic += usize::from(v.sarcastic);
                writeln!(out, "{}\t{}", c.id, v.render())?;
            }
            Err(_) => writeln!(
                out,
                "{}\t0\tundefined\tundefined\tundefined\t0\tno_signal",
                c.id
            )?,
        }
    }
    out.flush()?;
    Ok(sarcastic)
}

/// Per-level metrics for every agreement level of the annotation set.
pub fn evaluate_predictions(
    predictions: &Path,
    annotations: &Path,
    levels: Option<usize>,
) -> Result<String, BoxError> {
    let pred = read_predictions(predictions)?;
    let set = AnnotationSet::read(annotations)?;
    let levels: Vec<usize> = match levels {
        Some(k) => vec![k],
        None => (1..=set.annotators().min(3)).collect(),
    };
    let mut rows = Vec::new();
    for k in levels {
        rows.push((k, metrics(&pred, &agree_labels(&set, k)?)?));
    }
    Ok(render_report("patterns", &rows))
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| {
        PipelineError::Config(format!("cannot create {}: {e}", config.out_dir.display()))
    })?;
    let a = config.artifacts();
    let lang = config.lang;
    let mut run = Runner {
        config,
        report: PipelineReport::default(),
    };

    if config.no_build {
        for stage in [Stage::Ingest, Stage::Lexicon, Stage::Graphs, Stage::Reduce] {
            run.not_applicable(stage);
        }
        if !a.model.is_file() {
            return Err(PipelineError::Stage {
                stage: Stage::Patterns,
                source: format!(
                    "--no-build given but model {} is missing",
                    a.model.display()
                )
                .into(),
            });
        }
        run.not_applicable(Stage::Patterns);
    } else {
        run.stage(
            Stage::Ingest,
            &[&config.comments, &config.reactions],
            &[&a.labeled, &a.distribution],
            || {
                let comments = load_comments(&config.comments, lang)?;
                let reactions = load_reactions(&config.reactions)?;
                let joined = overlap_join(&comments.records, &reactions.records);
                write_labeled(&a.labeled, &joined.labeled)?;
                let dist = LabelDistribution::from_labels(joined.labeled.iter().map(|l| l.label));
                std::fs::write(&a.distribution, dist.render_report())?;
                if joined.duplicate_reactions > 0 {
                    log::warn!(
                        "{} duplicate reaction events ignored",
                        joined.duplicate_reactions
                    );
                }
                Ok((comments.records.len(), joined.labeled.len()))
            },
        )?;

        if lang == Lang::Zh {
            run.stage(
                Stage::Lexicon,
                &[&config.comments, &config.posts],
                &[&a.lexicon],
                || {
                    let comments = load_comments(&config.comments, lang)?;
                    let posts = load_posts(&config.posts, lang)?;
                    let texts: Vec<String> = comments
                        .records
                        .par_iter()
                        .map(|c| normalize(&c.text))
                        .chain(posts.records.par_iter().map(|p| normalize(&p.text)))
                        .collect();
                    let lexicon = build_zh_lexicon(&texts, config.lexicon_threshold)?;
                    lexicon.write(&a.lexicon)?;
                    Ok((texts.len(), lexicon.len()))
                },
            )?;
        } else {
            run.not_applicable(Stage::Lexicon);
        }

        let lexicon_input: Vec<&Path> = match lang {
            Lang::Zh => vec![&a.lexicon],
            Lang::En => vec![],
        };
        let mut graph_inputs: Vec<&Path> = vec![&a.labeled, &config.posts];
        graph_inputs.extend(&lexicon_input);
        run.stage(
            Stage::Graphs,
            &graph_inputs,
            &[&a.subjective_graph, &a.objective_graph],
            || {
                let tokenizer = tokenizer_for(lang, &a.lexicon)?;
                let labeled = load_labeled(&a.labeled, lang)?;
                let posts = load_posts(&config.posts, lang)?;
                let subjective = build_graph(&tokenize_all(
                    &tokenizer,
                    labeled
                        .records
                        .par_iter()
                        .map(|l| (l.comment.id.as_str(), l.comment.text.as_str())),
                ));
                let objective = build_graph(&tokenize_all(
                    &tokenizer,
                    posts
                        .records
                        .par_iter()
                        .map(|p| (p.id.as_str(), p.text.as_str())),
                ));
                subjective.write(&a.subjective_graph)?;
                objective.write(&a.objective_graph)?;
                Ok((
                    labeled.records.len() + posts.records.len(),
                    subjective.node_count() + objective.node_count(),
                ))
            },
        )?;

        run.stage(
            Stage::Reduce,
            &[&a.subjective_graph, &a.objective_graph],
            &[&a.reduced_graph],
            || {
                let subjective = CoocGraph::read(&a.subjective_graph)?;
                let objective = CoocGraph::read(&a.objective_graph)?;
                let reduced = reduce_graph(&subjective, &objective, config.dominance)?;
                reduced.write(&a.reduced_graph)?;
                Ok((subjective.node_count(), reduced.graph.node_count()))
            },
        )?;

        let mut pattern_inputs: Vec<&Path> = vec![&a.reduced_graph, &a.labeled];
        pattern_inputs.extend(&lexicon_input);
        run.stage(Stage::Patterns, &pattern_inputs, &[&a.model], || {
            let tokenizer = tokenizer_for(lang, &a.lexicon)?;
            let reduced = ReducedGraph::read(&a.reduced_graph)?;
            let labeled = load_labeled(&a.labeled, lang)?;
            let tokens = tokenize_labeled(&tokenizer, &labeled.records);
            let (patterns, stats) = extract_patterns(&reduced, &tokens, &config.mining);
            let model = build_model(patterns, stats)?;
            model.write(&a.model)?;
            Ok((tokens.len(), model.len()))
        })?;
    }

    let lexicon_input: Vec<&Path> = match lang {
        Lang::Zh => vec![&a.lexicon],
        Lang::En => vec![],
    };
    let mut classify_inputs: Vec<&Path> = vec![&a.model, &config.classify_input];
    classify_inputs.extend(&lexicon_input);
    let load_and_score = || -> Result<(Vec<RawComment>, Vec<EmotionScores>), BoxError> {
        let tokenizer = tokenizer_for(lang, &a.lexicon)?;
        let model = EmotionModel::read(&a.model)?;
        let comments = load_comments(&config.classify_input, lang)?.records;
        let scores = classify_comments(&model, &tokenizer, &comments)?;
        Ok((comments, scores))
    };
    run.stage(Stage::Classify, &classify_inputs, &[&a.scores], || {
        let (comments, scores) = load_and_score()?;
        write_scores(&a.scores, &comments, &scores)?;
        let signal = scores.iter().filter(|s| !s.no_signal()).count();
        Ok((comments.len(), signal))
    })?;

    run.stage(Stage::Sarcasm, &classify_inputs, &[&a.sarcasm], || {
        let (comments, scores) = load_and_score()?;
        let sarcastic = write_sarcasm(&a.sarcasm, &comments, &scores, &config.thresholds)?;
        Ok((comments.len(), sarcastic))
    })?;

    match &config.annotations {
        Some(annotations) => {
            run.stage(
                Stage::Evaluate,
                &[&a.sarcasm, annotations],
                &[&a.report],
                || {
                    let report = evaluate_predictions(&a.sarcasm, annotations, None)?;
                    std::fs::write(&a.report, &report)?;
                    Ok((report.lines().count().saturating_sub(1), 1))
                },
            )?;
        }
        None => run.not_applicable(Stage::Evaluate),
    }

    Ok(run.report)
}
