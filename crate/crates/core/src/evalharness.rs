//! Ground truth from multiple annotators, agreement statistics, metrics,
//! Naive Bayes baselines and threshold tuning.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::corpus::{EmotionPair, Lang};
use crate::emoclass::{classify, EmotionScores};
use crate::patterns::EmotionModel;
use crate::sarcasm::{label_sarcasm, parse_combos, SarcasmThresholds};
use crate::textproc::{Element, TokenSeq, Tokenizer};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("at least two annotators are required, found {0}")]
    TooFewAnnotators(usize),
    #[error("item {id} has {found} labels, expected {expected}")]
    LabelCount {
        id: String,
        found: usize,
        expected: usize,
    },
    #[error("annotation set is empty")]
    Empty,
    #[error("agreement level {k} is outside 1..={m}")]
    Level { k: usize, m: usize },
    #[error("no prediction for item {0}")]
    MissingPrediction(String),
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("threshold grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedItem {
    pub id: String,
    pub lang: Lang,
    pub text: String,
    /// One vote per annotator, `true` = sarcastic.
    pub votes: Vec<bool>,
}

impl AnnotatedItem {
    pub fn positive_votes(&self) -> usize {
        self.votes.iter().filter(|&&v| v).count()
    }
}

/// Items that every annotator labeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    items: Vec<AnnotatedItem>,
    annotators: usize,
}

impl AnnotationSet {
    pub fn new(items: Vec<AnnotatedItem>) -> Result<AnnotationSet, EvalError> {
        let annotators = items.first().ok_or(EvalError::Empty)?.votes.len();
        if annotators < 2 {
            return Err(EvalError::TooFewAnnotators(annotators));
        }
        if let Some(bad) = items.iter().find(|i| i.votes.len() != annotators) {
            return Err(EvalError::LabelCount {
                id: bad.id.clone(),
                found: bad.votes.len(),
                expected: annotators,
            });
        }
        Ok(AnnotationSet { items, annotators })
    }

    /// Builds a set from vote vectors alone, with ids `0, 1, ...`.
    pub fn from_votes(votes: &[Vec<bool>]) -> Result<AnnotationSet, EvalError> {
        Self::new(
            votes
                .iter()
                .enumerate()
                .map(|(i, v)| AnnotatedItem {
                    id: i.to_string(),
                    lang: Lang::En,
                    text: String::new(),
                    votes: v.clone(),
                })
                .collect(),
        )
    }

    pub fn items(&self) -> &[AnnotatedItem] {
        &self.items
    }

    pub fn annotators(&self) -> usize {
        self.annotators
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Reads `text_id<TAB>lang<TAB>l1,...,lm<TAB>text`. Labels must be 0 or
    /// 1; any malformed line is an error.
    pub fn read(path: &Path) -> Result<AnnotationSet, EvalError> {
        let shown = path.display().to_string();
        let io = |source| EvalError::Io {
            path: shown.clone(),
            source,
        };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        let mut items = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let parse = |reason: String| EvalError::Parse {
                path: shown.clone(),
                line: i + 1,
                reason,
            };
            let fields: Vec<&str> = line.splitn(4, '\t').collect();
            if fields.len() != 4 {
                return Err(parse("expected id, lang, labels, text".into()));
            }
            let lang: Lang = fields[1].parse().map_err(|e| parse(format!("{e}")))?;
            let votes = fields[2]
                .split(',')
                .map(|v| match v.trim() {
                    "1" => Ok(true),
                    "0" => Ok(false),
                    other => Err(parse(format!("label `{other}` is not 0 or 1"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            items.push(AnnotatedItem {
                id: fields[0].to_string(),
                lang,
                text: fields[3].to_string(),
                votes,
            });
        }
        AnnotationSet::new(items)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub value: f64,
    /// Every vote fell in one category, so chance agreement is 1.
    pub degenerate: bool,
}

/// Fleiss' kappa over the two categories sarcastic / not sarcastic.
pub fn fleiss_kappa(set: &AnnotationSet) -> Kappa {
    let n = set.annotators() as f64;
    let items = set.len() as f64;
    let mut agreement = 0.0;
    let mut positives = 0usize;
    for item in set.items() {
        let yes = item.positive_votes() as f64;
        let no = n - yes;
        agreement += (yes * yes + no * no - n) / (n * (n - 1.0));
        positives += item.positive_votes();
    }
    let p_bar = agreement / items;
    let p_yes = positives as f64 / (items * n);
    let p_e = p_yes * p_yes + (1.0 - p_yes) * (1.0 - p_yes);
    if p_e == 1.0 {
        return Kappa {
            value: 1.0,
            degenerate: true,
        };
    }
    Kappa {
        value: (p_bar - p_e) / (1.0 - p_e),
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreeGroundTruth {
    pub level: usize,
    pub labels: BTreeMap<String, bool>,
}

impl AgreeGroundTruth {
    pub fn positives(&self) -> BTreeSet<&str> {
        self.labels
            .iter()
            .filter(|(_, &v)| v)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Positive iff at least `k` annotators voted sarcastic.
pub fn agree_labels(set: &AnnotationSet, k: usize) -> Result<AgreeGroundTruth, EvalError> {
    if k == 0 || k > set.annotators() {
        return Err(EvalError::Level {
            k,
            m: set.annotators(),
        });
    }
    Ok(AgreeGroundTruth {
        level: k,
        labels: set
            .items()
            .iter()
            .map(|i| (i.id.clone(), i.positive_votes() >= k))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Some ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

impl MetricReport {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> MetricReport {
        let mut degenerate = false;
        let mut ratio = |num: f64, den: f64| {
            if den > 0.0 {
                num / den
            } else {
                degenerate = true;
                0.0
            }
        };
        let (tpf, fpf, tnf, fnf) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
        let accuracy = ratio(tpf + tnf, tpf + fpf + tnf + fnf);
        let precision = ratio(tpf, tpf + fpf);
        let recall = ratio(tpf, tpf + fnf);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        MetricReport {
            tp,
            fp,
            tn,
            fn_,
            accuracy,
            precision,
            recall,
            f1,
            degenerate,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Compares predictions against every id in `truth`. Extra predictions are
/// ignored.
pub fn metrics(
    pred: &HashMap<String, bool>,
    truth: &AgreeGroundTruth,
) -> Result<MetricReport, EvalError> {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (id, &actual) in &truth.labels {
        let predicted = *pred
            .get(id)
            .ok_or_else(|| EvalError::MissingPrediction(id.clone()))?;
        match (predicted, actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(MetricReport::from_counts(tp, fp, tn, fn_))
}

/// Reads sarcasm predictions. Accepts the sarcasm stage output (id first,
/// sarcastic flag in the sixth column) or plain `id<TAB>0|1` lines.
pub fn read_predictions(path: &Path) -> Result<HashMap<String, bool>, EvalError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: shown.clone(),
        source,
    })?;
    let mut pred = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let flag = match fields.len() {
            2 => fields[1],
            7 => fields[5],
            n => {
                return Err(EvalError::Parse {
                    path: shown,
                    line: i + 1,
                    reason: format!("expected 2 or 7 fields, found {n}"),
                })
            }
        };
        let value = match flag.trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(EvalError::Parse {
                    path: shown,
                    line: i + 1,
                    reason: format!("flag `{other}` is not 0 or 1"),
                })
            }
        };
        pred.insert(fields[0].to_string(), value);
    }
    Ok(pred)
}

/// Per-level metrics laid out as Accuracy, F1, Recall, Precision columns.
pub fn render_report(method: &str, rows: &[(usize, MetricReport)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<8} {:>9} {:>9} {:>9} {:>9}",
        "method", "level", "accuracy", "f1", "recall", "precision"
    );
    for (level, r) in rows {
        let _ = writeln!(
            out,
            "{:<12} {:<8} {:>9.4} {:>9.4} {:>9.4} {:>9.4}{}",
            method,
            format!("agree-{level}"),
            r.accuracy,
            r.f1,
            r.recall,
            r.precision,
            if r.degenerate { "  (degenerate)" } else { "" }
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Features {
    Tfidf,
    Bow,
}

impl std::str::FromStr for Features {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tfidf" | "tf-idf" => Ok(Features::Tfidf),
            "bow" => Ok(Features::Bow),
            other => Err(format!("unknown feature set `{other}` (tfidf|bow)")),
        }
    }
}

/// Multinomial Naive Bayes with add-one smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    features: Features,
    log_prior: [f64; 2],
    log_likelihood: BTreeMap<String, [f64; 2]>,
    idf: BTreeMap<String, f64>,
}

fn terms(tokens: &TokenSeq) -> impl Iterator<Item = &str> {
    tokens
        .elements
        .iter()
        .filter(|e| !e.is_wildcard())
        .map(Element::surface)
}

pub fn nb_train(labeled: &[(TokenSeq, bool)], features: Features) -> Result<NbModel, EvalError> {
    let docs = [
        labeled.iter().filter(|(_, y)| !*y).count(),
        labeled.iter().filter(|(_, y)| *y).count(),
    ];
    if docs[0] == 0 || docs[1] == 0 {
        return Err(EvalError::SingleClass);
    }
    // Integer term counts first, so weights do not depend on input order.
    let mut tf: BTreeMap<&str, [u64; 2]> = BTreeMap::new();
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for (tokens, y) in labeled {
        let class = usize::from(*y);
        let mut seen = BTreeSet::new();
        for t in terms(tokens) {
            tf.entry(t).or_default()[class] += 1;
            if seen.insert(t) {
                *df.entry(t).or_default() += 1;
            }
        }
    }
    let n_docs = labeled.len() as f64;
    let idf: BTreeMap<String, f64> = df
        .iter()
        .map(|(&t, &d)| (t.to_string(), (n_docs / d as f64).ln()))
        .collect();
    let weight = |t: &str, count: u64| match features {
        Features::Bow => count as f64,
        Features::Tfidf => idf[t] * count as f64,
    };
    let vocab = tf.len() as f64;
    let mut totals = [0.0f64; 2];
    for (&t, counts) in &tf {
        for c in 0..2 {
            totals[c] += weight(t, counts[c]);
        }
    }
    let log_likelihood = tf
        .iter()
        .map(|(&t, counts)| {
            let ll = [0, 1].map(|c| ((weight(t, counts[c]) + 1.0) / (totals[c] + vocab)).ln());
            (t.to_string(), ll)
        })
        .collect();
    Ok(NbModel {
        features,
        log_prior: docs.map(|d| (d as f64 / n_docs).ln()),
        log_likelihood,
        idf,
    })
}

impl NbModel {
    /// Log posterior (up to a shared constant) of each class. Unseen terms
    /// are ignored.
    pub fn log_posterior(&self, tokens: &TokenSeq) -> [f64; 2] {
        let mut score = self.log_prior;
        for t in terms(tokens) {
            if let Some(ll) = self.log_likelihood.get(t) {
                let x = match self.features {
                    Features::Bow => 1.0,
                    Features::Tfidf => self.idf[t],
                };
                score[0] += x * ll[0];
                score[1] += x * ll[1];
            }
        }
        score
    }
}

/// Class 1 only when its posterior is strictly larger.
pub fn nb_predict(model: &NbModel, tokens: &TokenSeq) -> bool {
    let [s0, s1] = model.log_posterior(tokens);
    s1 > s0
}

/// Candidate values for each threshold. Points with x1 > x2 are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub combos: BTreeSet<EmotionPair>,
}

impl ThresholdGrid {
    /// Reads the `[grid]` section. Each of x1, x2, y1, y2 is a comma list
    /// (`0.1,0.5`) or an inclusive range `start:stop:step`. `combos` is
    /// optional.
    pub fn from_config(config: &Config) -> Result<ThresholdGrid, EvalError> {
        let axis = |key: &str| -> Result<Vec<f64>, EvalError> {
            let spec = config
                .get("grid", key)
                .ok_or_else(|| EvalError::Grid(format!("missing grid.{key}")))?;
            parse_axis(spec).map_err(|e| EvalError::Grid(format!("grid.{key}: {e}")))
        };
        let combos = match config.get("grid", "combos") {
            Some(list) => parse_combos(list).map_err(EvalError::Grid)?,
            None => SarcasmThresholds::english().combos,
        };
        Ok(ThresholdGrid {
            x1: axis("x1")?,
            x2: axis("x2")?,
            y1: axis("y1")?,
            y2: axis("y2")?,
            combos,
        })
    }

    pub fn read(path: &Path) -> Result<ThresholdGrid, EvalError> {
        Self::from_config(&Config::read(path)?)
    }

    /// Valid points in grid order (x1 slowest, y2 fastest).
    pub fn points(&self) -> Vec<SarcasmThresholds> {
        let mut out = Vec::new();
        for &x1 in &self.x1 {
            for &x2 in &self.x2 {
                for &y1 in &self.y1 {
                    for &y2 in &self.y2 {
                        if let Ok(t) = SarcasmThresholds::new(x1, x2, y1, y2, self.combos.clone()) {
                            out.push(t);
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn parse_axis(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number `{s}`"))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start_s, stop, step_s] => {
            let (start, stop, step) = (num(start_s)?, num(stop)?, num(step_s)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(format!(
                    "range `{spec}` must have step > 0 and stop >= start"
                ));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // Snap to the written precision so 0.1:0.9:0.2 gives 0.3, not
            // 0.30000000000000004.
            let decimals = [start_s, step_s]
                .iter()
                .map(|s| s.trim().split_once('.').map_or(0, |(_, frac)| frac.len()))
                .max()
                .unwrap_or(0);
            (0..count)
                .map(|i| {
                    let v = start + i as f64 * step;
                    format!("{v:.decimals$}").parse().unwrap_or(v)
                })
                .collect()
        }
        [_] => spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("`{spec}` is neither a list nor start:stop:step")),
    };
    if values.is_empty() {
        return Err("empty axis".into());
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub thresholds: SarcasmThresholds,
    pub report: MetricReport,
    pub evaluated: usize,
}

/// Sarcasm predictions for pre-computed scores; no-signal items are
/// predicted not sarcastic.
pub fn predict_sarcasm(
    scored: &[(String, EmotionScores)],
    thresholds: &SarcasmThresholds,
) -> HashMap<String, bool> {
    scored
        .iter()
        .map(|(id, s)| {
            let sarcastic = label_sarcasm(s, thresholds).is_ok_and(|v| v.sarcastic);
            (id.clone(), sarcastic)
        })
        .collect()
}

/// Exhaustive search maximizing F1 against `truth`; ties go to higher
/// precision, then to the earlier grid point.
pub fn grid_search_scores(
    scored: &[(String, EmotionScores)],
    truth: &AgreeGroundTruth,
    grid: &ThresholdGrid,
) -> Result<GridSearchResult, EvalError> {
    let points = grid.points();
    if points.is_empty() {
        return Err(EvalError::Grid("no valid grid point".into()));
    }
    let reports = points
        .par_iter()
        .map(|t| metrics(&predict_sarcasm(scored, t), truth))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = 0;
    for (i, r) in reports.iter().enumerate().skip(1) {
        let b = &reports[best];
        if r.f1 > b.f1 || (r.f1 == b.f1 && r.precision > b.precision) {
            best = i;
        }
    }
    Ok(GridSearchResult {
        thresholds: points[best].clone(),
        report: reports[best],
        evaluated: points.len(),
    })
}

/// Classifies every annotated text, then searches the grid against
/// Agree-2 ground truth.
pub fn grid_search_thresholds(
    model: &EmotionModel,
    annotated: &AnnotationSet,
    tokenizer: &Tokenizer,
    grid: &ThresholdGrid,
) -> Result<GridSearchResult, EvalError> {
    let truth = agree_labels(annotated, 2)?;
    let scored: Vec<(String, EmotionScores)> = annotated
        .items()
        .par_iter()
        .map(|item| {
            let tokens = tokenizer.tokenize(&item.id, &item.text);
            let scores = classify(&tokens, model)
                .unwrap_or_else(|_| EmotionScores::from_scores([0.0; 5], 0));
            (item.id.clone(), scores)
        })
        .collect();
    grid_search_scores(&scored, &truth, grid)
}
