//! Discovers which top-two emotion combinations characterize sarcasm.
//!
//! Each annotated comment becomes a 5 × n score matrix (row e, column j:
//! rank of emotion e's j-th pattern times its match count). A small learner
//! is trained on the matrices; every epoch records which examples it
//! currently gets right. Sarcastic examples that are learned reliably are
//! then tallied by their emoclass top-two pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{EmotionPair, EMOTION_COUNT};
use crate::emoclass::{classify, EmotionScores};
use crate::patterns::EmotionModel;
use crate::textproc::TokenSeq;

pub const DEFAULT_PATTERN_BUDGET: usize = 100;
/// Correct-training-rate thresholds, in percent.
pub const RATE_THRESHOLDS: [u32; 4] = [100, 90, 80, 70];

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("pattern budget {n} exceeds the model's {patterns} patterns")]
    Budget { n: usize, patterns: usize },
    #[error("pattern budget must be positive")]
    ZeroBudget,
    #[error("training set is empty")]
    EmptyDataset,
    #[error("training set has only one class")]
    SingleClass,
    #[error("score matrices have different widths")]
    Shape,
    #[error("inputs are misaligned: {0}")]
    Misaligned(String),
    #[error("histogram is empty at the 70% threshold")]
    EmptyHistogram,
    #[error("k must lie in 1..=10, got {0}")]
    InvalidK(usize),
    #[error("learner config: {0}")]
    Config(String),
    #[error("combo file {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("combo file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// 5 × n matrix, rows in canonical emotion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn zeros(n: usize) -> ScoreMatrix {
        ScoreMatrix {
            n,
            values: vec![0.0; EMOTION_COUNT * n],
        }
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n..(row + 1) * self.n]
    }

    /// Row-major values.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

pub fn build_matrix(
    tokens: &TokenSeq,
    model: &EmotionModel,
    n: usize,
) -> Result<ScoreMatrix, LearnError> {
    check_budget(model, n)?;
    let counts = model.match_counts(tokens);
    let mut m = ScoreMatrix::zeros(n);
    for (row, emotion) in crate::corpus::Emotion::ALL.into_iter().enumerate() {
        for (j, &p) in model.ranking(emotion).iter().take(n).enumerate() {
            if let Some(&c) = counts.get(&p) {
                m.values[row * n + j] = f64::from(model.rank_position(p, emotion)) * f64::from(c);
            }
        }
    }
    Ok(m)
}

fn check_budget(model: &EmotionModel, n: usize) -> Result<(), LearnError> {
    if n == 0 {
        return Err(LearnError::ZeroBudget);
    }
    if n > model.len() {
        return Err(LearnError::Budget {
            n,
            patterns: model.len(),
        });
    }
    Ok(())
}

/// Builds matrices for many comments in parallel, preserving order.
pub fn build_matrices(
    tokens: &[TokenSeq],
    model: &EmotionModel,
    n: usize,
) -> Result<Vec<ScoreMatrix>, LearnError> {
    check_budget(model, n)?;
    tokens
        .par_iter()
        .map(|t| build_matrix(t, model, n))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Architecture {
    #[default]
    Cnn,
    Logistic,
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cnn" => Ok(Architecture::Cnn),
            "logistic" => Ok(Architecture::Logistic),
            other => Err(format!("unknown architecture `{other}` (cnn|logistic)")),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Cnn => "cnn",
            Architecture::Logistic => "logistic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub architecture: Architecture,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            architecture: Architecture::Cnn,
            epochs: 50,
            learning_rate: 0.1,
            batch_size: 32,
        }
    }
}

impl LearnerConfig {
    fn validate(&self) -> Result<(), LearnError> {
        if self.epochs == 0 {
            return Err(LearnError::Config("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(LearnError::Config("batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(LearnError::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Per-column z-scoring fitted on the training set. Constant columns are
/// centered only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Standardizer {
        let dim = rows.first().map_or(0, |r| r.len());
        let count = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(*r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(*r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v / count).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }
}

const FILTERS: usize = 4;
const KERNEL: usize = 3;

/// Flat parameter vector plus the architecture that interprets it.
#[derive(Debug, Clone, PartialEq)]
struct Net {
    architecture: Architecture,
    width: usize,
    params: Vec<f64>,
}

impl Net {
    fn new(architecture: Architecture, width: usize, rng: &mut ChaCha8Rng) -> Net {
        let count = match architecture {
            Architecture::Cnn => FILTERS * KERNEL + FILTERS + EMOTION_COUNT * FILTERS + 1,
            Architecture::Logistic => EMOTION_COUNT * width + 1,
        };
        let params = match architecture {
            Architecture::Cnn => (0..count).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            Architecture::Logistic => vec![0.0; count],
        };
        Net {
            architecture,
            width,
            params,
        }
    }

    /// Logit for standardized input `x`; adds d(logit)/d(param) · `scale`
    /// to `grad` when given.
    fn logit(&self, x: &[f64], grad: Option<(&mut [f64], f64)>) -> f64 {
        match self.architecture {
            Architecture::Logistic => {
                let (w, b) = self.params.split_at(x.len());
                let z = b[0] + w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
                if let Some((g, s)) = grad {
                    for (gi, xi) in g.iter_mut().zip(x) {
                        *gi += s * xi;
                    }
                    g[x.len()] += s;
                }
                z
            }
            Architecture::Cnn => self.cnn_logit(x, grad),
        }
    }

    // Layout: conv weights [FILTERS × KERNEL], conv biases [FILTERS],
    // dense weights [EMOTION_COUNT × FILTERS], dense bias.
    fn cnn_logit(&self, x: &[f64], grad: Option<(&mut [f64], f64)>) -> f64 {
        let n = self.width;
        let p = &self.params;
        let (conv_w, rest) = p.split_at(FILTERS * KERNEL);
        let (conv_b, rest) = rest.split_at(FILTERS);
        let (dense_w, dense_b) = rest.split_at(EMOTION_COUNT * FILTERS);
        // Rows narrower than the kernel are zero-padded to kernel width.
        let positions = n.saturating_sub(KERNEL) + 1;
        let at = |row: usize, t: usize| if t < n { x[row * n + t] } else { 0.0 };

        let mut pooled = [0.0f64; EMOTION_COUNT * FILTERS];
        let mut argmax = [0usize; EMOTION_COUNT * FILTERS];
        for row in 0..EMOTION_COUNT {
            for f in 0..FILTERS {
                let mut best = f64::NEG_INFINITY;
                let mut best_t = 0;
                for t in 0..positions {
                    let mut z = conv_b[f];
                    for k in 0..KERNEL {
                        z += conv_w[f * KERNEL + k] * at(row, t + k);
                    }
                    if z > best {
                        best = z;
                        best_t = t;
                    }
                }
                pooled[row * FILTERS + f] = best;
                argmax[row * FILTERS + f] = best_t;
            }
        }
        let z = dense_b[0] + dense_w.iter().zip(&pooled).map(|(w, h)| w * h).sum::<f64>();

        if let Some((g, s)) = grad {
            let dense_off = FILTERS * KERNEL + FILTERS;
            for i in 0..EMOTION_COUNT * FILTERS {
                g[dense_off + i] += s * pooled[i];
            }
            g[dense_off + EMOTION_COUNT * FILTERS] += s;
            for row in 0..EMOTION_COUNT {
                for f in 0..FILTERS {
                    let i = row * FILTERS + f;
                    let upstream = s * dense_w[i];
                    let t = argmax[i];
                    for k in 0..KERNEL {
                        g[f * KERNEL + k] += upstream * at(row, t + k);
                    }
                    g[FILTERS * KERNEL + f] += upstream;
                }
            }
        }
        z
    }

    fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x, None))
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn log_loss(p: f64, y: bool) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    if y {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// A trained learner with its input transform.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    standardizer: Standardizer,
    net: Net,
}

impl TrainedModel {
    pub fn architecture(&self) -> Architecture {
        self.net.architecture
    }

    pub fn probability(&self, m: &ScoreMatrix) -> f64 {
        self.net.probability(&self.standardizer.apply(m.as_slice()))
    }

    pub fn predict(&self, m: &ScoreMatrix) -> bool {
        self.probability(m) >= 0.5
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// `correct[i][epoch]`: whether example i was predicted correctly after
    /// that epoch.
    pub correct: Vec<Vec<bool>>,
    /// Class-balanced mean training log-loss after each epoch.
    pub losses: Vec<f64>,
    pub model: TrainedModel,
}

impl TrainTrace {
    pub fn epochs(&self) -> usize {
        self.losses.len()
    }

    pub fn correct_count(&self, example: usize) -> usize {
        self.correct[example].iter().filter(|&&c| c).count()
    }

    /// Correct training rate of one example.
    pub fn rate(&self, example: usize) -> f64 {
        self.correct_count(example) as f64 / self.epochs() as f64
    }

    pub fn rates(&self) -> Vec<f64> {
        (0..self.correct.len()).map(|i| self.rate(i)).collect()
    }

    /// Rate ≥ `percent`/100, compared in integers.
    pub fn reaches(&self, example: usize, percent: u32) -> bool {
        self.correct_count(example) * 100 >= percent as usize * self.epochs()
    }

    /// Fraction of examples predicted correctly after the last epoch.
    pub fn final_accuracy(&self) -> f64 {
        let right = self
            .correct
            .iter()
            .filter(|c| c.last().copied().unwrap_or(false))
            .count();
        right as f64 / self.correct.len().max(1) as f64
    }
}

/// Mini-batch gradient descent on class-balanced mean log-loss. Each class
/// carries half the total weight, so a rare sarcastic class is not simply
/// predicted away. Deterministic for a fixed seed.
pub fn train(
    dataset: &[(ScoreMatrix, bool)],
    config: &LearnerConfig,
    seed: u64,
) -> Result<TrainTrace, LearnError> {
    config.validate()?;
    let Some((first, _)) = dataset.first() else {
        return Err(LearnError::EmptyDataset);
    };
    let width = first.width();
    if dataset.iter().any(|(m, _)| m.width() != width) {
        return Err(LearnError::Shape);
    }
    let positives = dataset.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == dataset.len() {
        return Err(LearnError::SingleClass);
    }

    let raw: Vec<&[f64]> = dataset.iter().map(|(m, _)| m.as_slice()).collect();
    let standardizer = Standardizer::fit(&raw);
    let inputs: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.apply(r)).collect();
    let labels: Vec<bool> = dataset.iter().map(|(_, y)| *y).collect();
    let n = dataset.len() as f64;
    let class_weight = |y: bool| {
        let members = if y {
            positives
        } else {
            dataset.len() - positives
        };
        n / (2.0 * members as f64)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Net::new(config.architecture, width, &mut rng);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut grad = vec![0.0; net.params.len()];
    let mut correct = vec![Vec::with_capacity(config.epochs); dataset.len()];
    let mut losses = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                // d(loss)/d(logit) = p - y; evaluate first, then backprop.
                let p = net.probability(&inputs[i]);
                let err = (p - f64::from(u8::from(labels[i]))) * class_weight(labels[i]);
                net.logit(&inputs[i], Some((&mut grad[..], err)));
            }
            let step = config.learning_rate / batch.len() as f64;
            for (w, g) in net.params.iter_mut().zip(&grad) {
                *w -= step * g;
            }
        }
        let mut loss = 0.0;
        for (i, x) in inputs.iter().enumerate() {
            let p = net.probability(x);
            loss += class_weight(labels[i]) * log_loss(p, labels[i]);
            correct[i].push((p >= 0.5) == labels[i]);
        }
        losses.push(loss / n);
    }

    Ok(TrainTrace {
        correct,
        losses,
        model: TrainedModel { standardizer, net },
    })
}

/// Sarcastic-example counts per top-two pair, one histogram per rate
/// threshold in [`RATE_THRESHOLDS`] order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComboHistogram {
    counts: [BTreeMap<EmotionPair, u64>; 4],
}

impl ComboHistogram {
    /// Count for `pair` at threshold index `t` (0 = 100%, 3 = 70%).
    pub fn count(&self, pair: EmotionPair, t: usize) -> u64 {
        self.counts[t].get(&pair).copied().unwrap_or(0)
    }

    pub fn at(&self, t: usize) -> &BTreeMap<EmotionPair, u64> {
        &self.counts[t]
    }

    pub fn total(&self, t: usize) -> u64 {
        self.counts[t].values().sum()
    }

    /// Counts never shrink as the threshold drops.
    pub fn is_nested(&self) -> bool {
        EmotionPair::all().into_iter().all(|pair| {
            (1..RATE_THRESHOLDS.len()).all(|t| self.count(pair, t) >= self.count(pair, t - 1))
        })
    }

    /// `pair<TAB>c100<TAB>c90<TAB>c80<TAB>c70`, all ten pairs in canonical
    /// order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for pair in EmotionPair::all() {
            out.push_str(&pair.to_string());
            for t in 0..RATE_THRESHOLDS.len() {
                out.push_str(&format!("\t{}", self.count(pair, t)));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<ComboHistogram, String> {
        let mut hist = ComboHistogram::default();
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 1 + RATE_THRESHOLDS.len() {
                return Err(format!("line {}: expected 5 fields", i + 1));
            }
            let pair: EmotionPair = fields[0]
                .parse()
                .map_err(|e| format!("line {}: {e}", i + 1))?;
            for (t, field) in fields[1..].iter().enumerate() {
                let c: u64 = field
                    .parse()
                    .map_err(|_| format!("line {}: bad count `{field}`", i + 1))?;
                if c > 0 {
                    hist.counts[t].insert(pair, c);
                }
            }
        }
        Ok(hist)
    }

    pub fn write(&self, path: &Path) -> Result<(), LearnError> {
        std::fs::write(path, self.render()).map_err(|source| LearnError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<ComboHistogram, LearnError> {
        let text = std::fs::read_to_string(path).map_err(|source| LearnError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ComboHistogram::parse(&text).map_err(|reason| LearnError::Parse {
            path: path.display().to_string(),
            reason,
        })
    }
}

/// Tallies sarcastic examples whose correct training rate reaches each
/// threshold, bucketed by their top-two emotion pair. Examples without a
/// classification signal are skipped.
pub fn combo_histogram(
    dataset: &[(ScoreMatrix, bool)],
    trace: &TrainTrace,
    scores: &[EmotionScores],
) -> Result<ComboHistogram, LearnError> {
    if trace.correct.len() != dataset.len() {
        return Err(LearnError::Misaligned(format!(
            "{} examples, {} traces",
            dataset.len(),
            trace.correct.len()
        )));
    }
    if scores.len() != dataset.len() {
        return Err(LearnError::Misaligned(format!(
            "{} examples, {} score vectors",
            dataset.len(),
            scores.len()
        )));
    }
    let mut hist = ComboHistogram::default();
    for (i, ((_, sarcastic), s)) in dataset.iter().zip(scores).enumerate() {
        if !*sarcastic {
            continue;
        }
        let Ok((a, b)) = s.top2() else { continue };
        let pair = EmotionPair::new(a, b).expect("ranked emotions are distinct");
        for (t, &pct) in RATE_THRESHOLDS.iter().enumerate() {
            if trace.reaches(i, pct) {
                *hist.counts[t].entry(pair).or_insert(0) += 1;
            }
        }
    }
    Ok(hist)
}

/// The `k` pairs with the largest 70%-threshold counts, ties in canonical
/// pair order. Pairs with a zero count are never selected.
pub fn select_combos(hist: &ComboHistogram, k: usize) -> Result<BTreeSet<EmotionPair>, LearnError> {
    if k == 0 || k > 10 {
        return Err(LearnError::InvalidK(k));
    }
    let last = RATE_THRESHOLDS.len() - 1;
    if hist.total(last) == 0 {
        return Err(LearnError::EmptyHistogram);
    }
    let mut ranked: Vec<(EmotionPair, u64)> = hist.at(last).iter().map(|(&p, &c)| (p, c)).collect();
    // BTreeMap iteration is canonical; the stable sort keeps it for ties.
    ranked.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
    Ok(ranked
        .into_iter()
        .filter(|&(_, c)| c > 0)
        .take(k)
        .map(|(p, _)| p)
        .collect())
}

/// Everything one learning run produces.
#[derive(Debug, Clone)]
pub struct ComboRun {
    pub trace: TrainTrace,
    pub histogram: ComboHistogram,
}

/// Matrices, training and histogram for sarcasm-labeled token sequences.
pub fn learn_combos(
    model: &EmotionModel,
    examples: &[(TokenSeq, bool)],
    n: usize,
    config: &LearnerConfig,
    seed: u64,
) -> Result<ComboRun, LearnError> {
    check_budget(model, n)?;
    let prepared: Vec<(ScoreMatrix, EmotionScores)> = examples
        .par_iter()
        .map(|(tokens, _)| {
            let m = build_matrix(tokens, model, n)?;
            let s = classify(tokens, model).map_err(|e| LearnError::Config(e.to_string()))?;
            Ok((m, s))
        })
        .collect::<Result<_, LearnError>>()?;
    let (matrices, scores): (Vec<ScoreMatrix>, Vec<EmotionScores>) = prepared.into_iter().unzip();
    let dataset: Vec<(ScoreMatrix, bool)> = matrices
        .into_iter()
        .zip(examples.iter().map(|(_, y)| *y))
        .collect();
    let trace = train(&dataset, config, seed)?;
    let histogram = combo_histogram(&dataset, &trace, &scores)?;
    Ok(ComboRun { trace, histogram })
}
