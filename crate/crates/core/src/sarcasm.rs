//! Rule-based sarcasm labeling over classified comments.
//!
//! A comment is a candidate when its top-two emotions form one of the
//! configured opposing pairs. With S1 ≥ S2 ≥ S3 its top-three scores, a
//! candidate is sarcastic when
//!
//! * x1 ≤ (S2 − S3) / (S1 − S2) ≤ x2, and
//! * S3 / S2 ≥ y1 and S2 / S1 ≥ y2.
//!
//! Zero denominators make a ratio undefined, and undefined ratios fail.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::corpus::{Emotion, EmotionPair, Lang};
use crate::emoclass::{ClassifyError, EmotionScores};

#[derive(Debug, Error)]
pub enum SarcasmError {
    #[error("invalid sarcasm thresholds: {0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SarcasmThresholds {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub combos: BTreeSet<EmotionPair>,
}

fn default_combos() -> BTreeSet<EmotionPair> {
    [
        EmotionPair::new(Emotion::Angry, Emotion::Haha),
        EmotionPair::new(Emotion::Angry, Emotion::Wow),
    ]
    .into_iter()
    .flatten()
    .collect()
}

impl SarcasmThresholds {
    pub fn new(
        x1: f64,
        x2: f64,
        y1: f64,
        y2: f64,
        combos: BTreeSet<EmotionPair>,
    ) -> Result<Self, SarcasmError> {
        let t = SarcasmThresholds {
            x1,
            x2,
            y1,
            y2,
            combos,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), SarcasmError> {
        let bad = |msg: String| Err(SarcasmError::Invalid(msg));
        if !(self.x1.is_finite() && self.x2.is_finite() && self.x1 >= 0.0) {
            return bad(format!(
                "x1 = {}, x2 = {} must be finite and non-negative",
                self.x1, self.x2
            ));
        }
        if self.x1 > self.x2 {
            return bad(format!("x1 = {} exceeds x2 = {}", self.x1, self.x2));
        }
        for (name, y) in [("y1", self.y1), ("y2", self.y2)] {
            if !(y > 0.0 && y <= 1.0) {
                return bad(format!("{name} = {y} must lie in (0, 1]"));
            }
        }
        if self.combos.is_empty() {
            return bad("combos must not be empty".into());
        }
        Ok(())
    }

    /// English defaults.
    pub fn english() -> Self {
        SarcasmThresholds {
            x1: 0.5,
            x2: 10.0,
            y1: 0.1,
            y2: 0.5,
            combos: default_combos(),
        }
    }

    /// Chinese defaults: comments tend to carry one dominant emotion, so
    /// the closeness floors are lower.
    pub fn chinese() -> Self {
        SarcasmThresholds {
            x1: 0.1,
            x2: 10.0,
            y1: 0.1,
            y2: 0.2,
            combos: default_combos(),
        }
    }

    pub fn for_lang(lang: Lang) -> Self {
        match lang {
            Lang::En => Self::english(),
            Lang::Zh => Self::chinese(),
        }
    }

    /// Reads the `[en]` or `[zh]` section; absent keys keep the language
    /// defaults.
    pub fn from_config(config: &Config, lang: Lang) -> Result<Self, SarcasmError> {
        let section = lang.as_str();
        let defaults = Self::for_lang(lang);
        let combos = match config.get(section, "combos") {
            None => defaults.combos,
            Some(list) => parse_combos(list).map_err(|reason| ConfigError::Value {
                section: section.into(),
                key: "combos".into(),
                value: list.into(),
                reason,
            })?,
        };
        Self::new(
            config.get_or(section, "x1", defaults.x1)?,
            config.get_or(section, "x2", defaults.x2)?,
            config.get_or(section, "y1", defaults.y1)?,
            config.get_or(section, "y2", defaults.y2)?,
            combos,
        )
    }

    pub fn read(path: &Path, lang: Lang) -> Result<Self, SarcasmError> {
        Self::from_config(&Config::read(path)?, lang)
    }

    /// Stores this profile in `config` under the language's section.
    pub fn store(&self, config: &mut Config, lang: Lang) {
        let section = lang.as_str();
        config.set(section, "x1", self.x1.to_string());
        config.set(section, "x2", self.x2.to_string());
        config.set(section, "y1", self.y1.to_string());
        config.set(section, "y2", self.y2.to_string());
        config.set(section, "combos", render_combos(&self.combos));
    }
}

pub fn parse_combos(list: &str) -> Result<BTreeSet<EmotionPair>, String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<EmotionPair>().map_err(|e| e.to_string()))
        .collect()
}

pub fn render_combos(combos: &BTreeSet<EmotionPair>) -> String {
    combos
        .iter()
        .map(EmotionPair::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Why a verdict came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    Sarcastic,
    NotCandidate,
    /// A ratio has a zero denominator.
    DegenerateScores,
    DistanceOutOfRange,
    ScoreRatioBelowFloor,
}

impl VerdictReason {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictReason::Sarcastic => "sarcastic",
            VerdictReason::NotCandidate => "not_candidate",
            VerdictReason::DegenerateScores => "degenerate_scores",
            VerdictReason::DistanceOutOfRange => "distance_out_of_range",
            VerdictReason::ScoreRatioBelowFloor => "score_ratio_below_floor",
        }
    }
}

impl fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SarcasmVerdict {
    pub candidate: bool,
    /// `None` when S1 = S2.
    pub distance_ratio: Option<f64>,
    /// `(r23, r12)`; `None` when S1 or S2 is zero.
    pub score_ratios: Option<(f64, f64)>,
    pub sarcastic: bool,
    pub reason: VerdictReason,
}

impl SarcasmVerdict {
    /// `candidate, distance_ratio, r23, r12, sarcastic, reason`, tab
    /// separated, `undefined` for missing ratios.
    pub fn render(&self) -> String {
        let num = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"));
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            u8::from(self.candidate),
            num(self.distance_ratio),
            num(self.score_ratios.map(|r| r.0)),
            num(self.score_ratios.map(|r| r.1)),
            u8::from(self.sarcastic),
            self.reason
        )
    }
}

pub fn is_candidate(top_pair: (Emotion, Emotion), thresholds: &SarcasmThresholds) -> bool {
    EmotionPair::new(top_pair.0, top_pair.1).is_some_and(|p| thresholds.combos.contains(&p))
}

/// (S2 − S3) / (S1 − S2) on the top-three scores.
pub fn distance_ratio(scores: &EmotionScores) -> Result<Option<f64>, ClassifyError> {
    let (s1, s2, s3) = scores.top3_scores()?;
    Ok(distance_ratio_of(s1, s2, s3))
}

pub fn distance_ratio_of(s1: f64, s2: f64, s3: f64) -> Option<f64> {
    if s1 == s2 {
        None
    } else {
        Some((s2 - s3) / (s1 - s2))
    }
}

/// `(S3 / S2, S2 / S1)` on the top-three scores.
pub fn score_ratios(scores: &EmotionScores) -> Result<Option<(f64, f64)>, ClassifyError> {
    let (s1, s2, s3) = scores.top3_scores()?;
    Ok(score_ratios_of(s1, s2, s3))
}

pub fn score_ratios_of(s1: f64, s2: f64, s3: f64) -> Option<(f64, f64)> {
    if s1 == 0.0 || s2 == 0.0 {
        None
    } else {
        Some((s3 / s2, s2 / s1))
    }
}

pub fn label_sarcasm(
    scores: &EmotionScores,
    thresholds: &SarcasmThresholds,
) -> Result<SarcasmVerdict, ClassifyError> {
    let top = scores.top2()?;
    let (s1, s2, s3) = scores.top3_scores()?;
    Ok(verdict_from(
        is_candidate(top, thresholds),
        s1,
        s2,
        s3,
        thresholds,
    ))
}

fn verdict_from(
    candidate: bool,
    s1: f64,
    s2: f64,
    s3: f64,
    t: &SarcasmThresholds,
) -> SarcasmVerdict {
    let distance_ratio = distance_ratio_of(s1, s2, s3);
    let score_ratios = score_ratios_of(s1, s2, s3);
    let reason = match (distance_ratio, score_ratios) {
        _ if !candidate => VerdictReason::NotCandidate,
        (None, _) | (_, None) => VerdictReason::DegenerateScores,
        (Some(dr), _) if dr < t.x1 || dr > t.x2 => VerdictReason::DistanceOutOfRange,
        (_, Some((r23, r12))) if r23 < t.y1 || r12 < t.y2 => VerdictReason::ScoreRatioBelowFloor,
        _ => VerdictReason::Sarcastic,
    };
    SarcasmVerdict {
        candidate,
        distance_ratio,
        score_ratios,
        sarcastic: reason == VerdictReason::Sarcastic,
        reason,
    }
}
