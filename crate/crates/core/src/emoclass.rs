//! Scores text against an [`EmotionModel`]: the match-count vector times the
//! ED matrix gives one raw score per emotion.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::corpus::{Emotion, EMOTION_COUNT};
use crate::patterns::EmotionModel;
use crate::textproc::TokenSeq;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("emotion model has no patterns")]
    EmptyModel,
    #[error("no pattern matched; scores carry no signal")]
    NoSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionScores {
    score: [f64; EMOTION_COUNT],
    ranked: [(Emotion, f64); EMOTION_COUNT],
    matched_patterns: usize,
}

impl EmotionScores {
    /// Ranks raw scores, descending, ties in canonical emotion order.
    pub fn from_scores(score: [f64; EMOTION_COUNT], matched_patterns: usize) -> EmotionScores {
        let mut ranked = Emotion::ALL.map(|e| (e, score[e.index()]));
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        EmotionScores {
            score,
            ranked,
            matched_patterns,
        }
    }

    pub fn score(&self, emotion: Emotion) -> f64 {
        self.score[emotion.index()]
    }

    pub fn scores(&self) -> &[f64; EMOTION_COUNT] {
        &self.score
    }

    pub fn ranked(&self) -> &[(Emotion, f64); EMOTION_COUNT] {
        &self.ranked
    }

    /// Number of distinct patterns that matched.
    pub fn matched_patterns(&self) -> usize {
        self.matched_patterns
    }

    /// True when nothing matched; the ranking is then meaningless.
    pub fn no_signal(&self) -> bool {
        self.matched_patterns == 0
    }

    pub fn top(&self) -> Result<Emotion, ClassifyError> {
        self.top2().map(|(first, _)| first)
    }

    pub fn top2(&self) -> Result<(Emotion, Emotion), ClassifyError> {
        top2(self)
    }

    /// Top-three scores S1 ≥ S2 ≥ S3.
    pub fn top3_scores(&self) -> Result<(f64, f64, f64), ClassifyError> {
        if self.no_signal() {
            return Err(ClassifyError::NoSignal);
        }
        Ok((self.ranked[0].1, self.ranked[1].1, self.ranked[2].1))
    }
}

pub fn classify(tokens: &TokenSeq, model: &EmotionModel) -> Result<EmotionScores, ClassifyError> {
    classify_segments(std::slice::from_ref(tokens), model)
}

/// Classifies several segments as one text. Match windows never cross the
/// boundary between two segments.
pub fn classify_segments(
    segments: &[TokenSeq],
    model: &EmotionModel,
) -> Result<EmotionScores, ClassifyError> {
    if model.is_empty() {
        return Err(ClassifyError::EmptyModel);
    }
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for segment in segments {
        for (p, c) in model.match_counts(segment) {
            *counts.entry(p).or_insert(0) += u64::from(c);
        }
    }
    Ok(scores_from_counts(&counts, model))
}

/// v · W for a sparse match vector.
pub fn scores_from_counts(counts: &BTreeMap<usize, u64>, model: &EmotionModel) -> EmotionScores {
    let mut score = [0.0f64; EMOTION_COUNT];
    for (&p, &c) in counts {
        let row = model.ed_row(p);
        for (s, w) in score.iter_mut().zip(row) {
            *s += c as f64 * w;
        }
    }
    EmotionScores::from_scores(score, counts.len())
}

pub fn top2(scores: &EmotionScores) -> Result<(Emotion, Emotion), ClassifyError> {
    if scores.no_signal() {
        return Err(ClassifyError::NoSignal);
    }
    Ok((scores.ranked[0].0, scores.ranked[1].0))
}

/// `emo<TAB>score` for all five ranked emotions, then the no-signal flag.
/// Scores use the shortest representation that parses back exactly.
pub fn render_scores(scores: &EmotionScores) -> String {
    let mut out = String::new();
    for (e, s) in scores.ranked() {
        out.push_str(&format!("{e}\t{s}\t"));
    }
    out.push(if scores.no_signal() { '1' } else { '0' });
    out
}
