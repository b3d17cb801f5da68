//! Wildcard emotion patterns and their Emotion Degree weights.
//!
//! A pattern is two or three elements with exactly one wildcard slot, e.g.
//! `people are *`. For every pattern the miner records how often it occurs
//! under each emotion label and which distinct words fill its slot. From
//! those counts:
//!
//! * PF(emo, p)  = log(f(p, emo) + 1)
//! * IEF(p)      = 5 / |{emo : f(p, emo) > 0}|
//! * DIV(p)      = log(number of distinct fillers)
//! * ED(emo, p)  = PF · IEF · DIV
//!
//! Every emotion ranks the same pattern inventory by its own ED column.

mod io;
mod mine;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{Emotion, EMOTION_COUNT};
use crate::textproc::{Element, TokenSeq};

pub use io::MODEL_HEADER;
pub use mine::{extract_patterns, MiningParams, DEFAULT_MIN_FILLERS, DEFAULT_MIN_PATTERN_FREQ};

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("invalid pattern `{0}`: {1}")]
    InvalidPattern(String, &'static str),
    #[error("pattern statistics must have at least one occurrence")]
    NoOccurrences,
    #[error("pattern statistics must have at least one filler")]
    NoFillers,
    #[error("{patterns} patterns but {stats} statistics rows")]
    LengthMismatch { patterns: usize, stats: usize },
    #[error("model {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model {path}, line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

/// Two or three elements, exactly one of which is the wildcard.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    elements: Vec<Element>,
}

impl Pattern {
    pub fn new(elements: Vec<Element>) -> Result<Pattern, PatternError> {
        let shown = || {
            elements
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        if !(2..=3).contains(&elements.len()) {
            return Err(PatternError::InvalidPattern(
                shown(),
                "length must be 2 or 3",
            ));
        }
        if elements.iter().filter(|e| e.is_wildcard()).count() != 1 {
            return Err(PatternError::InvalidPattern(
                shown(),
                "exactly one wildcard required",
            ));
        }
        if elements
            .iter()
            .any(|e| !e.is_wildcard() && e.surface().is_empty())
        {
            return Err(PatternError::InvalidPattern(shown(), "empty element"));
        }
        Ok(Pattern { elements })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn wildcard_offset(&self) -> usize {
        self.elements
            .iter()
            .position(Element::is_wildcard)
            .expect("validated on construction")
    }

    /// True when the pattern matches `window` (same length) exactly, with a
    /// word in the wildcard slot.
    pub fn matches_window(&self, window: &[Element]) -> bool {
        window.len() == self.elements.len()
            && self.elements.iter().zip(window).all(|(p, t)| match p {
                Element::Wildcard => t.is_word(),
                _ => p == t,
            })
    }
}

/// Space-separated elements, `*` for the wildcard. A symbol whose surface
/// is `*` or starts with a backslash is escaped with a backslash.
impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match e {
                Element::Wildcard => f.write_str("*")?,
                other => {
                    let s = other.surface();
                    if s == "*" || s.starts_with('\\') {
                        f.write_str("\\")?;
                    }
                    f.write_str(s)?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let elements = s
            .split(' ')
            .map(|token| {
                if token == "*" {
                    return Ok(Element::Wildcard);
                }
                let surface = match token.strip_prefix('\\') {
                    Some(rest) if !rest.is_empty() => rest,
                    _ => token,
                };
                Element::from_surface(surface)
                    .ok_or(PatternError::InvalidPattern(s.to_string(), "bad element"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Pattern::new(elements)
    }
}

/// Per-emotion occurrence counts and slot diversity of one pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternStats {
    freq: [u64; EMOTION_COUNT],
    uew: usize,
    fillers: BTreeSet<String>,
}

impl PatternStats {
    /// From mined fillers; `uew` is the filler count.
    pub fn from_fillers(
        freq: [u64; EMOTION_COUNT],
        fillers: BTreeSet<String>,
    ) -> Result<PatternStats, PatternError> {
        Self::check(&freq, fillers.len())?;
        Ok(PatternStats {
            freq,
            uew: fillers.len(),
            fillers,
        })
    }

    /// From stored counts, without the filler words themselves.
    pub fn from_counts(
        freq: [u64; EMOTION_COUNT],
        uew: usize,
    ) -> Result<PatternStats, PatternError> {
        Self::check(&freq, uew)?;
        Ok(PatternStats {
            freq,
            uew,
            fillers: BTreeSet::new(),
        })
    }

    fn check(freq: &[u64; EMOTION_COUNT], uew: usize) -> Result<(), PatternError> {
        if freq.iter().all(|&f| f == 0) {
            return Err(PatternError::NoOccurrences);
        }
        if uew == 0 {
            return Err(PatternError::NoFillers);
        }
        Ok(())
    }

    /// f(p, emo).
    pub fn freq(&self, emotion: Emotion) -> u64 {
        self.freq[emotion.index()]
    }

    pub fn freqs(&self) -> [u64; EMOTION_COUNT] {
        self.freq
    }

    pub fn total(&self) -> u64 {
        self.freq.iter().sum()
    }

    /// Number of distinct slot fillers.
    pub fn uew(&self) -> usize {
        self.uew
    }

    /// Filler words; empty when the stats were loaded from a model file.
    pub fn fillers(&self) -> &BTreeSet<String> {
        &self.fillers
    }

    /// Number of emotions with a nonzero count.
    pub fn emotion_spread(&self) -> usize {
        self.freq.iter().filter(|&&f| f > 0).count()
    }
}

/// Logarithm used by PF and DIV. The base rescales every ED uniformly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Ten => x.log10(),
        }
    }
}

pub fn pf(stats: &PatternStats, emotion: Emotion) -> f64 {
    pf_in(LogBase::Natural, stats, emotion)
}

pub fn pf_in(base: LogBase, stats: &PatternStats, emotion: Emotion) -> f64 {
    base.log(stats.freq(emotion) as f64 + 1.0)
}

/// In [1, 5].
pub fn ief(stats: &PatternStats) -> f64 {
    EMOTION_COUNT as f64 / stats.emotion_spread() as f64
}

pub fn div(stats: &PatternStats) -> f64 {
    div_in(LogBase::Natural, stats)
}

pub fn div_in(base: LogBase, stats: &PatternStats) -> f64 {
    base.log(stats.uew() as f64)
}

pub fn ed(stats: &PatternStats, emotion: Emotion) -> f64 {
    ed_in(LogBase::Natural, stats, emotion)
}

pub fn ed_in(base: LogBase, stats: &PatternStats, emotion: Emotion) -> f64 {
    // PF and DIV are multiplied first so that swapping their values between
    // two patterns yields bit-identical products.
    pf_in(base, stats, emotion) * div_in(base, stats) * ief(stats)
}

/// Pattern inventory, ED weight matrix and per-emotion rankings.
#[derive(Debug, Clone)]
pub struct EmotionModel {
    patterns: Vec<Pattern>,
    stats: Vec<PatternStats>,
    ed: Vec<[f64; EMOTION_COUNT]>,
    rank: [Vec<usize>; EMOTION_COUNT],
    rank_position: Vec<[u32; EMOTION_COUNT]>,
    base: LogBase,
    matcher: Matcher,
}

pub fn build_model(
    patterns: Vec<Pattern>,
    stats: Vec<PatternStats>,
) -> Result<EmotionModel, PatternError> {
    build_model_in(LogBase::Natural, patterns, stats)
}

pub fn build_model_in(
    base: LogBase,
    patterns: Vec<Pattern>,
    stats: Vec<PatternStats>,
) -> Result<EmotionModel, PatternError> {
    if patterns.len() != stats.len() {
        return Err(PatternError::LengthMismatch {
            patterns: patterns.len(),
            stats: stats.len(),
        });
    }
    let ed: Vec<[f64; EMOTION_COUNT]> = stats
        .iter()
        .map(|s| Emotion::ALL.map(|e| ed_in(base, s, e)))
        .collect();

    // The base rescales every weight by the same factor, so rankings use
    // natural-log weights. Products that are equal in exact arithmetic but
    // round differently per base then cannot reorder the ranking.
    let natural: Vec<[f64; EMOTION_COUNT]> = match base {
        LogBase::Natural => ed.clone(),
        LogBase::Ten => stats
            .iter()
            .map(|s| Emotion::ALL.map(|e| ed_in(LogBase::Natural, s, e)))
            .collect(),
    };
    let rank = Emotion::ALL.map(|emotion| {
        let col = emotion.index();
        let mut order: Vec<usize> = (0..patterns.len()).collect();
        // Stable sort keeps ascending index among equal weights.
        order.sort_by(|&a, &b| natural[b][col].total_cmp(&natural[a][col]));
        order
    });
    let mut rank_position = vec![[0u32; EMOTION_COUNT]; patterns.len()];
    for (col, order) in rank.iter().enumerate() {
        for (pos, &p) in order.iter().enumerate() {
            rank_position[p][col] = pos as u32 + 1;
        }
    }
    let matcher = Matcher::new(&patterns);
    Ok(EmotionModel {
        patterns,
        stats,
        ed,
        rank,
        rank_position,
        base,
        matcher,
    })
}

impl EmotionModel {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn stats(&self) -> &[PatternStats] {
        &self.stats
    }

    pub fn log_base(&self) -> LogBase {
        self.base
    }

    /// ED row of pattern `p`, canonical emotion order.
    pub fn ed_row(&self, p: usize) -> &[f64; EMOTION_COUNT] {
        &self.ed[p]
    }

    pub fn ed(&self, p: usize, emotion: Emotion) -> f64 {
        self.ed[p][emotion.index()]
    }

    /// Pattern indices by descending ED for `emotion`.
    pub fn ranking(&self, emotion: Emotion) -> &[usize] {
        &self.rank[emotion.index()]
    }

    /// 1-based position of pattern `p` in `emotion`'s ranking.
    pub fn rank_position(&self, p: usize, emotion: Emotion) -> u32 {
        self.rank_position[p][emotion.index()]
    }

    pub fn find(&self, pattern: &Pattern) -> Option<usize> {
        self.patterns.iter().position(|p| p == pattern)
    }

    /// The `n` highest-ranked patterns for `emotion`.
    pub fn top(&self, emotion: Emotion, n: usize) -> impl Iterator<Item = &Pattern> {
        self.ranking(emotion)
            .iter()
            .take(n)
            .map(|&p| &self.patterns[p])
    }

    /// Occurrence count per matching pattern index.
    pub fn match_counts(&self, tokens: &TokenSeq) -> BTreeMap<usize, u32> {
        self.matcher.count(&tokens.elements)
    }
}

/// Occurrences of every model pattern in `tokens`, overlapping windows
/// included. The wildcard slot accepts any single word.
pub fn match_patterns(tokens: &TokenSeq, model: &EmotionModel) -> BTreeMap<usize, u32> {
    model.match_counts(tokens)
}

const WILD: u32 = u32::MAX;
const ABSENT: u32 = u32::MAX - 1;

/// Hash index from (shape, literal elements) to pattern index.
#[derive(Debug, Clone, Default)]
struct Matcher {
    vocab: HashMap<Element, u32>,
    shapes: Vec<(usize, usize)>,
    index: HashMap<(u8, u8, [u32; 3]), usize>,
}

impl Matcher {
    fn new(patterns: &[Pattern]) -> Matcher {
        let mut m = Matcher::default();
        let mut shapes = BTreeSet::new();
        for (p, pattern) in patterns.iter().enumerate() {
            let len = pattern.len();
            let wild = pattern.wildcard_offset();
            shapes.insert((len, wild));
            let mut key = [ABSENT; 3];
            for (i, e) in pattern.elements().iter().enumerate() {
                key[i] = if e.is_wildcard() {
                    WILD
                } else {
                    let next = m.vocab.len() as u32;
                    *m.vocab.entry(e.clone()).or_insert(next)
                };
            }
            m.index.entry((len as u8, wild as u8, key)).or_insert(p);
        }
        m.shapes = shapes.into_iter().collect();
        m
    }

    fn count(&self, tokens: &[Element]) -> BTreeMap<usize, u32> {
        let mut counts = BTreeMap::new();
        if self.index.is_empty() {
            return counts;
        }
        let ids: Vec<Option<u32>> = tokens.iter().map(|t| self.vocab.get(t).copied()).collect();
        for i in 0..tokens.len() {
            for &(len, wild) in &self.shapes {
                if i + len > tokens.len() || !tokens[i + wild].is_word() {
                    continue;
                }
                let mut key = [ABSENT; 3];
                let mut known = true;
                for off in 0..len {
                    if off == wild {
                        key[off] = WILD;
                    } else if let Some(id) = ids[i + off] {
                        key[off] = id;
                    } else {
                        known = false;
                        break;
                    }
                }
                if !known {
                    continue;
                }
                if let Some(&p) = self.index.get(&(len as u8, wild as u8, key)) {
                    *counts.entry(p).or_insert(0) += 1;
                }
            }
        }
        counts
    }
}
