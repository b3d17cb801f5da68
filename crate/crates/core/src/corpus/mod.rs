//! Reaction-labeled comments, news posts and the overlap join that turns
//! reaction clicks into distant-supervision labels.

mod emotion;
mod io;
pub mod synth;

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

pub use emotion::{
    Emotion, EmotionPair, Lang, ParseEmotionError, ParseLangError, ParsePairError, EMOTION_COUNT,
};
pub use io::{
    detect_kind, load_comments, load_labeled, load_posts, load_reactions, load_sarcasm_labeled,
    load_texts, parse_comment_line, parse_labeled_line, write_comments, write_labeled, write_posts,
    write_reactions, FileKind, Loaded,
};
pub use synth::{synth_corpus, PlantedPhrase, SynthConfig, SynthCorpus};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {malformed} of {lines} lines are malformed")]
    Format {
        path: String,
        malformed: usize,
        lines: usize,
    },
    #[error("synthetic corpus config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawComment {
    pub id: String,
    pub post_id: String,
    pub user_id: String,
    pub text: String,
    pub lang: Lang,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactionEvent {
    pub post_id: String,
    pub user_id: String,
    pub reaction: Emotion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledComment {
    pub comment: RawComment,
    pub label: Emotion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewsPost {
    pub id: String,
    pub text: String,
    pub lang: Lang,
}

/// A comment with a binary sarcasm label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SarcasmExample {
    pub id: String,
    pub lang: Lang,
    pub sarcastic: bool,
    pub text: String,
}

/// Result of [`overlap_join`].
#[derive(Debug, Clone, Default)]
pub struct JoinOutcome {
    pub labeled: Vec<LabeledComment>,
    /// Comments with no reaction from the same user on the same post.
    pub unmatched: usize,
    /// Reaction events dropped because an earlier event had the same key.
    pub duplicate_reactions: usize,
}

/// Labels every comment whose `(post_id, user_id)` also reacted to the post.
///
/// The first reaction event for a key wins. All comments a user left on a
/// post inherit that one reaction. Output follows comment order.
pub fn overlap_join(comments: &[RawComment], reactions: &[ReactionEvent]) -> JoinOutcome {
    let mut by_key: HashMap<(&str, &str), Emotion> = HashMap::with_capacity(reactions.len());
    let mut duplicate_reactions = 0;
    for event in reactions {
        match by_key.entry((event.post_id.as_str(), event.user_id.as_str())) {
            Entry::Occupied(_) => duplicate_reactions += 1,
            Entry::Vacant(slot) => {
                slot.insert(event.reaction);
            }
        }
    }

    let mut labeled = Vec::new();
    let mut unmatched = 0;
    for comment in comments {
        match by_key.get(&(comment.post_id.as_str(), comment.user_id.as_str())) {
            Some(&label) => labeled.push(LabeledComment {
                comment: comment.clone(),
                label,
            }),
            None => unmatched += 1,
        }
    }
    JoinOutcome {
        labeled,
        unmatched,
        duplicate_reactions,
    }
}

/// Per-emotion label counts and shares.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    pub counts: [u64; EMOTION_COUNT],
    pub total: u64,
    pub shares: [f64; EMOTION_COUNT],
}

impl LabelDistribution {
    pub fn from_counts(counts: [u64; EMOTION_COUNT]) -> Self {
        let total: u64 = counts.iter().sum();
        let mut shares = [0.0; EMOTION_COUNT];
        if total > 0 {
            for (share, &count) in shares.iter_mut().zip(&counts) {
                *share = count as f64 / total as f64;
            }
        }
        LabelDistribution {
            counts,
            total,
            shares,
        }
    }

    pub fn from_labels<I: IntoIterator<Item = Emotion>>(labels: I) -> Self {
        let mut counts = [0u64; EMOTION_COUNT];
        for label in labels {
            counts[label.index()] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn count(&self, emotion: Emotion) -> u64 {
        self.counts[emotion.index()]
    }

    pub fn share(&self, emotion: Emotion) -> f64 {
        self.shares[emotion.index()]
    }

    /// Pointwise sum of counts.
    pub fn merge(&self, other: &LabelDistribution) -> LabelDistribution {
        let mut counts = self.counts;
        for (c, o) in counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        Self::from_counts(counts)
    }

    /// Human-readable table followed by `emotion<TAB>count<TAB>share` lines.
    pub fn render_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<8}{:>12}{:>10}", "emotion", "count", "share");
        for emotion in Emotion::ALL {
            let _ = writeln!(
                out,
                "{:<8}{:>12}{:>10.4}",
                emotion.as_str(),
                self.count(emotion),
                self.share(emotion)
            );
        }
        let _ = writeln!(out, "{:<8}{:>12}", "total", self.total);
        out.push('\n');
        for emotion in Emotion::ALL {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.6}",
                emotion.as_str(),
                self.count(emotion),
                self.share(emotion)
            );
        }
        out
    }
}

pub fn distribution(labeled: &[LabeledComment]) -> LabelDistribution {
    LabelDistribution::from_labels(labeled.iter().map(|l| l.label))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comment(id: &str, post: &str, user: &str) -> RawComment {
        RawComment {
            id: id.into(),
            post_id: post.into(),
            user_id: user.into(),
            text: "some text".into(),
            lang: Lang::En,
        }
    }

    fn reaction(post: &str, user: &str, reaction: Emotion) -> ReactionEvent {
        ReactionEvent {
            post_id: post.into(),
            user_id: user.into(),
            reaction,
        }
    }

    #[test]
    fn join_without_reactions_is_empty() {
        let out = overlap_join(&[comment("c1", "p1", "u1")], &[]);
        assert!(out.labeled.is_empty());
        assert_eq!(out.unmatched, 1);
    }

    #[test]
    fn join_single_pair() {
        let out = overlap_join(
            &[comment("c1", "p1", "u1")],
            &[reaction("p1", "u1", Emotion::Angry)],
        );
        assert_eq!(out.labeled.len(), 1);
        assert_eq!(out.labeled[0].label, Emotion::Angry);
        assert_eq!(out.labeled[0].comment.id, "c1");
    }

    #[test]
    fn join_key_mismatch() {
        let out = overlap_join(
            &[comment("c1", "p1", "u1")],
            &[reaction("p2", "u1", Emotion::Sad)],
        );
        assert!(out.labeled.is_empty());
    }

    #[test]
    fn first_reaction_wins_and_all_comments_inherit() {
        let comments = [
            comment("c1", "p1", "u1"),
            comment("c2", "p1", "u2"),
            comment("c3", "p1", "u1"),
        ];
        let reactions = [
            reaction("p1", "u1", Emotion::Love),
            reaction("p1", "u1", Emotion::Angry),
        ];
        let out = overlap_join(&comments, &reactions);
        assert_eq!(out.duplicate_reactions, 1);
        let ids: Vec<_> = out.labeled.iter().map(|l| l.comment.id.as_str()).collect();
        assert_eq!(ids, ["c1", "c3"]);
        assert!(out.labeled.iter().all(|l| l.label == Emotion::Love));
        assert_eq!(out.unmatched, 1);
    }

    #[test]
    fn singleton_distribution() {
        let d = LabelDistribution::from_labels([Emotion::Love]);
        assert_eq!(d.total, 1);
        assert_eq!(d.share(Emotion::Love), 1.0);
        for e in [Emotion::Angry, Emotion::Haha, Emotion::Wow, Emotion::Sad] {
            assert_eq!(d.share(e), 0.0);
        }
    }

    #[test]
    fn empty_distribution_has_zero_shares() {
        let d = distribution(&[]);
        assert_eq!(d.total, 0);
        assert!(d.shares.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn report_has_machine_readable_lines() {
        let d = LabelDistribution::from_counts([2, 1, 1, 0, 0]);
        let report = d.render_report();
        assert!(report.contains("angry\t2\t0.500000\n"));
        assert!(report.contains("sad\t0\t0.000000\n"));
        assert!(report.contains("total"));
    }
}
