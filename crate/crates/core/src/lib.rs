//! Emotion-pattern mining from reaction-labeled news comments.
//!
//! Comments are labeled by the reaction their author gave the post, words
//! that are subjective are isolated by contrasting comment and news
//! co-occurrence graphs, and wildcard patterns mined from the subjective
//! vocabulary are weighted per emotion. The weighted patterns classify new
//! comments and feed a rule-based sarcasm detector.

pub mod combolearn;
pub mod config;
pub mod coocgraph;
pub mod corpus;
pub mod emoclass;
pub mod evalharness;
pub mod patterns;
pub mod pipeline;
pub mod sarcasm;
pub mod textproc;

pub use corpus::{Emotion, EmotionPair, Lang};
