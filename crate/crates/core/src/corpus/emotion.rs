use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// One of the five reaction emotions.
///
/// The declaration order is the canonical order used for matrix rows,
/// serialization columns and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emotion {
    Angry,
    Haha,
    Wow,
    Sad,
    Love,
}

pub const EMOTION_COUNT: usize = 5;

impl Emotion {
    pub const ALL: [Emotion; EMOTION_COUNT] = [
        Emotion::Angry,
        Emotion::Haha,
        Emotion::Wow,
        Emotion::Sad,
        Emotion::Love,
    ];

    /// Position in canonical order.
    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Emotion> {
        Self::ALL.get(index).copied()
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Emotion::Angry => "angry",
            Emotion::Haha => "haha",
            Emotion::Wow => "wow",
            Emotion::Sad => "sad",
            Emotion::Love => "love",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown emotion `{0}` (expected angry, haha, wow, sad or love)")]
pub struct ParseEmotionError(pub String);

impl FromStr for Emotion {
    type Err = ParseEmotionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "angry" => Ok(Emotion::Angry),
            "haha" => Ok(Emotion::Haha),
            "wow" => Ok(Emotion::Wow),
            "sad" => Ok(Emotion::Sad),
            "love" => Ok(Emotion::Love),
            other => Err(ParseEmotionError(other.to_string())),
        }
    }
}

/// Unordered pair of distinct emotions, stored in canonical order.
///
/// The derived `Ord` gives the canonical pair order: (Angry, Haha),
/// (Angry, Wow), ..., (Sad, Love).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmotionPair {
    first: Emotion,
    second: Emotion,
}

impl EmotionPair {
    /// Returns `None` when both emotions are the same.
    pub fn new(a: Emotion, b: Emotion) -> Option<EmotionPair> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(EmotionPair {
                first: a,
                second: b,
            }),
            std::cmp::Ordering::Greater => Some(EmotionPair {
                first: b,
                second: a,
            }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(self) -> Emotion {
        self.first
    }

    pub fn second(self) -> Emotion {
        self.second
    }

    pub fn contains(self, emotion: Emotion) -> bool {
        self.first == emotion || self.second == emotion
    }

    /// All ten pairs in canonical order.
    pub fn all() -> Vec<EmotionPair> {
        let mut pairs = Vec::with_capacity(10);
        for (i, &a) in Emotion::ALL.iter().enumerate() {
            for &b in &Emotion::ALL[i + 1..] {
                pairs.push(EmotionPair {
                    first: a,
                    second: b,
                });
            }
        }
        pairs
    }
}

impl fmt::Display for EmotionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.second)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParsePairError {
    #[error("emotion pair `{0}` must look like `angry-haha`")]
    Shape(String),
    #[error(transparent)]
    Emotion(#[from] ParseEmotionError),
    #[error("emotion pair `{0}` repeats the same emotion")]
    Degenerate(String),
}

impl FromStr for EmotionPair {
    type Err = ParsePairError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| ParsePairError::Shape(s.to_string()))?;
        let a: Emotion = a.trim().parse()?;
        let b: Emotion = b.trim().parse()?;
        EmotionPair::new(a, b).ok_or_else(|| ParsePairError::Degenerate(s.to_string()))
    }
}

/// Supported input languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lang {
    En,
    Zh,
}

impl Lang {
    pub const fn as_str(self) -> &'static str {
        match self {
            Lang::En => "en",
            Lang::Zh => "zh",
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported language tag `{0}` (expected en or zh)")]
pub struct ParseLangError(pub String);

impl FromStr for Lang {
    type Err = ParseLangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Lang::En),
            "zh" => Ok(Lang::Zh),
            other => Err(ParseLangError(other.to_string())),
        }
    }
}
