//! Normalization, English tokenization and frequency-subtraction Chinese
//! segmentation.

mod zh;

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;

use crate::corpus::Lang;

pub use zh::{build_zh_lexicon, segment_zh, LexiconError, ZhLexicon, DEFAULT_LEXICON_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Word,
    Symbol,
    Wildcard,
}

/// Atomic unit of token sequences and patterns.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Word(String),
    /// Maximal run of punctuation or emoji.
    Symbol(String),
    Wildcard,
}

impl Element {
    /// Builds a Word or Symbol from a surface, deciding the kind from its
    /// characters. Returns `None` for empty or mixed surfaces.
    pub fn from_surface(surface: &str) -> Option<Element> {
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return None;
        }
        if surface.chars().all(is_symbol_char) {
            Some(Element::Symbol(surface.to_string()))
        } else {
            Some(Element::Word(surface.to_string()))
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Word(_) => ElementKind::Word,
            Element::Symbol(_) => ElementKind::Symbol,
            Element::Wildcard => ElementKind::Wildcard,
        }
    }

    /// Empty for the wildcard.
    pub fn surface(&self) -> &str {
        match self {
            Element::Word(s) | Element::Symbol(s) => s,
            Element::Wildcard => "",
        }
    }

    pub fn is_word(&self) -> bool {
        matches!(self, Element::Word(_))
    }

    pub fn is_symbol(&self) -> bool {
        matches!(self, Element::Symbol(_))
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, Element::Wildcard)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Wildcard => f.write_str("*"),
            other => f.write_str(other.surface()),
        }
    }
}

/// Punctuation, symbols and emoji: anything that is neither alphanumeric,
/// underscore nor whitespace.
pub fn is_symbol_char(c: char) -> bool {
    !(c.is_alphanumeric() || c == '_' || c.is_whitespace())
}

/// True when every character of the surface is a symbol character.
pub fn is_symbol_surface(surface: &str) -> bool {
    !surface.is_empty() && surface.chars().all(is_symbol_char)
}

/// Tokenized text. Never contains wildcards.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq {
    pub source_id: String,
    pub elements: Vec<Element>,
}

impl TokenSeq {
    pub fn new(source_id: impl Into<String>, elements: Vec<Element>) -> Self {
        TokenSeq {
            source_id: source_id.into(),
            elements,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Surfaces joined by single spaces.
    pub fn render(&self) -> String {
        let surfaces: Vec<&str> = self.elements.iter().map(Element::surface).collect();
        surfaces.join(" ")
    }
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:https?://|www\.)\S+").unwrap())
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@\w+").unwrap())
}

/// Lowercases, maps URLs to `url` and @-mentions to `user`, and collapses
/// whitespace. CJK text passes through unchanged.
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let no_urls = url_re().replace_all(&lowered, " url ");
    let no_mentions = mention_re().replace_all(&no_urls, " user ");
    let mut out = String::with_capacity(no_mentions.len());
    for piece in no_mentions.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(piece);
    }
    out
}

/// Splits normalized text on whitespace, then peels leading and trailing
/// symbol runs off each chunk. Interior punctuation stays inside the word.
pub fn tokenize_en(text: &str) -> Vec<Element> {
    let mut elements = Vec::new();
    for chunk in text.split_whitespace() {
        let Some(word_start) = chunk.find(|c: char| !is_symbol_char(c)) else {
            elements.push(Element::Symbol(chunk.to_string()));
            continue;
        };
        let word_end = chunk
            .char_indices()
            .rev()
            .find(|&(_, c)| !is_symbol_char(c))
            .map(|(i, c)| i + c.len_utf8())
            .expect("chunk has a non-symbol char");
        if word_start > 0 {
            elements.push(Element::Symbol(chunk[..word_start].to_string()));
        }
        elements.push(Element::Word(chunk[word_start..word_end].to_string()));
        if word_end < chunk.len() {
            elements.push(Element::Symbol(chunk[word_end..].to_string()));
        }
    }
    elements
}

/// Language-aware text-to-tokens front end shared by every stage.
#[derive(Debug, Clone)]
pub enum Tokenizer {
    English,
    Chinese(ZhLexicon),
}

impl Tokenizer {
    pub fn lang(&self) -> Lang {
        match self {
            Tokenizer::English => Lang::En,
            Tokenizer::Chinese(_) => Lang::Zh,
        }
    }

    /// Normalizes then tokenizes.
    pub fn tokenize(&self, source_id: &str, text: &str) -> TokenSeq {
        let normalized = normalize(text);
        let elements = match self {
            Tokenizer::English => tokenize_en(&normalized),
            Tokenizer::Chinese(lexicon) => segment_zh(&normalized, lexicon),
        };
        TokenSeq::new(source_id, elements)
    }
}
