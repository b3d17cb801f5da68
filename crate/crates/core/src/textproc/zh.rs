//! Chinese word discovery by hierarchical frequency subtraction, and greedy
//! longest-match segmentation against the resulting lexicon.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use super::{is_symbol_char, Element};

pub const DEFAULT_LEXICON_THRESHOLD: u64 = 5;

const MIN_WORD: usize = 2;
const MAX_WORD: usize = 4;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon threshold must be positive")]
    ZeroThreshold,
    #[error("lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon {path}, line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

/// Two- to four-character words with their adjusted frequencies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ZhLexicon {
    entries: HashMap<String, u64>,
}

impl ZhLexicon {
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        ZhLexicon {
            entries: entries.into_iter().map(|(w, f)| (w.into(), f)).collect(),
        }
    }

    pub fn get(&self, word: &str) -> Option<u64> {
        self.entries.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries by descending frequency, ties by word.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut out: Vec<(&str, u64)> =
            self.entries.iter().map(|(w, &f)| (w.as_str(), f)).collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        out
    }

    /// `word<TAB>adjusted_frequency` lines, descending frequency.
    pub fn write(&self, path: &Path) -> Result<(), LexiconError> {
        let io = |source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        for (word, freq) in self.sorted() {
            writeln!(out, "{word}\t{freq}").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<ZhLexicon, LexiconError> {
        let io = |source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        let mut entries = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |reason: &str| LexiconError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                reason: reason.to_string(),
            };
            let (word, freq) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected word<TAB>frequency"))?;
            let freq: u64 = freq
                .trim()
                .parse()
                .map_err(|_| parse_err("bad frequency"))?;
            entries.insert(word.to_string(), freq);
        }
        Ok(ZhLexicon { entries })
    }
}

/// Maximal runs of non-symbol, non-whitespace characters.
fn word_runs(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c.is_whitespace() || is_symbol_char(c))
        .filter(|run| !run.is_empty())
}

/// Counts every contiguous 2-, 3- and 4-character substring of every word run.
pub(crate) fn raw_ngram_counts<S: AsRef<str> + Sync>(texts: &[S]) -> HashMap<String, u64> {
    texts
        .par_iter()
        .fold(HashMap::new, |mut counts: HashMap<String, u64>, text| {
            for run in word_runs(text.as_ref()) {
                let chars: Vec<char> = run.chars().collect();
                for n in MIN_WORD..=MAX_WORD {
                    for window in chars.windows(n) {
                        *counts.entry(window.iter().collect()).or_insert(0) += 1;
                    }
                }
            }
            counts
        })
        .reduce(HashMap::new, |a, b| {
            if a.len() < b.len() {
                merge_counts(b, a)
            } else {
                merge_counts(a, b)
            }
        })
}

fn merge_counts(
    mut into: HashMap<String, u64>,
    from: HashMap<String, u64>,
) -> HashMap<String, u64> {
    for (k, v) in from {
        *into.entry(k).or_insert(0) += v;
    }
    into
}

/// Distinct substrings of `word` that are `n` characters long.
fn distinct_substrings(word: &str, n: usize) -> HashSet<String> {
    let chars: Vec<char> = word.chars().collect();
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Builds the lexicon in three steps:
///
/// 1. count all 2-, 3- and 4-character substrings;
/// 2. lower each 3-character count by the counts of the 4-character words
///    containing it;
/// 3. lower each 2-character count by the (adjusted) 3-character and the
///    4-character words containing it.
///
/// Counts are clamped at zero after each step and entries below `threshold`
/// are dropped. A container that holds the same shorter word twice (as in
/// `AAAA` ⊃ `AAA`) is subtracted once.
pub fn build_zh_lexicon<S: AsRef<str> + Sync>(
    texts: &[S],
    threshold: u64,
) -> Result<ZhLexicon, LexiconError> {
    if threshold == 0 {
        return Err(LexiconError::ZeroThreshold);
    }
    let raw = raw_ngram_counts(texts);
    let mut by_len: [Vec<(&str, u64)>; MAX_WORD + 1] = Default::default();
    for (word, &freq) in &raw {
        by_len[word.chars().count()].push((word.as_str(), freq));
    }

    let mut deductions3: HashMap<String, u64> = HashMap::new();
    let mut deductions2: HashMap<String, u64> = HashMap::new();
    for &(word, freq) in &by_len[4] {
        for sub in distinct_substrings(word, 3) {
            *deductions3.entry(sub).or_insert(0) += freq;
        }
        for sub in distinct_substrings(word, 2) {
            *deductions2.entry(sub).or_insert(0) += freq;
        }
    }

    let mut adjusted3 = Vec::with_capacity(by_len[3].len());
    for &(word, freq) in &by_len[3] {
        let adj = freq.saturating_sub(deductions3.get(word).copied().unwrap_or(0));
        adjusted3.push((word, adj));
        if adj > 0 {
            for sub in distinct_substrings(word, 2) {
                *deductions2.entry(sub).or_insert(0) += adj;
            }
        }
    }

    let mut entries = HashMap::new();
    for &(word, freq) in &by_len[4] {
        if freq >= threshold {
            entries.insert(word.to_string(), freq);
        }
    }
    for (word, adj) in adjusted3 {
        if adj >= threshold {
            entries.insert(word.to_string(), adj);
        }
    }
    for &(word, freq) in &by_len[2] {
        let adj = freq.saturating_sub(deductions2.get(word).copied().unwrap_or(0));
        if adj >= threshold {
            entries.insert(word.to_string(), adj);
        }
    }
    Ok(ZhLexicon { entries })
}

/// Greedy longest match, left to right, preferring 4 over 3 over 2
/// characters. Characters that start no lexicon word become single-character
/// words; punctuation runs become symbols.
pub fn segment_zh(text: &str, lexicon: &ZhLexicon) -> Vec<Element> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut rest = chunk;
        while let Some(first) = rest.chars().next() {
            let symbolic = is_symbol_char(first);
            let end = rest
                .char_indices()
                .find(|&(_, c)| is_symbol_char(c) != symbolic)
                .map_or(rest.len(), |(i, _)| i);
            let (run, tail) = rest.split_at(end);
            if symbolic {
                out.push(Element::Symbol(run.to_string()));
            } else {
                segment_run(run, lexicon, &mut out);
            }
            rest = tail;
        }
    }
    out
}

fn segment_run(run: &str, lexicon: &ZhLexicon, out: &mut Vec<Element>) {
    let chars: Vec<char> = run.chars().collect();
    let mut i = 0;
    let mut buf = String::new();
    while i < chars.len() {
        let mut step = 1;
        for n in (MIN_WORD..=MAX_WORD).rev() {
            if i + n > chars.len() {
                continue;
            }
            buf.clear();
            buf.extend(&chars[i..i + n]);
            if lexicon.contains(&buf) {
                step = n;
                break;
            }
        }
        out.push(Element::Word(chars[i..i + step].iter().collect()));
        i += step;
    }
}
