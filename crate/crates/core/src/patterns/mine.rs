//! Candidate enumeration and threshold filtering.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use super::{Pattern, PatternStats};
use crate::coocgraph::ReducedGraph;
use crate::corpus::{Emotion, EMOTION_COUNT};
use crate::textproc::{Element, TokenSeq};

pub const DEFAULT_MIN_PATTERN_FREQ: u64 = 10;
pub const DEFAULT_MIN_FILLERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningParams {
    /// Minimum total occurrences across all emotions.
    pub min_pattern_freq: u64,
    /// Minimum number of distinct slot fillers.
    pub min_fillers: usize,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            min_pattern_freq: DEFAULT_MIN_PATTERN_FREQ,
            min_fillers: DEFAULT_MIN_FILLERS,
        }
    }
}

const WILD: u32 = u32::MAX;
const ABSENT: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CandidateKey {
    len: u8,
    ids: [u32; 3],
}

#[derive(Debug, Default)]
struct Tally {
    freq: [u64; EMOTION_COUNT],
    fillers: HashSet<u32>,
}

struct Vocab {
    elements: Vec<Element>,
    alive: Vec<bool>,
}

/// Mines wildcard patterns from labeled, tokenized comments.
///
/// Every contiguous 2- and 3-element window whose elements all survive in
/// the reduced graph (symbols always survive) yields one candidate per word
/// position, with that position replaced by the wildcard and the word
/// recorded as a filler. Candidates are kept when they have at least
/// `min_fillers` distinct fillers and `min_pattern_freq` total occurrences.
///
/// Output is sorted by descending total frequency, then by pattern text.
pub fn extract_patterns(
    reduced: &ReducedGraph,
    labeled: &[(TokenSeq, Emotion)],
    params: &MiningParams,
) -> (Vec<Pattern>, Vec<PatternStats>) {
    let (vocab, encoded) = encode(reduced, labeled);

    let tallies = encoded
        .par_chunks(8192)
        .map(|chunk| {
            let mut local: HashMap<CandidateKey, Tally> = HashMap::new();
            for (ids, emotion) in chunk {
                count_candidates(ids, *emotion, &vocab, &mut local);
            }
            local
        })
        .reduce(HashMap::new, merge_tallies);

    let mut mined: Vec<(Pattern, PatternStats)> = tallies
        .into_iter()
        .filter(|(_, t)| {
            t.fillers.len() >= params.min_fillers
                && t.freq.iter().sum::<u64>() >= params.min_pattern_freq
        })
        .map(|(key, tally)| {
            let elements = key.ids[..key.len as usize]
                .iter()
                .map(|&id| {
                    if id == WILD {
                        Element::Wildcard
                    } else {
                        vocab.elements[id as usize].clone()
                    }
                })
                .collect();
            let pattern = Pattern::new(elements).expect("one wildcard per candidate");
            let fillers: BTreeSet<String> = tally
                .fillers
                .iter()
                .map(|&id| vocab.elements[id as usize].surface().to_string())
                .collect();
            let stats = PatternStats::from_fillers(tally.freq, fillers)
                .expect("retained candidates have occurrences and fillers");
            (pattern, stats)
        })
        .collect();

    mined.sort_by_cached_key(|(p, s)| (std::cmp::Reverse(s.total()), p.to_string()));
    mined.into_iter().unzip()
}

/// Interns every element and marks the ones that survive reduction.
fn encode(
    reduced: &ReducedGraph,
    labeled: &[(TokenSeq, Emotion)],
) -> (Vocab, Vec<(Vec<u32>, Emotion)>) {
    let mut index: HashMap<&Element, u32> = HashMap::new();
    let mut vocab = Vocab {
        elements: Vec::new(),
        alive: Vec::new(),
    };
    let mut encoded = Vec::with_capacity(labeled.len());
    for (seq, emotion) in labeled {
        if seq.len() < 2 {
            continue;
        }
        let ids = seq
            .elements
            .iter()
            .map(|e| {
                *index.entry(e).or_insert_with(|| {
                    vocab.elements.push(e.clone());
                    vocab
                        .alive
                        .push(e.is_symbol() || (e.is_word() && reduced.contains(e.surface())));
                    vocab.elements.len() as u32 - 1
                })
            })
            .collect();
        encoded.push((ids, *emotion));
    }
    (vocab, encoded)
}

fn count_candidates(
    ids: &[u32],
    emotion: Emotion,
    vocab: &Vocab,
    tallies: &mut HashMap<CandidateKey, Tally>,
) {
    for len in 2..=3usize {
        if ids.len() < len {
            continue;
        }
        for window in ids.windows(len) {
            if !window.iter().all(|&id| vocab.alive[id as usize]) {
                continue;
            }
            for slot in 0..len {
                let filler = window[slot];
                if !vocab.elements[filler as usize].is_word() {
                    continue;
                }
                let mut key_ids = [ABSENT; 3];
                key_ids[..len].copy_from_slice(window);
                key_ids[slot] = WILD;
                let tally = tallies
                    .entry(CandidateKey {
                        len: len as u8,
                        ids: key_ids,
                    })
                    .or_default();
                tally.freq[emotion.index()] += 1;
                tally.fillers.insert(filler);
            }
        }
    }
}

fn merge_tallies(
    mut a: HashMap<CandidateKey, Tally>,
    mut b: HashMap<CandidateKey, Tally>,
) -> HashMap<CandidateKey, Tally> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    for (key, tally) in b {
        let into = a.entry(key).or_default();
        for (x, y) in into.freq.iter_mut().zip(tally.freq) {
            *x += y;
        }
        into.fillers.extend(tally.fillers);
    }
    a
}
