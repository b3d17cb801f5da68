//! Acceptance gate. Runs every criterion in order and prints one
//! `PASS`/`FAIL` line per criterion; exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, RngAlgorithm, TestRng, TestRunner};
use reaction_miner::combolearn::{learn_combos, select_combos, LearnerConfig};
use reaction_miner::coocgraph::{build_graph, reduce_graph, CoocGraph, DEFAULT_DOMINANCE};
use reaction_miner::corpus::{
    distribution, load_comments, load_posts, load_reactions, overlap_join, synth_corpus,
    LabeledComment, RawComment, SynthConfig,
};
use reaction_miner::emoclass::{classify, classify_segments, EmotionScores};
use reaction_miner::evalharness::{
    agree_labels, fleiss_kappa, metrics, nb_predict, nb_train, AnnotationSet, Features,
};
use reaction_miner::patterns::{
    build_model, build_model_in, div, ed, extract_patterns, ief, pf, EmotionModel, LogBase,
    MiningParams, Pattern, PatternStats,
};
use reaction_miner::pipeline::{build_model_from, run_pipeline, PipelineConfig};
use reaction_miner::sarcasm::{label_sarcasm, SarcasmThresholds, VerdictReason};
use reaction_miner::textproc::{
    build_zh_lexicon, is_symbol_char, tokenize_en, Element, TokenSeq, Tokenizer, ZhLexicon,
};
use reaction_miner::{Emotion, EmotionPair, Lang};

const FORMULA_TOL: f64 = 1e-9;
const KAPPA_TOL: f64 = 1e-9;
const SCORE_TOL: f64 = 1e-9;
const NB_TOL: f64 = 1e-12;

const FORMULA_BUDGET: Duration = Duration::from_secs(1);
const LEXICON_BUDGET: Duration = Duration::from_secs(5);
const SARCASM_BUDGET: Duration = Duration::from_secs(10);
const SYNTH_BUDGET: Duration = Duration::from_secs(120);
const COMBO_BUDGET: Duration = Duration::from_secs(300);
const THROUGHPUT_BUDGET: Duration = Duration::from_secs(300);

const MIN_MACRO_ACCURACY: f64 = 0.80;
const PLANTED_TOP_N: usize = 20;
const HELD_OUT: f64 = 0.20;
const COMBO_SEEDS: u64 = 10;
const COMBO_MIN_HITS: usize = 9;
const SARCASM_RATE: f64 = 0.10;
const COMBO_PER_EMOTION: usize = 400;
/// Patterns per emotion row. The synthetic models hold about 80 patterns; at
/// that size every row would list the same patterns in a different order.
const COMBO_PATTERN_BUDGET: usize = 20;
const THROUGHPUT_COMMENTS: usize = 1_000_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within_budget(start: Instant, budget: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < budget, "{what} took {took:.2?}, budget {budget:?}");
    Ok(took)
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        RunnerConfig {
            cases,
            failure_persistence: None,
            ..RunnerConfig::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn seq(id: impl Into<String>, text: &str) -> TokenSeq {
    TokenSeq::new(id, tokenize_en(text))
}

// ---------------------------------------------------------------------------
// Micro-corpus shared by criteria 1 and 2. Every comment is space separated,
// so the oracle can split on whitespace instead of calling the tokenizer.

const MICRO: &[(&str, Emotion)] = &[
    ("ugh !", Emotion::Angry),
    ("lol !", Emotion::Haha),
    ("lol !", Emotion::Haha),
    ("wow !", Emotion::Wow),
    ("sob !", Emotion::Sad),
    ("aww !", Emotion::Love),
    ("why ?", Emotion::Angry),
    ("why ?", Emotion::Angry),
    ("huh ?", Emotion::Haha),
    ("miss ...", Emotion::Sad),
    ("gone ...", Emotion::Sad),
    ("sigh ...", Emotion::Sad),
    ("hug ~", Emotion::Love),
    ("hug ~", Emotion::Love),
    ("so sad !", Emotion::Sad),
    ("so bad !", Emotion::Angry),
];

fn micro_labeled() -> Vec<(TokenSeq, Emotion)> {
    MICRO
        .iter()
        .enumerate()
        .map(|(i, (t, e))| (seq(format!("m{i}"), t), *e))
        .collect()
}

/// Nothing is objective in the micro-corpus, so the reduced graph keeps
/// every word.
fn micro_model(base: LogBase) -> EmotionModel {
    let labeled = micro_labeled();
    let seqs: Vec<TokenSeq> = labeled.iter().map(|(s, _)| s.clone()).collect();
    let reduced = reduce_graph(&build_graph(&seqs), &CoocGraph::new(), DEFAULT_DOMINANCE).unwrap();
    let params = MiningParams {
        min_pattern_freq: 1,
        min_fillers: 1,
    };
    let (patterns, stats) = extract_patterns(&reduced, &labeled, &params);
    build_model_in(base, patterns, stats).unwrap()
}

#[derive(Default)]
struct OracleRow {
    freq: [u64; 5],
    fillers: BTreeSet<String>,
}

/// Recounts every 2- and 3-window with each word slot wildcarded.
fn micro_oracle() -> BTreeMap<String, OracleRow> {
    let is_word = |t: &str| t.chars().any(|c| c.is_alphanumeric());
    let mut rows: BTreeMap<String, OracleRow> = BTreeMap::new();
    for (text, emotion) in MICRO {
        let toks: Vec<&str> = text.split_whitespace().collect();
        for n in [2, 3] {
            for window in toks.windows(n) {
                for slot in 0..n {
                    if !is_word(window[slot]) {
                        continue;
                    }
                    let mut shown: Vec<&str> = window.to_vec();
                    shown[slot] = "*";
                    let row = rows.entry(shown.join(" ")).or_default();
                    row.freq[emotion.index()] += 1;
                    row.fillers.insert(window[slot].to_string());
                }
            }
        }
    }
    rows
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let oracle = micro_oracle();
    let model = micro_model(LogBase::Natural);
    ensure!(
        MICRO.len() <= 25 && model.len() <= 10,
        "micro-corpus too large: {} patterns",
        model.len()
    );
    let mined: BTreeSet<String> = model.patterns().iter().map(|p| p.to_string()).collect();
    let expected: BTreeSet<String> = oracle.keys().cloned().collect();
    ensure!(
        mined == expected,
        "patterns {mined:?} != oracle {expected:?}"
    );

    let mut ief_seen = BTreeSet::new();
    let (mut pf_zero, mut div_zero, mut ed_zero) = (0, 0, 0);
    for (p, stats) in model.stats().iter().enumerate() {
        let key = model.patterns()[p].to_string();
        let row = &oracle[&key];
        ensure!(
            stats.freqs() == row.freq,
            "{key}: freq {:?} != {:?}",
            stats.freqs(),
            row.freq
        );
        let spread = row.freq.iter().filter(|&&f| f > 0).count() as f64;
        let want_ief = 5.0 / spread;
        let want_div = (row.fillers.len() as f64).ln();
        ensure!(
            close(ief(stats), want_ief, FORMULA_TOL),
            "{key}: IEF {} != {want_ief}",
            ief(stats)
        );
        ensure!(
            close(div(stats), want_div, FORMULA_TOL),
            "{key}: DIV {} != {want_div}",
            div(stats)
        );
        ief_seen.insert((want_ief * 10.0).round() as i64);
        if row.fillers.len() == 1 {
            ensure!(
                div(stats) == 0.0,
                "{key}: DIV with one filler is {}",
                div(stats)
            );
            div_zero += 1;
        }
        for e in Emotion::ALL {
            let f = row.freq[e.index()];
            let want_pf = (f as f64 + 1.0).ln();
            let want_ed = want_pf * want_ief * want_div;
            ensure!(
                close(pf(stats, e), want_pf, FORMULA_TOL),
                "{key}/{e}: PF {} != {want_pf}",
                pf(stats, e)
            );
            ensure!(
                close(ed(stats, e), want_ed, FORMULA_TOL),
                "{key}/{e}: ED {} != {want_ed}",
                ed(stats, e)
            );
            ensure!(
                close(model.ed(p, e), want_ed, FORMULA_TOL),
                "{key}/{e}: model ED {}",
                model.ed(p, e)
            );
            if f == 0 {
                ensure!(
                    pf(stats, e) == 0.0 && ed(stats, e) == 0.0,
                    "{key}/{e}: zero frequency not zero"
                );
                pf_zero += 1;
            }
            if f > 0 && row.fillers.len() == 1 {
                ensure!(ed(stats, e) == 0.0, "{key}/{e}: ED ignores DIV = 0");
                ed_zero += 1;
            }
        }
    }
    ensure!(
        ief_seen == BTreeSet::from([10, 25, 50]),
        "IEF values covered: {ief_seen:?}"
    );
    ensure!(
        pf_zero > 0 && div_zero > 0 && ed_zero > 0,
        "forced zero cases missing"
    );

    // Direct checks on stored counts, independent of mining.
    let one = PatternStats::from_counts([3, 0, 0, 0, 0], 1).unwrap();
    ensure!(ed(&one, Emotion::Angry) == 0.0, "ED with uew = 1 must be 0");
    let all = PatternStats::from_counts([1, 1, 1, 1, 1], 4).unwrap();
    ensure!(ief(&all) == 1.0, "IEF over five emotions must be 1");

    let took = within_budget(start, FORMULA_BUDGET, "formula suite")?;
    Ok(format!(
        "{} patterns, IEF {{1, 2.5, 5}}, zero cases covered, {took:.2?}",
        model.len()
    ))
}

fn criterion_2() -> Outcome {
    let natural = micro_model(LogBase::Natural);
    let ten = micro_model(LogBase::Ten);
    for e in Emotion::ALL {
        ensure!(
            natural.ranking(e) == ten.ranking(e),
            "ranking for {e} differs across bases"
        );
    }
    let mut probes: Vec<TokenSeq> = micro_labeled().into_iter().map(|(s, _)| s).collect();
    for (i, text) in [
        "lol ! why ?",
        "so sad ! miss ...",
        "huh ? wow ! hug ~",
        "so bad ! ugh !",
        "nothing here",
    ]
    .iter()
    .enumerate()
    {
        probes.push(seq(format!("p{i}"), text));
    }
    let mut compared = 0;
    for tokens in &probes {
        let a = classify(tokens, &natural).unwrap();
        let b = classify(tokens, &ten).unwrap();
        ensure!(
            a.no_signal() == b.no_signal(),
            "{}: signal differs",
            tokens.render()
        );
        if !a.no_signal() {
            ensure!(
                a.top2().unwrap() == b.top2().unwrap(),
                "{}: top2 differs",
                tokens.render()
            );
            compared += 1;
        }
    }
    Ok(format!("5 rankings and {compared} top2 outputs identical"))
}

// ---------------------------------------------------------------------------

fn brute_force_ngrams(texts: &[String]) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for text in texts {
        let chars: Vec<char> = text.chars().collect();
        for start in 0..chars.len() {
            for n in 2..=4 {
                let Some(window) = chars.get(start..start + n) else {
                    break;
                };
                if window
                    .iter()
                    .any(|&c| is_symbol_char(c) || c.is_whitespace())
                {
                    break;
                }
                *counts.entry(window.iter().collect::<String>()).or_insert(0) += 1;
            }
        }
    }
    counts
}

fn oracle_lexicon(texts: &[String], threshold: u64) -> HashMap<String, u64> {
    let raw = brute_force_ngrams(texts);
    let of_len = |n: usize| {
        raw.iter()
            .filter(move |(w, _)| w.chars().count() == n)
            .map(|(w, &f)| (w.clone(), f))
    };
    let fours: Vec<(String, u64)> = of_len(4).collect();
    let threes: Vec<(String, u64)> = of_len(3)
        .map(|(w, f)| {
            let inside: u64 = fours
                .iter()
                .filter(|(c, _)| c.contains(&w))
                .map(|(_, f)| f)
                .sum();
            (w, f.saturating_sub(inside))
        })
        .collect();
    let twos: Vec<(String, u64)> = of_len(2)
        .map(|(w, f)| {
            let in3: u64 = threes
                .iter()
                .filter(|(c, _)| c.contains(&w))
                .map(|(_, f)| f)
                .sum();
            let in4: u64 = fours
                .iter()
                .filter(|(c, _)| c.contains(&w))
                .map(|(_, f)| f)
                .sum();
            (w, f.saturating_sub(in3 + in4))
        })
        .collect();
    fours
        .into_iter()
        .chain(threes)
        .chain(twos)
        .filter(|&(_, f)| f >= threshold)
        .collect()
}

fn lexicon_map(lexicon: &ZhLexicon) -> HashMap<String, u64> {
    lexicon
        .sorted()
        .into_iter()
        .map(|(w, f)| (w.to_string(), f))
        .collect()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let map = |pairs: &[(&str, u64)]| -> HashMap<String, u64> {
        pairs.iter().map(|(w, f)| (w.to_string(), *f)).collect()
    };
    // ABCD: both 3-grams and all three 2-grams are absorbed by the 4-gram.
    let traces: Vec<(Vec<&str>, u64, HashMap<String, u64>)> = vec![
        (vec!["ABCD"], 1, map(&[("ABCD", 1)])),
        (vec!["XY"; 5], 3, map(&[("XY", 5)])),
        (
            vec!["ABC", "ABC", "AB", "AB"],
            2,
            map(&[("ABC", 2), ("AB", 2)]),
        ),
        (
            vec!["ABCD", "ABC", "ABC"],
            1,
            map(&[("ABCD", 1), ("ABC", 2)]),
        ),
        (vec!["今天天气", "天气", "天气"], 2, map(&[("天气", 2)])),
    ];
    for (texts, threshold, want) in &traces {
        let got = lexicon_map(&build_zh_lexicon(texts, *threshold).map_err(|e| e.to_string())?);
        ensure!(&got == want, "trace {texts:?}: {got:?} != {want:?}");
    }

    let strategy = prop::collection::vec("[甲乙丙丁戊，！ ]{0,40}", 1..25)
        .prop_filter("at most 1k chars", |t| {
            t.iter().map(|s| s.chars().count()).sum::<usize>() <= 1000
        });
    runner(256)
        .run(&(strategy, 1u64..4), |(texts, threshold)| {
            let built = build_zh_lexicon(&texts, threshold).unwrap();
            let raw = brute_force_ngrams(&texts);
            for (word, freq) in built.sorted() {
                prop_assert!(freq >= threshold && freq <= raw[word]);
            }
            prop_assert_eq!(lexicon_map(&built), oracle_lexicon(&texts, threshold));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let took = within_budget(start, LEXICON_BUDGET, "lexicon suite")?;
    Ok(format!(
        "{} traces, 256 random corpora, {took:.2?}",
        traces.len()
    ))
}

// ---------------------------------------------------------------------------

type Counts = (BTreeMap<String, u64>, BTreeMap<(String, String), u64>);

fn adjacency(seqs: &[TokenSeq]) -> Counts {
    let mut nodes = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for seq in seqs {
        let s: Vec<&str> = seq.elements.iter().map(Element::surface).collect();
        for w in &s {
            *nodes.entry(w.to_string()).or_insert(0) += 1;
        }
        for pair in s.windows(2) {
            *edges
                .entry((pair[0].to_string(), pair[1].to_string()))
                .or_insert(0) += 1;
        }
    }
    (nodes, edges)
}

fn graph_counts(g: &CoocGraph) -> Counts {
    (
        g.nodes()
            .into_iter()
            .map(|(s, f)| (s.to_string(), f))
            .collect(),
        g.edges()
            .into_iter()
            .map(|(a, b, f)| ((a.to_string(), b.to_string()), f))
            .collect(),
    )
}

fn dominance_rule(subj: &[TokenSeq], obj: &[TokenSeq], d: f64) -> BTreeSet<String> {
    let (sn, _) = adjacency(subj);
    let (on, _) = adjacency(obj);
    let st: u64 = sn.values().sum();
    let ot: u64 = on.values().sum();
    sn.iter()
        .filter(|(w, _)| w.chars().any(char::is_alphanumeric))
        .filter(|(w, &f)| {
            let o = on.get(*w).copied().unwrap_or(0);
            o > 0 && o as f64 / ot as f64 >= d * (f as f64 / st as f64)
        })
        .map(|(w, _)| w.clone())
        .collect()
}

fn random_corpus(max: usize) -> impl Strategy<Value = Vec<TokenSeq>> {
    prop::collection::vec(
        prop::collection::vec("(ant|bee|cat|dog|elk|fox|!|\\.|\\?)", 0..12)
            .prop_map(|w| w.join(" ")),
        0..=max,
    )
    .prop_map(|texts| {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| seq(format!("c{i}"), t))
            .collect()
    })
}

fn criterion_4() -> Outcome {
    runner(48)
        .run(&random_corpus(500), |seqs| {
            prop_assert_eq!(graph_counts(&build_graph(&seqs)), adjacency(&seqs));
            Ok(())
        })
        .map_err(|e| format!("graph counts: {e}"))?;

    let grid = [0.1, 0.25, 0.5, 0.75, 1.0];
    runner(96)
        .run(&(random_corpus(150), random_corpus(150)), |(subj, obj)| {
            let (s, o) = (build_graph(&subj), build_graph(&obj));
            let mut previous: Option<BTreeSet<String>> = None;
            for d in grid {
                let reduced = reduce_graph(&s, &o, d).unwrap();
                prop_assert_eq!(&reduced.removed, &dominance_rule(&subj, &obj, d));
                if let Some(prev) = &previous {
                    prop_assert!(reduced.removed.is_subset(prev), "not monotone at {}", d);
                }
                previous = Some(reduced.removed);
            }
            Ok(())
        })
        .map_err(|e| format!("reduction: {e}"))?;
    Ok("adjacency counts, removal rule and monotonicity at 5 dominance points".into())
}

// ---------------------------------------------------------------------------

const VOCAB: &[&str] = &["so", "sad", "lol", "wow", "bad", "cute", "!", "."];

fn random_model() -> impl Strategy<Value = EmotionModel> {
    let element = prop::sample::select(VOCAB).prop_map(|w| Element::from_surface(w).unwrap());
    let pattern = (prop::collection::vec(element, 1..3), 0usize..3).prop_map(|(mut els, slot)| {
        els.insert(slot.min(els.len()), Element::Wildcard);
        Pattern::new(els).unwrap()
    });
    let stats = (prop::array::uniform5(0u64..30), 1usize..12)
        .prop_filter("occurs", |(f, _)| f.iter().any(|&x| x > 0))
        .prop_map(|(f, uew)| PatternStats::from_counts(f, uew).unwrap());
    prop::collection::vec((pattern, stats), 1..=100).prop_map(|rows| {
        let mut seen = BTreeSet::new();
        let (p, s): (Vec<_>, Vec<_>) = rows
            .into_iter()
            .filter(|(p, _)| seen.insert(p.to_string()))
            .unzip();
        build_model(p, s).unwrap()
    })
}

/// Occurrence vector times the ED matrix, both built densely.
fn dense_product(tokens: &TokenSeq, model: &EmotionModel) -> [f64; 5] {
    let counts: Vec<f64> = model
        .patterns()
        .iter()
        .map(|p| {
            let n = p.len();
            if tokens.len() < n {
                return 0.0;
            }
            (0..=tokens.len() - n)
                .filter(|&i| p.matches_window(&tokens.elements[i..i + n]))
                .count() as f64
        })
        .collect();
    let mut out = [0.0; 5];
    for e in Emotion::ALL {
        out[e.index()] = counts
            .iter()
            .enumerate()
            .map(|(p, c)| c * model.ed(p, e))
            .sum();
    }
    out
}

fn criterion_5() -> Outcome {
    let text = prop::collection::vec(prop::sample::select(VOCAB), 0..30)
        .prop_map(|w| seq("t", &w.join(" ")));
    runner(128)
        .run(&(random_model(), text), |(model, tokens)| {
            let once = classify(&tokens, &model).unwrap();
            let want = dense_product(&tokens, &model);
            for e in Emotion::ALL {
                prop_assert!(close(once.score(e), want[e.index()], SCORE_TOL));
            }
            let twice = classify_segments(&[tokens.clone(), tokens.clone()], &model).unwrap();
            for e in Emotion::ALL {
                prop_assert_eq!(twice.score(e), 2.0 * once.score(e));
            }
            if !once.no_signal() {
                prop_assert_eq!(twice.top2().unwrap(), once.top2().unwrap());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    for value in [0.0, 1.0, 7.5] {
        let s = EmotionScores::from_scores([value; 5], 1);
        let order: Vec<Emotion> = s.ranked().iter().map(|(e, _)| *e).collect();
        ensure!(order == Emotion::ALL.to_vec(), "all-tie ranking {order:?}");
    }
    Ok("dense product to 1e-9, doubling exact, all-tie order canonical".into())
}

// ---------------------------------------------------------------------------

/// The sarcasm rules written out directly. Ranking ties go to the earlier
/// emotion in canonical order.
fn transliteration(scores: [f64; 5], t: &SarcasmThresholds) -> (bool, VerdictReason) {
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let (s1, s2, s3) = (scores[order[0]], scores[order[1]], scores[order[2]]);
    let a = Emotion::from_index(order[0]).unwrap();
    let b = Emotion::from_index(order[1]).unwrap();
    if !t.combos.contains(&EmotionPair::new(a, b).unwrap()) {
        return (false, VerdictReason::NotCandidate);
    }
    if s1 - s2 == 0.0 || s1 == 0.0 || s2 == 0.0 {
        return (false, VerdictReason::DegenerateScores);
    }
    let dr = (s2 - s3) / (s1 - s2);
    if !(t.x1 <= dr && dr <= t.x2) {
        return (false, VerdictReason::DistanceOutOfRange);
    }
    if s3 / s2 < t.y1 || s2 / s1 < t.y2 {
        return (false, VerdictReason::ScoreRatioBelowFloor);
    }
    (true, VerdictReason::Sarcastic)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let all_pairs: BTreeSet<EmotionPair> = EmotionPair::all().into_iter().collect();
    let profiles = [
        SarcasmThresholds::english(),
        SarcasmThresholds::chinese(),
        SarcasmThresholds::new(0.0, 5.0, 0.05, 0.05, all_pairs.clone()).unwrap(),
    ];
    let widened: Vec<SarcasmThresholds> = profiles
        .iter()
        .map(|t| {
            let mut combos = t.combos.clone();
            combos.insert(EmotionPair::new(Emotion::Sad, Emotion::Love).unwrap());
            SarcasmThresholds::new(
                (t.x1 - 0.1).max(0.0),
                t.x2 + 1.0,
                t.y1 * 0.5,
                t.y2 * 0.5,
                combos,
            )
            .unwrap()
        })
        .collect();

    let mut cases = 0u64;
    let mut sarcastic = 0u64;
    for s1 in 0..=20u32 {
        for s2 in 0..=s1 {
            for s3 in 0..=s2 {
                for first in 0..5 {
                    for second in (0..5).filter(|&x| x != first) {
                        for third in (0..5).filter(|&x| x != first && x != second) {
                            let mut v = [0.0; 5];
                            v[first] = f64::from(s1);
                            v[second] = f64::from(s2);
                            v[third] = f64::from(s3);
                            let scored = EmotionScores::from_scores(v, 1);
                            for (t, wide) in profiles.iter().zip(&widened) {
                                let got = label_sarcasm(&scored, t).map_err(|e| e.to_string())?;
                                let want = transliteration(v, t);
                                ensure!(
                                    (got.sarcastic, got.reason) == want,
                                    "{v:?} under {t:?}: got {:?}, rules say {want:?}",
                                    (got.sarcastic, got.reason)
                                );
                                for c in [0.5, 3.0, 100.0] {
                                    let scaled = EmotionScores::from_scores(v.map(|x| x * c), 1);
                                    let again = label_sarcasm(&scaled, t).unwrap();
                                    ensure!(
                                        (again.sarcastic, again.reason) == want,
                                        "{v:?} scaled by {c} changed the verdict"
                                    );
                                }
                                if want.0 {
                                    sarcastic += 1;
                                    ensure!(
                                        label_sarcasm(&scored, wide).unwrap().sarcastic,
                                        "{v:?}: widening {t:?} unlabeled it"
                                    );
                                }
                                cases += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let took = within_budget(start, SARCASM_BUDGET, "sarcasm grid")?;
    Ok(format!("{cases} cases ({sarcastic} sarcastic), {took:.2?}"))
}

// ---------------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let config = SynthConfig::default().with_comments_per_emotion(1000);
    let corpus = synth_corpus(&config, 42).map_err(|e| e.to_string())?;
    let cut = ((1.0 - HELD_OUT) * corpus.labeled.len() as f64).round() as usize;
    let (train, test) = corpus.labeled.split_at(cut);
    let model = build_model_from(
        &Tokenizer::English,
        train,
        &corpus.posts,
        DEFAULT_DOMINANCE,
        &MiningParams::default(),
    )
    .map_err(|e| e.to_string())?;

    let mut hits = [0usize; 5];
    let mut totals = [0usize; 5];
    for l in test {
        let scores = classify(&seq(l.comment.id.clone(), &l.comment.text), &model).unwrap();
        totals[l.label.index()] += 1;
        if !scores.no_signal() && scores.top().unwrap() == l.label {
            hits[l.label.index()] += 1;
        }
    }
    ensure!(
        totals.iter().all(|&t| t > 0),
        "an emotion is missing from the held-out split"
    );
    let per_class: Vec<f64> = (0..5).map(|i| hits[i] as f64 / totals[i] as f64).collect();
    let macro_acc = per_class.iter().sum::<f64>() / 5.0;
    ensure!(
        macro_acc
            .partial_cmp(&MIN_MACRO_ACCURACY)
            .is_some_and(|o| o.is_ge()),
        "macro-accuracy {macro_acc:.3} < {MIN_MACRO_ACCURACY} (per class {per_class:.3?})"
    );

    for e in Emotion::ALL {
        let top: Vec<&Pattern> = model.top(e, PLANTED_TOP_N).collect();
        for template in config.planted_templates(e) {
            let planted: Pattern = template
                .parse()
                .map_err(|err| format!("{template}: {err}"))?;
            ensure!(
                top.contains(&&planted),
                "`{template}` not in the top {PLANTED_TOP_N} for {e}: {}",
                top.iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" | ")
            );
        }
    }
    let took = within_budget(start, SYNTH_BUDGET, "synthetic classification")?;
    Ok(format!(
        "macro-accuracy {macro_acc:.3} on {} held-out comments, all planted patterns in top {PLANTED_TOP_N}, {took:.2?}",
        test.len()
    ))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let target = EmotionPair::new(Emotion::Angry, Emotion::Haha).unwrap();
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 1..=COMBO_SEEDS {
        let config = SynthConfig::default()
            .with_comments_per_emotion(COMBO_PER_EMOTION)
            .with_sarcasm_rate(SARCASM_RATE);
        let corpus = synth_corpus(&config, seed).map_err(|e| e.to_string())?;
        let model = build_model_from(
            &Tokenizer::English,
            &corpus.labeled,
            &corpus.posts,
            DEFAULT_DOMINANCE,
            &MiningParams::default(),
        )
        .map_err(|e| e.to_string())?;
        let examples: Vec<(TokenSeq, bool)> = corpus
            .labeled
            .iter()
            .map(|l| {
                (
                    seq(l.comment.id.clone(), &l.comment.text),
                    corpus.is_sarcastic(&l.comment.id),
                )
            })
            .collect();
        let run = learn_combos(
            &model,
            &examples,
            COMBO_PATTERN_BUDGET,
            &LearnerConfig::default(),
            seed,
        )
        .map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(
            run.histogram.is_nested(),
            "seed {seed}: histogram not nested"
        );
        match select_combos(&run.histogram, 2) {
            Ok(selected) if selected.contains(&target) => hits += 1,
            other => misses.push(format!("seed {seed}: {other:?}")),
        }
    }
    ensure!(
        hits >= COMBO_MIN_HITS,
        "Angry-Haha selected in {hits}/{COMBO_SEEDS} runs; {misses:?}"
    );
    let took = within_budget(start, COMBO_BUDGET, "combo recovery")?;
    Ok(format!(
        "Angry-Haha selected in {hits}/{COMBO_SEEDS} runs, nesting held, {took:.2?}"
    ))
}

// ---------------------------------------------------------------------------

fn votes(rows: &[&[u8]]) -> AnnotationSet {
    let rows: Vec<Vec<bool>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v == 1).collect())
        .collect();
    AnnotationSet::from_votes(&rows).unwrap()
}

fn criterion_9() -> Outcome {
    // Hand-derived: P̄ and Pe from the per-item agreement and class shares.
    let tables: [(&[&[u8]], f64); 3] = [
        (&[&[1, 1, 0], &[0, 0, 1]], -1.0 / 3.0),
        (&[&[1, 1], &[1, 0], &[0, 0], &[0, 0]], 7.0 / 15.0),
        (&[&[1, 1, 1], &[1, 1, 0], &[0, 0, 0], &[1, 0, 0]], 1.0 / 3.0),
    ];
    for (rows, want) in tables {
        let k = fleiss_kappa(&votes(rows));
        ensure!(
            (k.value - want).abs() <= KAPPA_TOL && !k.degenerate,
            "kappa {rows:?}: {} != {want}",
            k.value
        );
    }

    let table = (2usize..6)
        .prop_flat_map(|m| prop::collection::vec(prop::collection::vec(any::<bool>(), m), 1..50));
    runner(128)
        .run(&table, |rows| {
            let set = AnnotationSet::from_votes(&rows).unwrap();
            let levels: Vec<_> = (1..=set.annotators().min(3))
                .map(|k| agree_labels(&set, k).unwrap())
                .collect();
            for w in levels.windows(2) {
                prop_assert!(w[1].positives().is_subset(&w[0].positives()));
            }
            Ok(())
        })
        .map_err(|e| format!("agree nesting: {e}"))?;

    // Items 0-4 are positive, 5-9 negative; predict 0, 1, 2 and 5 positive.
    let rows: Vec<&[u8]> = (0..10)
        .map(|i| if i < 5 { &[1u8, 1][..] } else { &[0u8, 0][..] })
        .collect();
    let truth = agree_labels(&votes(&rows), 2).unwrap();
    let pred: HashMap<String, bool> = (0..10)
        .map(|i| (i.to_string(), matches!(i, 0 | 1 | 2 | 5)))
        .collect();
    let r = metrics(&pred, &truth).map_err(|e| e.to_string())?;
    ensure!(
        (r.tp, r.fp, r.tn, r.fn_) == (3, 1, 4, 2),
        "confusion {:?}",
        (r.tp, r.fp, r.tn, r.fn_)
    );
    ensure!(
        close(r.accuracy, 0.7, 1e-12)
            && close(r.precision, 0.75, 1e-12)
            && close(r.recall, 0.6, 1e-12)
            && close(r.f1, 2.0 / 3.0, 1e-12),
        "metrics {r:?}"
    );

    // Add-one smoothing, vocabulary 4, two tokens per class.
    let train = vec![
        (seq("a", "lol funny"), true),
        (seq("b", "terrible news"), false),
    ];
    let bow = nb_train(&train, Features::Bow).map_err(|e| e.to_string())?;
    let prior = 0.5f64.ln();
    let want = [prior + (1.0f64 / 6.0).ln(), prior + (2.0f64 / 6.0).ln()];
    let got = bow.log_posterior(&seq("q", "lol"));
    ensure!(
        (0..2).all(|c| (got[c] - want[c]).abs() <= NB_TOL),
        "BOW posterior {got:?} != {want:?}"
    );
    ensure!(
        nb_predict(&bow, &seq("q", "lol")),
        "BOW must predict 1 for `lol`"
    );

    // TF-IDF: every term has idf ln 2, so each class weighs 2 ln 2.
    let tfidf = nb_train(&train, Features::Tfidf).map_err(|e| e.to_string())?;
    let ln2 = 2.0f64.ln();
    let denom = 2.0 * ln2 + 4.0;
    let want = [
        prior + ln2 * (1.0 / denom).ln(),
        prior + ln2 * ((ln2 + 1.0) / denom).ln(),
    ];
    let got = tfidf.log_posterior(&seq("q", "lol"));
    ensure!(
        (0..2).all(|c| (got[c] - want[c]).abs() <= NB_TOL),
        "TF-IDF posterior {got:?} != {want:?}"
    );
    ensure!(
        nb_predict(&tfidf, &seq("q", "lol")),
        "TF-IDF must predict 1 for `lol`"
    );
    ensure!(
        !nb_predict(&bow, &seq("q", "terrible news")),
        "BOW must predict 0 for `terrible news`"
    );
    Ok("3 kappa tables, agree nesting, confusion arithmetic, NB posteriors".into())
}

// ---------------------------------------------------------------------------

fn fixture(lang: Lang, counts: [u64; 5]) -> Vec<LabeledComment> {
    let mut out = Vec::with_capacity(counts.iter().sum::<u64>() as usize);
    for e in Emotion::ALL {
        for _ in 0..counts[e.index()] {
            out.push(LabeledComment {
                comment: RawComment {
                    id: String::new(),
                    post_id: String::new(),
                    user_id: String::new(),
                    text: String::new(),
                    lang,
                },
                label: e,
            });
        }
    }
    out
}

fn criterion_10() -> Outcome {
    let zh = distribution(&fixture(
        Lang::Zh,
        [167_692, 79_444, 38_433, 28_271, 34_019],
    ));
    let en = distribution(&fixture(
        Lang::En,
        [206_994, 162_149, 61_720, 102_264, 300_600],
    ));
    let all = zh.merge(&en);
    ensure!(zh.total == 347_859, "Chinese total {}", zh.total);
    ensure!(en.total == 833_727, "English total {}", en.total);
    ensure!(all.total == 1_181_586, "overall total {}", all.total);
    // Row sums of the two language columns. The printed Haha total transposes
    // two digits (214,593); only 241,593 adds up to the overall total.
    let per_emotion = [374_686, 241_593, 100_153, 130_535, 334_619];
    ensure!(
        all.counts == per_emotion,
        "per-emotion totals {:?}",
        all.counts
    );
    Ok("totals 347,859 / 833,727 / 1,181,586".into())
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn criterion_11() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = synth_corpus(&SynthConfig::default().with_sarcasm_rate(SARCASM_RATE), 5)
        .map_err(|e| e.to_string())?;
    let input = tmp.path().join("in");
    corpus.write_files(&input).map_err(|e| e.to_string())?;
    corpus
        .write_annotation_file(&input.join("votes.tsv"), 3, 0.1, 5)
        .map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let mut config = PipelineConfig::new(
            &input.join("comments.tsv"),
            &input.join("reactions.tsv"),
            &input.join("posts.tsv"),
            &tmp.path().join(run),
        );
        config.annotations = Some(input.join("votes.tsv"));
        config.seed = 5;
        run_pipeline(&config).map_err(|e| format!("pipeline: {e}"))?;
        trees.push(read_tree(&tmp.path().join(run)));
    }
    ensure!(
        trees[0].len() >= 8,
        "only {} artifacts written",
        trees[0].len()
    );
    for (name, bytes) in &trees[0] {
        ensure!(
            trees[1].get(name) == Some(bytes),
            "artifact {name} differs between runs"
        );
    }

    let per_emotion = THROUGHPUT_COMMENTS / 5;
    let big = synth_corpus(
        &SynthConfig::default().with_comments_per_emotion(per_emotion),
        11,
    )
    .map_err(|e| e.to_string())?;
    let dir = tmp.path().join("big");
    big.write_files(&dir).map_err(|e| e.to_string())?;
    drop(big);

    let start = Instant::now();
    let comments = load_comments(&dir.join("comments.tsv"), Lang::En).map_err(|e| e.to_string())?;
    let reactions = load_reactions(&dir.join("reactions.tsv")).map_err(|e| e.to_string())?;
    let posts = load_posts(&dir.join("posts.tsv"), Lang::En).map_err(|e| e.to_string())?;
    let joined = overlap_join(&comments.records, &reactions.records);
    ensure!(
        joined.labeled.len() == THROUGHPUT_COMMENTS,
        "joined {} comments",
        joined.labeled.len()
    );
    let model = build_model_from(
        &Tokenizer::English,
        &joined.labeled,
        &posts.records,
        DEFAULT_DOMINANCE,
        &MiningParams::default(),
    )
    .map_err(|e| e.to_string())?;
    let took = within_budget(start, THROUGHPUT_BUDGET, "1M-comment build")?;
    Ok(format!(
        "{} artifacts identical; 1M comments to {} patterns in {took:.2?}",
        trees[0].len(),
        model.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("formula oracle", criterion_1),
        ("log-base invariance", criterion_2),
        ("Chinese lexicon oracle", criterion_3),
        ("graph oracle", criterion_4),
        ("classification linearity and ties", criterion_5),
        ("sarcasm rule suite", criterion_6),
        ("synthetic emotion classification", criterion_7),
        ("combo recovery", criterion_8),
        ("evaluation harness fixtures", criterion_9),
        ("label distribution fixture", criterion_10),
        ("determinism and throughput", criterion_11),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|k| k != n) {
            continue;
        }
        let outcome =
            std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {reason}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
