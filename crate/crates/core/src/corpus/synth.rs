//! Deterministic synthetic corpora with planted emotion phrases.
//!
//! Every labeled comment mixes shared "news" vocabulary (the same words the
//! generated posts use) with one or more planted phrases for its label. A
//! planted phrase is a short template with one `*` slot, realized with a
//! random filler from the phrase's filler list. Sarcastic comments instead
//! carry one phrase from each emotion of the configured sarcasm pair.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    write_comments, write_labeled, write_posts, write_reactions, CorpusError, Emotion,
    LabeledComment, Lang, NewsPost, RawComment, ReactionEvent, EMOTION_COUNT,
};

/// A template such as `people are *` and the words that may fill its slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPhrase {
    pub template: Vec<String>,
    pub fillers: Vec<String>,
}

impl PlantedPhrase {
    pub fn new(template: &str, fillers: &[&str]) -> Self {
        PlantedPhrase {
            template: template.split_whitespace().map(str::to_string).collect(),
            fillers: fillers.iter().map(|f| f.to_string()).collect(),
        }
    }

    fn realize(&self, rng: &mut ChaCha8Rng) -> Vec<String> {
        let filler = self.fillers.choose(rng).expect("validated non-empty");
        self.template
            .iter()
            .map(|t| if t == "*" { filler.clone() } else { t.clone() })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Planted phrases per emotion, canonical order.
    pub planted: [Vec<PlantedPhrase>; EMOTION_COUNT],
    pub comments_per_emotion: [usize; EMOTION_COUNT],
    /// Shared by posts and comment context.
    pub objective_vocab: Vec<String>,
    pub posts: usize,
    /// Inclusive range of objective words per post.
    pub post_words: (usize, usize),
    /// Inclusive range of objective context words per comment.
    pub context_words: (usize, usize),
    /// Inclusive range of own-label phrases per non-sarcastic comment.
    pub phrases_per_comment: (usize, usize),
    /// Probability of one extra phrase from a different emotion. Off by
    /// default: a single stray occurrence in another class lowers a planted
    /// pattern's IEF, so any cross-talk pushes the planted patterns down the
    /// rankings.
    pub cross_talk: f64,
    pub sarcasm_rate: f64,
    pub sarcasm_pair: (Emotion, Emotion),
}

const OBJECTIVE_WORDS: &str = "government budget election minister policy report announced \
officials percent economy market company president council court ruling statement agency \
department federal state county city police investigation hospital school university \
students teachers workers union strike protest rally campaign candidate vote voters ballot \
senate congress parliament committee hearing bill law tax taxes plan proposal program \
funding billion million dollars prices inflation rates bank banks trade exports imports \
tariffs industry factory jobs employment unemployment data survey analysts forecast quarter \
growth decline shares stocks investors oil gas energy power plant climate weather storm \
flooding rain temperatures wildfire coast border immigration visa airport flights airline \
train railway highway traffic accident crash blaze rescue emergency services residents \
community neighborhood housing rent construction project bridge road water supply health \
vaccine virus cases patients doctors nurses clinic study researchers science space mission \
satellite launch technology software internet phone users network security military troops \
defense talks summit treaty leaders meeting visit spokesperson press conference interview \
tuesday wednesday thursday friday monday weekend morning evening season league team coach \
players match game final score tournament stadium fans ticket";

impl Default for SynthConfig {
    fn default() -> Self {
        let planted = [
            vec![
                PlantedPhrase::new(
                    "people are *",
                    &[
                        "dumb", "stupid", "evil", "idiots", "pathetic", "clueless", "corrupt",
                    ],
                ),
                PlantedPhrase::new(
                    "* this country",
                    &["ruining", "destroying", "wrecking", "robbing", "betraying"],
                ),
                PlantedPhrase::new(
                    "what a *",
                    &["disgrace", "joke", "clown", "fraud", "hypocrite", "liar"],
                ),
                PlantedPhrase::new("* all haters", &["blame", "ban", "shut", "fire", "jail"]),
            ],
            vec![
                PlantedPhrase::new(
                    "* . lol",
                    &[
                        "hilarious",
                        "priceless",
                        "classic",
                        "genius",
                        "lmao",
                        "ridiculous",
                    ],
                ),
                PlantedPhrase::new("looks so *", &["funny", "silly", "goofy", "derpy", "dorky"]),
                PlantedPhrase::new("happy bday *", &["dude", "bro", "buddy", "mate", "champ"]),
                PlantedPhrase::new("* ! yeah", &["haha", "hahaha", "lmfao", "rofl", "hehe"]),
            ],
            vec![
                PlantedPhrase::new(
                    "a * what",
                    &["shock", "surprise", "twist", "stunner", "reveal"],
                ),
                PlantedPhrase::new("* user omg", &["whoa", "wait", "seriously", "gosh", "jeez"]),
                PlantedPhrase::new(
                    "* !!! how",
                    &["unbelievable", "insane", "incredible", "crazy", "unreal"],
                ),
                PlantedPhrase::new(
                    "never seen *",
                    &["anything", "something", "nothing", "everything"],
                ),
            ],
            vec![
                PlantedPhrase::new(
                    "* so sad",
                    &["feeling", "truly", "honestly", "deeply", "just"],
                ),
                PlantedPhrase::new(
                    "my heart *",
                    &["breaks", "aches", "bleeds", "hurts", "sinks"],
                ),
                PlantedPhrase::new(
                    "prayers for *",
                    &["victims", "families", "survivors", "everyone", "them"],
                ),
                PlantedPhrase::new(". rip *", &["angel", "brother", "sister", "legend", "hero"]),
            ],
            vec![
                PlantedPhrase::new(
                    "love you *",
                    &["guys", "mom", "babe", "sweetie", "darling", "all"],
                ),
                PlantedPhrase::new(
                    "so * cute",
                    &["freaking", "damn", "super", "totally", "incredibly"],
                ),
                PlantedPhrase::new(
                    "* beautiful couple",
                    &["such", "gorgeous", "lovely", "perfect", "stunning"],
                ),
                PlantedPhrase::new("god bless *", &["you", "her", "him", "us", "america"]),
            ],
        ];
        SynthConfig {
            planted,
            comments_per_emotion: [200; EMOTION_COUNT],
            objective_vocab: OBJECTIVE_WORDS
                .split_whitespace()
                .map(str::to_string)
                .collect(),
            posts: 300,
            post_words: (8, 16),
            context_words: (2, 6),
            phrases_per_comment: (1, 2),
            cross_talk: 0.0,
            sarcasm_rate: 0.0,
            sarcasm_pair: (Emotion::Angry, Emotion::Haha),
        }
    }
}

impl SynthConfig {
    pub fn with_comments_per_emotion(mut self, n: usize) -> Self {
        self.comments_per_emotion = [n; EMOTION_COUNT];
        self
    }

    pub fn with_sarcasm_rate(mut self, rate: f64) -> Self {
        self.sarcasm_rate = rate;
        self
    }

    /// Planted templates for `emotion`, rendered with `*` for the slot.
    pub fn planted_templates(&self, emotion: Emotion) -> Vec<String> {
        self.planted[emotion.index()]
            .iter()
            .map(|p| p.template.join(" "))
            .collect()
    }

    fn validate(&self) -> Result<(), CorpusError> {
        let err = |msg: String| Err(CorpusError::Config(msg));
        for emotion in Emotion::ALL {
            let phrases = &self.planted[emotion.index()];
            let needed = self.comments_per_emotion[emotion.index()] > 0
                || (self.sarcasm_rate > 0.0
                    && (emotion == self.sarcasm_pair.0 || emotion == self.sarcasm_pair.1));
            if needed && phrases.is_empty() {
                return err(format!("no planted vocabulary for {emotion}"));
            }
            for phrase in phrases {
                if phrase.fillers.is_empty() {
                    return err(format!(
                        "phrase `{}` for {emotion} has no fillers",
                        phrase.template.join(" ")
                    ));
                }
                if phrase.template.iter().filter(|t| *t == "*").count() != 1 {
                    return err(format!(
                        "phrase `{}` for {emotion} needs exactly one `*`",
                        phrase.template.join(" ")
                    ));
                }
            }
        }
        if self.objective_vocab.is_empty() {
            return err("objective vocabulary is empty".into());
        }
        if self.posts == 0 {
            return err("at least one post is required".into());
        }
        if !(0.0..=1.0).contains(&self.sarcasm_rate) || !(0.0..=1.0).contains(&self.cross_talk) {
            return err("rates must lie in [0, 1]".into());
        }
        if self.sarcasm_pair.0 == self.sarcasm_pair.1 {
            return err("sarcasm pair must name two different emotions".into());
        }
        let ranges = [
            self.post_words,
            self.context_words,
            self.phrases_per_comment,
        ];
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            return err("inverted range".into());
        }
        if self.phrases_per_comment.0 == 0 {
            return err("comments need at least one planted phrase".into());
        }
        Ok(())
    }
}

/// Output of [`synth_corpus`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub posts: Vec<NewsPost>,
    pub labeled: Vec<LabeledComment>,
    pub sarcastic_ids: BTreeSet<String>,
}

pub fn synth_corpus(config: &SynthConfig, seed: u64) -> Result<SynthCorpus, CorpusError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = &config.objective_vocab;

    let posts: Vec<NewsPost> = (0..config.posts)
        .map(|i| {
            let n = rng.gen_range(config.post_words.0..=config.post_words.1);
            let mut words: Vec<&str> = (0..n)
                .map(|_| vocab.choose(&mut rng).unwrap().as_str())
                .collect();
            words.push(".");
            NewsPost {
                id: format!("n{i:06}"),
                text: capitalize(&words.join(" ")),
                lang: Lang::En,
            }
        })
        .collect();

    let mut drafts: Vec<(Emotion, bool, String)> = Vec::new();
    for emotion in Emotion::ALL {
        for _ in 0..config.comments_per_emotion[emotion.index()] {
            let sarcastic = config.sarcasm_rate > 0.0 && rng.gen_bool(config.sarcasm_rate);
            let text = compose_comment(config, emotion, sarcastic, &mut rng);
            drafts.push((emotion, sarcastic, text));
        }
    }
    drafts.shuffle(&mut rng);

    let mut labeled = Vec::with_capacity(drafts.len());
    let mut sarcastic_ids = BTreeSet::new();
    for (i, (label, sarcastic, text)) in drafts.into_iter().enumerate() {
        let id = format!("c{i:07}");
        if sarcastic {
            sarcastic_ids.insert(id.clone());
        }
        labeled.push(LabeledComment {
            comment: RawComment {
                post_id: posts[rng.gen_range(0..posts.len())].id.clone(),
                user_id: format!("u{i:07}"),
                id,
                text,
                lang: Lang::En,
            },
            label,
        });
    }

    Ok(SynthCorpus {
        posts,
        labeled,
        sarcastic_ids,
    })
}

fn compose_comment(
    config: &SynthConfig,
    emotion: Emotion,
    sarcastic: bool,
    rng: &mut ChaCha8Rng,
) -> String {
    let mut phrases: Vec<Vec<String>> = Vec::new();
    let pick = |e: Emotion, rng: &mut ChaCha8Rng| {
        config.planted[e.index()]
            .choose(rng)
            .expect("validated non-empty")
            .realize(rng)
    };
    if sarcastic {
        let (a, b) = config.sarcasm_pair;
        phrases.push(pick(a, rng));
        phrases.push(pick(b, rng));
    } else {
        let k = rng.gen_range(config.phrases_per_comment.0..=config.phrases_per_comment.1);
        for _ in 0..k {
            phrases.push(pick(emotion, rng));
        }
        if config.cross_talk > 0.0 && rng.gen_bool(config.cross_talk) {
            let others: Vec<Emotion> = Emotion::ALL
                .into_iter()
                .filter(|&e| e != emotion && !config.planted[e.index()].is_empty())
                .collect();
            if let Some(&other) = others.choose(rng) {
                phrases.push(pick(other, rng));
            }
        }
    }

    let n_context = rng.gen_range(config.context_words.0..=config.context_words.1);
    let mut blocks: Vec<Vec<String>> = (0..n_context)
        .map(|_| vec![config.objective_vocab.choose(rng).unwrap().clone()])
        .collect();
    for phrase in phrases {
        let at = rng.gen_range(0..=blocks.len());
        blocks.insert(at, phrase);
    }
    let mut text = blocks.concat().join(" ");
    let ends_in_word = text.chars().last().is_some_and(|c| c.is_alphanumeric());
    if ends_in_word && rng.gen_bool(0.5) {
        text.push_str(["!", "!!", "?", "."].choose(rng).unwrap());
    }
    capitalize(&text)
}

fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl SynthCorpus {
    pub fn comments(&self) -> Vec<RawComment> {
        self.labeled.iter().map(|l| l.comment.clone()).collect()
    }

    /// One reaction per labeled comment, matching its label.
    pub fn reactions(&self) -> Vec<ReactionEvent> {
        self.labeled
            .iter()
            .map(|l| ReactionEvent {
                post_id: l.comment.post_id.clone(),
                user_id: l.comment.user_id.clone(),
                reaction: l.label,
            })
            .collect()
    }

    pub fn is_sarcastic(&self, comment_id: &str) -> bool {
        self.sarcastic_ids.contains(comment_id)
    }

    /// Writes `comments.tsv`, `reactions.tsv`, `posts.tsv`, `labeled.tsv` and
    /// `annotated.tsv` (`comment_id, lang, sarcastic, text`) into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<(), CorpusError> {
        let io = |path: &Path, source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        write_comments(&dir.join("comments.tsv"), &self.comments())?;
        write_reactions(&dir.join("reactions.tsv"), &self.reactions())?;
        write_posts(&dir.join("posts.tsv"), &self.posts)?;
        write_labeled(&dir.join("labeled.tsv"), &self.labeled)?;

        let path = dir.join("annotated.tsv");
        let mut out = BufWriter::new(File::create(&path).map_err(|e| io(&path, e))?);
        for l in &self.labeled {
            let c = &l.comment;
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                c.id,
                c.lang,
                u8::from(self.is_sarcastic(&c.id)),
                c.text
            )
            .map_err(|e| io(&path, e))?;
        }
        out.flush().map_err(|e| io(&path, e))
    }

    /// Writes a multi-annotator file (`text_id, lang, l1,...,lm, text`) where
    /// each annotator reports the injected truth flipped with probability
    /// `flip_rate`.
    pub fn write_annotation_file(
        &self,
        path: &Path,
        annotators: usize,
        flip_rate: f64,
        seed: u64,
    ) -> Result<(), CorpusError> {
        let io = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        for l in &self.labeled {
            let truth = self.is_sarcastic(&l.comment.id);
            let votes: Vec<&str> = (0..annotators)
                .map(|_| {
                    let flip = flip_rate > 0.0 && rng.gen_bool(flip_rate);
                    if truth != flip {
                        "1"
                    } else {
                        "0"
                    }
                })
                .collect();
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                l.comment.id,
                l.comment.lang,
                votes.join(","),
                l.comment.text
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }
}
