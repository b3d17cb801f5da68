//! Tab-separated record files.
//!
//! Comment:  `id, post_id, user_id, lang, text`
//! Labeled:  `id, post_id, user_id, lang, label, text`
//! Reaction: `post_id, user_id, reaction`
//! Post:     `id, lang, text`
//! Sarcasm:  `id, lang, sarcastic (0|1), text`
//!
//! The text field is always last and may itself contain tabs.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{
    CorpusError, Emotion, LabeledComment, Lang, NewsPost, RawComment, ReactionEvent, SarcasmExample,
};

/// Records read from one file plus what was dropped along the way.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    /// Lines that did not parse.
    pub malformed: usize,
    /// Comment ids seen more than once (all copies are kept), or reaction
    /// keys seen more than once (later copies are dropped).
    pub duplicates: usize,
    /// Well-formed records tagged with a different language than requested.
    pub skipped_lang: usize,
}

impl<T> Default for Loaded<T> {
    fn default() -> Self {
        Loaded {
            records: Vec::new(),
            malformed: 0,
            duplicates: 0,
            skipped_lang: 0,
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Drives `parse` over every non-blank line and applies the majority-malformed rule.
fn read_records<T>(
    path: &Path,
    mut parse: impl FnMut(&str) -> Option<T>,
) -> Result<(Vec<T>, usize), CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::with_capacity(1 << 20, file);
    let mut records = Vec::new();
    let mut malformed = 0;
    let mut lines = 0;
    for line in reader.lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        match parse(line) {
            Some(record) => records.push(record),
            None => malformed += 1,
        }
    }
    if malformed * 2 > lines {
        return Err(CorpusError::Format {
            path: path.display().to_string(),
            malformed,
            lines,
        });
    }
    if malformed > 0 {
        log::warn!("{}: skipped {malformed} malformed lines", path.display());
    }
    Ok((records, malformed))
}

fn non_empty(field: &str) -> Option<&str> {
    (!field.is_empty()).then_some(field)
}

fn text_field(field: &str) -> Option<String> {
    (!field.trim().is_empty()).then(|| field.to_string())
}

pub fn parse_comment_line(line: &str) -> Option<RawComment> {
    let mut fields = line.splitn(5, '\t');
    let id = non_empty(fields.next()?)?;
    let post_id = non_empty(fields.next()?)?;
    let user_id = non_empty(fields.next()?)?;
    let lang: Lang = fields.next()?.parse().ok()?;
    let text = text_field(fields.next()?)?;
    Some(RawComment {
        id: id.to_string(),
        post_id: post_id.to_string(),
        user_id: user_id.to_string(),
        text,
        lang,
    })
}

pub fn parse_labeled_line(line: &str) -> Option<LabeledComment> {
    let mut fields = line.splitn(6, '\t');
    let id = non_empty(fields.next()?)?;
    let post_id = non_empty(fields.next()?)?;
    let user_id = non_empty(fields.next()?)?;
    let lang: Lang = fields.next()?.parse().ok()?;
    let label: Emotion = fields.next()?.parse().ok()?;
    let text = text_field(fields.next()?)?;
    Some(LabeledComment {
        comment: RawComment {
            id: id.to_string(),
            post_id: post_id.to_string(),
            user_id: user_id.to_string(),
            text,
            lang,
        },
        label,
    })
}

fn parse_reaction_line(line: &str) -> Option<ReactionEvent> {
    let mut fields = line.split('\t');
    let post_id = non_empty(fields.next()?)?;
    let user_id = non_empty(fields.next()?)?;
    let reaction: Emotion = fields.next()?.trim().parse().ok()?;
    if fields.next().is_some() {
        return None;
    }
    Some(ReactionEvent {
        post_id: post_id.to_string(),
        user_id: user_id.to_string(),
        reaction,
    })
}

fn parse_post_line(line: &str) -> Option<NewsPost> {
    let mut fields = line.splitn(3, '\t');
    let id = non_empty(fields.next()?)?;
    let lang: Lang = fields.next()?.parse().ok()?;
    let text = text_field(fields.next()?)?;
    Some(NewsPost {
        id: id.to_string(),
        text,
        lang,
    })
}

fn parse_sarcasm_line(line: &str) -> Option<SarcasmExample> {
    let mut fields = line.splitn(4, '\t');
    let id = non_empty(fields.next()?)?;
    let lang: Lang = fields.next()?.parse().ok()?;
    let sarcastic = match fields.next()?.trim() {
        "1" => true,
        "0" => false,
        _ => return None,
    };
    let text = text_field(fields.next()?)?;
    Some(SarcasmExample {
        id: id.to_string(),
        lang,
        sarcastic,
        text,
    })
}

fn count_duplicate_ids<'a>(path: &Path, ids: impl Iterator<Item = &'a str>) -> usize {
    let mut seen = HashSet::new();
    let mut duplicates = 0;
    for id in ids {
        if !seen.insert(id) {
            duplicates += 1;
        }
    }
    if duplicates > 0 {
        log::warn!("{}: {duplicates} duplicated comment ids", path.display());
    }
    duplicates
}

/// Reads a comment file, keeping records tagged with `lang`.
pub fn load_comments(path: &Path, lang: Lang) -> Result<Loaded<RawComment>, CorpusError> {
    let (all, malformed) = read_records(path, parse_comment_line)?;
    let before = all.len();
    let records: Vec<_> = all.into_iter().filter(|c| c.lang == lang).collect();
    let duplicates = count_duplicate_ids(path, records.iter().map(|c| c.id.as_str()));
    Ok(Loaded {
        skipped_lang: before - records.len(),
        records,
        malformed,
        duplicates,
    })
}

pub fn load_labeled(path: &Path, lang: Lang) -> Result<Loaded<LabeledComment>, CorpusError> {
    let (all, malformed) = read_records(path, parse_labeled_line)?;
    let before = all.len();
    let records: Vec<_> = all.into_iter().filter(|c| c.comment.lang == lang).collect();
    let duplicates = count_duplicate_ids(path, records.iter().map(|c| c.comment.id.as_str()));
    Ok(Loaded {
        skipped_lang: before - records.len(),
        records,
        malformed,
        duplicates,
    })
}

/// Reads a single-label sarcasm file, keeping records tagged with `lang`.
pub fn load_sarcasm_labeled(
    path: &Path,
    lang: Lang,
) -> Result<Loaded<SarcasmExample>, CorpusError> {
    let (all, malformed) = read_records(path, parse_sarcasm_line)?;
    let before = all.len();
    let records: Vec<_> = all.into_iter().filter(|c| c.lang == lang).collect();
    let duplicates = count_duplicate_ids(path, records.iter().map(|c| c.id.as_str()));
    Ok(Loaded {
        skipped_lang: before - records.len(),
        records,
        malformed,
        duplicates,
    })
}

/// Record layout of a text-bearing file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Comments,
    Labeled,
    Posts,
}

/// Guesses the layout from the first non-blank line: a language tag in the
/// second field means posts; a language then an emotion in fields four and
/// five means labeled comments; anything else is read as comments.
pub fn detect_kind(path: &Path) -> Result<FileKind, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() >= 3 && fields[1].parse::<Lang>().is_ok() {
            return Ok(FileKind::Posts);
        }
        if fields.len() >= 6
            && fields[3].parse::<Lang>().is_ok()
            && fields[4].parse::<Emotion>().is_ok()
        {
            return Ok(FileKind::Labeled);
        }
        break;
    }
    Ok(FileKind::Comments)
}

/// `(id, text)` pairs of any comment, labeled or post file.
pub fn load_texts(path: &Path, lang: Lang) -> Result<Vec<(String, String)>, CorpusError> {
    Ok(match detect_kind(path)? {
        FileKind::Comments => load_comments(path, lang)?
            .records
            .into_iter()
            .map(|c| (c.id, c.text))
            .collect(),
        FileKind::Labeled => load_labeled(path, lang)?
            .records
            .into_iter()
            .map(|l| (l.comment.id, l.comment.text))
            .collect(),
        FileKind::Posts => load_posts(path, lang)?
            .records
            .into_iter()
            .map(|p| (p.id, p.text))
            .collect(),
    })
}

/// Reads a reaction file. Later events for an already-seen
/// `(post_id, user_id)` key are rejected and counted.
pub fn load_reactions(path: &Path) -> Result<Loaded<ReactionEvent>, CorpusError> {
    let (all, malformed) = read_records(path, parse_reaction_line)?;
    let mut seen: HashMap<(String, String), ()> = HashMap::with_capacity(all.len());
    let mut records = Vec::with_capacity(all.len());
    let mut duplicates = 0;
    for event in all {
        let key = (event.post_id.clone(), event.user_id.clone());
        if seen.insert(key, ()).is_some() {
            duplicates += 1;
        } else {
            records.push(event);
        }
    }
    if duplicates > 0 {
        log::warn!(
            "{}: rejected {duplicates} duplicate reactions",
            path.display()
        );
    }
    Ok(Loaded {
        records,
        malformed,
        duplicates,
        skipped_lang: 0,
    })
}

pub fn load_posts(path: &Path, lang: Lang) -> Result<Loaded<NewsPost>, CorpusError> {
    let (all, malformed) = read_records(path, parse_post_line)?;
    let before = all.len();
    let records: Vec<_> = all.into_iter().filter(|p| p.lang == lang).collect();
    Ok(Loaded {
        skipped_lang: before - records.len(),
        records,
        malformed,
        duplicates: 0,
    })
}

fn single_line(text: &str) -> std::borrow::Cow<'_, str> {
    if text.contains(['\n', '\r']) {
        text.replace(['\n', '\r'], " ").into()
    } else {
        text.into()
    }
}

fn write_lines<T>(
    path: &Path,
    items: &[T],
    mut line: impl FnMut(&mut dyn Write, &T) -> std::io::Result<()>,
) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        line(&mut out, item).map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

pub fn write_comments(path: &Path, comments: &[RawComment]) -> Result<(), CorpusError> {
    write_lines(path, comments, |out, c| {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            c.id,
            c.post_id,
            c.user_id,
            c.lang,
            single_line(&c.text)
        )
    })
}

pub fn write_labeled(path: &Path, labeled: &[LabeledComment]) -> Result<(), CorpusError> {
    write_lines(path, labeled, |out, l| {
        let c = &l.comment;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            c.id,
            c.post_id,
            c.user_id,
            c.lang,
            l.label,
            single_line(&c.text)
        )
    })
}

pub fn write_reactions(path: &Path, reactions: &[ReactionEvent]) -> Result<(), CorpusError> {
    write_lines(path, reactions, |out, r| {
        writeln!(out, "{}\t{}\t{}", r.post_id, r.user_id, r.reaction)
    })
}

pub fn write_posts(path: &Path, posts: &[NewsPost]) -> Result<(), CorpusError> {
    write_lines(path, posts, |out, p| {
        writeln!(out, "{}\t{}\t{}", p.id, p.lang, single_line(&p.text))
    })
}
