//! Model file: a versioned header followed by one pattern per line,
//! `pattern<TAB>f_angry<TAB>f_haha<TAB>f_wow<TAB>f_sad<TAB>f_love<TAB>uew`.
//! ED weights and rankings are recomputed on load.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{build_model_in, EmotionModel, LogBase, Pattern, PatternError, PatternStats};
use crate::corpus::EMOTION_COUNT;

pub const MODEL_HEADER: &str = "#reaction-miner-model v1";

impl EmotionModel {
    pub fn write(&self, path: &Path) -> Result<(), PatternError> {
        let io = |source| PatternError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        self.write_to(&mut out).map_err(io)?;
        out.flush().map_err(io)
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{MODEL_HEADER} patterns={}", self.len())?;
        for (pattern, stats) in self.patterns().iter().zip(self.stats()) {
            write!(out, "{pattern}")?;
            for f in stats.freqs() {
                write!(out, "\t{f}")?;
            }
            writeln!(out, "\t{}", stats.uew())?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<EmotionModel, PatternError> {
        Self::read_in(path, LogBase::Natural)
    }

    pub fn read_in(path: &Path, base: LogBase) -> Result<EmotionModel, PatternError> {
        let shown = path.display().to_string();
        let io = |source| PatternError::Io {
            path: shown.clone(),
            source,
        };
        let parse = |line: usize, reason: String| PatternError::Parse {
            path: shown.clone(),
            line,
            reason,
        };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        let mut lines = reader.lines();
        let header = lines.next().transpose().map_err(io)?.unwrap_or_default();
        let declared: usize = header
            .strip_prefix(MODEL_HEADER)
            .and_then(|rest| rest.trim().strip_prefix("patterns="))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| parse(1, format!("expected `{MODEL_HEADER} patterns=N` header")))?;

        let mut patterns = Vec::with_capacity(declared);
        let mut stats = Vec::with_capacity(declared);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(io)?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != EMOTION_COUNT + 2 {
                return Err(parse(
                    line_no,
                    format!("expected {} fields", EMOTION_COUNT + 2),
                ));
            }
            let pattern: Pattern = fields[0]
                .parse()
                .map_err(|e: PatternError| parse(line_no, e.to_string()))?;
            let mut freq = [0u64; EMOTION_COUNT];
            for (slot, field) in freq.iter_mut().zip(&fields[1..=EMOTION_COUNT]) {
                *slot = field
                    .parse()
                    .map_err(|_| parse(line_no, format!("bad count `{field}`")))?;
            }
            let uew: usize = fields[EMOTION_COUNT + 1]
                .parse()
                .map_err(|_| parse(line_no, "bad filler count".to_string()))?;
            let s =
                PatternStats::from_counts(freq, uew).map_err(|e| parse(line_no, e.to_string()))?;
            patterns.push(pattern);
            stats.push(s);
        }
        if patterns.len() != declared {
            return Err(parse(
                1,
                format!(
                    "header declares {declared} patterns, found {}",
                    patterns.len()
                ),
            ));
        }
        build_model_in(base, patterns, stats)
    }
}
