//! Directed adjacency co-occurrence graphs and objective-term reduction.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::textproc::{is_symbol_surface, TokenSeq};

pub const DEFAULT_DOMINANCE: f64 = 0.5;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("dominance must lie in (0, 1], got {0}")]
    Dominance(f64),
    #[error("graph {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("graph {path}, line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

/// Word co-occurrence graph. An edge `a → b` counts how often `b`
/// immediately follows `a`; node frequency counts occurrences.
#[derive(Debug, Clone, Default)]
pub struct CoocGraph {
    surfaces: Vec<String>,
    index: HashMap<String, u32>,
    node_freq: Vec<u64>,
    edges: HashMap<(u32, u32), u64>,
    total: u64,
}

impl PartialEq for CoocGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes() == other.nodes() && self.edges() == other.edges()
    }
}

impl CoocGraph {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, surface: &str) -> u32 {
        if let Some(&id) = self.index.get(surface) {
            return id;
        }
        let id = self.surfaces.len() as u32;
        self.surfaces.push(surface.to_string());
        self.index.insert(surface.to_string(), id);
        self.node_freq.push(0);
        id
    }

    pub fn add_node(&mut self, surface: &str, freq: u64) {
        let id = self.intern(surface);
        self.node_freq[id as usize] += freq;
        self.total += freq;
    }

    pub fn add_edge(&mut self, from: &str, to: &str, freq: u64) {
        let a = self.intern(from);
        let b = self.intern(to);
        *self.edges.entry((a, b)).or_insert(0) += freq;
    }

    /// Counts one token sequence into the graph.
    pub fn add_sequence(&mut self, seq: &TokenSeq) {
        let mut prev: Option<u32> = None;
        for element in &seq.elements {
            let id = self.intern(element.surface());
            self.node_freq[id as usize] += 1;
            self.total += 1;
            if let Some(p) = prev {
                *self.edges.entry((p, id)).or_insert(0) += 1;
            }
            prev = Some(id);
        }
    }

    /// Frequency-wise union.
    pub fn merge(&mut self, other: &CoocGraph) {
        let remap: Vec<u32> = other.surfaces.iter().map(|s| self.intern(s)).collect();
        for (i, &freq) in other.node_freq.iter().enumerate() {
            self.node_freq[remap[i] as usize] += freq;
        }
        self.total += other.total;
        for (&(a, b), &freq) in &other.edges {
            *self
                .edges
                .entry((remap[a as usize], remap[b as usize]))
                .or_insert(0) += freq;
        }
    }

    /// Zero when absent.
    pub fn node_freq(&self, surface: &str) -> u64 {
        self.index
            .get(surface)
            .map_or(0, |&id| self.node_freq[id as usize])
    }

    pub fn edge_freq(&self, from: &str, to: &str) -> u64 {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.edges.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.node_freq(surface) > 0
    }

    /// Sum of node frequencies.
    pub fn total_node_freq(&self) -> u64 {
        self.total
    }

    pub fn node_count(&self) -> usize {
        self.node_freq.iter().filter(|&&f| f > 0).count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    /// Relative frequency of `surface`: its frequency over the graph total.
    pub fn relative_freq(&self, surface: &str) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.node_freq(surface) as f64 / self.total as f64
        }
    }

    /// Nodes sorted by surface.
    pub fn nodes(&self) -> Vec<(&str, u64)> {
        let mut out: Vec<(&str, u64)> = self
            .surfaces
            .iter()
            .zip(&self.node_freq)
            .filter(|(_, &f)| f > 0)
            .map(|(s, &f)| (s.as_str(), f))
            .collect();
        out.sort_unstable();
        out
    }

    /// Edges sorted by (from, to).
    pub fn edges(&self) -> Vec<(&str, &str, u64)> {
        let mut out: Vec<(&str, &str, u64)> = self
            .edges
            .iter()
            .map(|(&(a, b), &f)| {
                (
                    self.surfaces[a as usize].as_str(),
                    self.surfaces[b as usize].as_str(),
                    f,
                )
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// `#nodes N #edges M`, then `n` lines, then `e` lines.
    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "#nodes {} #edges {}",
            self.node_count(),
            self.edge_count()
        )?;
        for (surface, freq) in self.nodes() {
            writeln!(out, "n\t{surface}\t{freq}")?;
        }
        for (from, to, freq) in self.edges() {
            writeln!(out, "e\t{from}\t{to}\t{freq}")?;
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), GraphError> {
        write_file(path, |out| self.write_to(out))
    }

    pub fn read(path: &Path) -> Result<CoocGraph, GraphError> {
        Ok(read_file(path)?.0)
    }
}

/// Builds a graph from token sequences, counting in parallel.
pub fn build_graph(seqs: &[TokenSeq]) -> CoocGraph {
    seqs.par_chunks(4096)
        .map(|chunk| {
            let mut g = CoocGraph::new();
            for seq in chunk {
                g.add_sequence(seq);
            }
            g
        })
        .reduce(CoocGraph::new, |mut a, b| {
            if a.surfaces.len() < b.surfaces.len() {
                let mut b = b;
                b.merge(&a);
                return b;
            }
            a.merge(&b);
            a
        })
}

/// Subjective graph after removing objective-dominant words.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReducedGraph {
    pub graph: CoocGraph,
    pub removed: BTreeSet<String>,
}

impl ReducedGraph {
    pub fn contains(&self, surface: &str) -> bool {
        self.graph.contains(surface)
    }

    /// Writes the graph followed by `r<TAB>surface` lines for removed words.
    pub fn write(&self, path: &Path) -> Result<(), GraphError> {
        write_file(path, |out| {
            self.graph.write_to(out)?;
            for surface in &self.removed {
                writeln!(out, "r\t{surface}")?;
            }
            Ok(())
        })
    }

    pub fn read(path: &Path) -> Result<ReducedGraph, GraphError> {
        let (graph, removed) = read_file(path)?;
        Ok(ReducedGraph { graph, removed })
    }
}

/// True when `surface` should be dropped from the subjective graph: it is a
/// word, and its relative frequency in the objective graph reaches
/// `dominance` times its relative frequency in the subjective graph.
/// Symbols are never removed.
pub fn is_objective_dominant(
    surface: &str,
    subjective: &CoocGraph,
    objective: &CoocGraph,
    dominance: f64,
) -> bool {
    if is_symbol_surface(surface) {
        return false;
    }
    let objective_rel = objective.relative_freq(surface);
    objective_rel > 0.0 && objective_rel >= dominance * subjective.relative_freq(surface)
}

pub fn reduce_graph(
    subjective: &CoocGraph,
    objective: &CoocGraph,
    dominance: f64,
) -> Result<ReducedGraph, GraphError> {
    if !(dominance > 0.0 && dominance <= 1.0) {
        return Err(GraphError::Dominance(dominance));
    }
    let removed: BTreeSet<String> = subjective
        .nodes()
        .into_iter()
        .filter(|(s, _)| is_objective_dominant(s, subjective, objective, dominance))
        .map(|(s, _)| s.to_string())
        .collect();

    let mut graph = CoocGraph::new();
    for (surface, freq) in subjective.nodes() {
        if !removed.contains(surface) {
            graph.add_node(surface, freq);
        }
    }
    for (from, to, freq) in subjective.edges() {
        if !removed.contains(from) && !removed.contains(to) {
            graph.add_edge(from, to, freq);
        }
    }
    Ok(ReducedGraph { graph, removed })
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), GraphError> {
    let io = |source| GraphError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    body(&mut out).map_err(io)?;
    out.flush().map_err(io)
}

fn read_file(path: &Path) -> Result<(CoocGraph, BTreeSet<String>), GraphError> {
    let io = |source| GraphError::Io {
        path: path.display().to_string(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut graph = CoocGraph::new();
    let mut removed = BTreeSet::new();
    let mut expected: Option<(usize, usize)> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        let parse_err = |reason: &str| GraphError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            reason: reason.to_string(),
        };
        if i == 0 {
            expected = Some(parse_header(&line).ok_or_else(|| parse_err("bad header"))?);
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let freq = |s: &str| -> Result<u64, GraphError> {
            match s.parse::<u64>() {
                Ok(f) if f > 0 => Ok(f),
                _ => Err(parse_err("frequency must be a positive integer")),
            }
        };
        match fields.as_slice() {
            ["n", surface, f] => graph.add_node(surface, freq(f)?),
            ["e", from, to, f] => {
                if !graph.contains(from) || !graph.contains(to) {
                    return Err(parse_err("edge endpoint is not a node"));
                }
                graph.add_edge(from, to, freq(f)?)
            }
            ["r", surface] => {
                removed.insert(surface.to_string());
            }
            [""] => {}
            _ => return Err(parse_err("unrecognized record")),
        }
    }
    let Some((nodes, edges)) = expected else {
        return Err(GraphError::Parse {
            path: path.display().to_string(),
            line: 1,
            reason: "missing header".into(),
        });
    };
    if graph.node_count() != nodes || graph.edge_count() != edges {
        return Err(GraphError::Parse {
            path: path.display().to_string(),
            line: 1,
            reason: format!(
                "header promises {nodes} nodes / {edges} edges, found {} / {}",
                graph.node_count(),
                graph.edge_count()
            ),
        });
    }
    Ok((graph, removed))
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    if parts.next()? != "#nodes" {
        return None;
    }
    let nodes = parts.next()?.parse().ok()?;
    if parts.next()? != "#edges" {
        return None;
    }
    let edges = parts.next()?.parse().ok()?;
    Some((nodes, edges))
}
