use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GraphSource, SampledGraph, SamplingError};

/// Bookkeeping from [`load_edge_list`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeListStats {
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
    /// No id 0 appeared, so ids were shifted down by one.
    pub one_indexed: bool,
}

/// JSON written next to an edge-list file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSidecar {
    pub n: usize,
    pub seed: Option<u64>,
    pub source: GraphSource,
}

impl From<&SampledGraph> for GraphSidecar {
    fn from(g: &SampledGraph) -> Self {
        Self { n: g.n(), seed: g.seed(), source: g.source().clone() }
    }
}

fn parse_id(token: Option<&str>, line: usize) -> Result<usize, SamplingError> {
    let token = token.ok_or_else(|| SamplingError::Parse { line, message: "expected two vertex ids".into() })?;
    token.parse().map_err(|_| SamplingError::Parse {
        line,
        message: format!("invalid vertex id {token:?}"),
    })
}

/// Reads whitespace-separated `u v` pairs, one per line. Text after `#` is
/// ignored. Ids are 0-indexed unless no id 0 occurs, in which case they are
/// taken as 1-indexed. The vertex count is one more than the largest id.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<(SampledGraph, EdgeListStats), SamplingError> {
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let u = parse_id(tokens.next(), idx + 1)?;
        let v = parse_id(tokens.next(), idx + 1)?;
        if tokens.next().is_some() {
            return Err(SamplingError::Parse { line: idx + 1, message: "more than two fields".into() });
        }
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(SamplingError::EmptyInput);
    }
    let one_indexed = raw.iter().all(|&(u, v)| u != 0 && v != 0);
    let shift = usize::from(one_indexed);
    let mut stats = EdgeListStats { one_indexed, ..Default::default() };
    let mut edges = BTreeSet::new();
    let mut max_id = 0;
    for (u, v) in raw {
        let (u, v) = (u - shift, v - shift);
        max_id = max_id.max(u).max(v);
        if u == v {
            stats.self_loops_dropped += 1;
        } else if !edges.insert((u.min(v), u.max(v))) {
            stats.duplicates_collapsed += 1;
        }
    }
    if stats.self_loops_dropped > 0 {
        log::warn!("dropped {} self-loop(s)", stats.self_loops_dropped);
    }
    let g = SampledGraph::from_edges(max_id + 1, edges).with_provenance(None, None, GraphSource::External);
    Ok((g, stats))
}

pub fn load_edge_list_path(path: impl AsRef<Path>) -> Result<(SampledGraph, EdgeListStats), SamplingError> {
    load_edge_list(BufReader::new(File::open(path)?))
}

/// Writes the 0-indexed edge list. Pair with [`GraphSidecar`] to keep `n`
/// when trailing vertices are isolated.
pub fn write_edge_list<W: Write>(g: &SampledGraph, mut out: W) -> Result<(), SamplingError> {
    writeln!(out, "# n={}", g.n())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(s: &str) -> Result<(SampledGraph, EdgeListStats), SamplingError> {
        load_edge_list(s.as_bytes())
    }

    #[test]
    fn path_from_zero_indexed() {
        let (g, stats) = load("0 1\n1 2").unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(!stats.one_indexed);
        assert!(g.latent_positions().is_none());
        assert_eq!(g.source(), &GraphSource::External);
    }

    #[test]
    fn duplicates_and_loops() {
        let (g, stats) = load("1 2\n2 1\n2 2").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(stats.self_loops_dropped, 1);
        assert_eq!(stats.duplicates_collapsed, 1);
        assert!(stats.one_indexed);
    }

    #[test]
    fn comments_and_blank_lines() {
        let (g, _) = load("# header\n\n0 1 # trailing\n  1 2\n").unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(load("a b"), Err(SamplingError::Parse { line: 1, .. })));
        assert!(matches!(load("0 1\n2"), Err(SamplingError::Parse { line: 2, .. })));
        assert!(matches!(load("0 1\n# c\n1 2 3"), Err(SamplingError::Parse { line: 3, .. })));
        assert!(matches!(load(""), Err(SamplingError::EmptyInput)));
        assert!(matches!(load("# only comments\n"), Err(SamplingError::EmptyInput)));
    }

    #[test]
    fn round_trip() {
        let g = SampledGraph::cycle(7);
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let (back, _) = load_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
        let side = serde_json::to_value(GraphSidecar::from(&g)).unwrap();
        assert_eq!(side, serde_json::json!({"n": 7, "seed": null, "source": "constructed"}));
    }
}
