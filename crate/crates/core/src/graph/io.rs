//! Text formats.
//!
//! Graph file: a header line `n m 10`, then one line per vertex holding its
//! weight followed by its 1-indexed neighbors. Lines starting with `%` are
//! comments. Solution file: one 1-indexed vertex id per line, ascending.

use std::fmt::Write as _;
use std::path::Path;

use super::{GraphError, StaticGraph, VertexId, Weight};

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_graph(text: &str) -> Result<StaticGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('%'));

    let (header_line, header) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some(x) => break x,
            None => return Err(parse_err(1, "missing header")),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(header_line, "header must be `n m fmt`"));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(header_line, "invalid vertex count"))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(header_line, "invalid edge count"))?;
    if fields[2] != "10" {
        return Err(parse_err(
            header_line,
            format!("unsupported format `{}`, expected 10", fields[2]),
        ));
    }

    let mut weights = Vec::with_capacity(n);
    let mut adjacency: Vec<Vec<VertexId>> = Vec::with_capacity(n);
    let mut line_of = Vec::with_capacity(n);
    for v in 0..n {
        let (line_no, line) = lines.next().ok_or_else(|| {
            parse_err(header_line, format!("expected {n} vertex lines, found {v}"))
        })?;
        let mut tokens = line.split_whitespace();
        let weight: Weight = tokens
            .next()
            .ok_or_else(|| parse_err(line_no, format!("missing weight of vertex {}", v + 1)))?
            .parse()
            .map_err(|_| parse_err(line_no, format!("invalid weight of vertex {}", v + 1)))?;
        if weight <= 0 {
            return Err(parse_err(
                line_no,
                format!("non-positive weight at vertex {}", v + 1),
            ));
        }
        let mut nbrs = Vec::new();
        for tok in tokens {
            let u: usize = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid neighbor `{tok}`")))?;
            if u == 0 || u > n {
                return Err(parse_err(line_no, format!("neighbor {u} out of range")));
            }
            if u == v + 1 {
                return Err(parse_err(line_no, format!("self-loop at vertex {}", v + 1)));
            }
            nbrs.push(u - 1);
        }
        nbrs.sort_unstable();
        if nbrs.windows(2).any(|w| w[0] == w[1]) {
            return Err(parse_err(
                line_no,
                format!("duplicate neighbor at vertex {}", v + 1),
            ));
        }
        weights.push(weight);
        adjacency.push(nbrs);
        line_of.push(line_no);
    }
    for (line_no, line) in lines {
        if !line.trim().is_empty() {
            return Err(parse_err(line_no, "unexpected content after vertex lines"));
        }
    }

    let mut entries = 0usize;
    for v in 0..n {
        for &u in &adjacency[v] {
            if adjacency[u].binary_search(&v).is_err() {
                return Err(parse_err(
                    line_of[u],
                    format!("asymmetric adjacency at vertex {}", u + 1),
                ));
            }
        }
        entries += adjacency[v].len();
    }
    if entries / 2 != m {
        return Err(parse_err(
            header_line,
            format!(
                "edge count mismatch: header says {m}, found {}",
                entries / 2
            ),
        ));
    }
    StaticGraph::from_adjacency(weights, adjacency)
}

pub fn write_graph(g: &StaticGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} 10", g.n(), g.m());
    for v in 0..g.n() {
        let _ = write!(out, "{}", g.weight(v));
        for &u in g.neighbors(v) {
            let _ = write!(out, " {}", u + 1);
        }
        out.push('\n');
    }
    out
}

pub fn read_graph_file(path: &Path) -> Result<StaticGraph, GraphError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}

/// Parses a solution file into sorted 0-based ids.
pub fn read_solution(text: &str, n: usize) -> Result<Vec<VertexId>, GraphError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let v: usize = t
            .parse()
            .map_err(|_| parse_err(i + 1, format!("invalid vertex id `{t}`")))?;
        if v == 0 || v > n {
            return Err(parse_err(i + 1, format!("vertex {v} out of range")));
        }
        out.push(v - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn write_solution(set: &[VertexId]) -> String {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    let mut out = String::new();
    for v in sorted {
        let _ = writeln!(out, "{}", v + 1);
    }
    out
}
