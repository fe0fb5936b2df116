//! Training labels: test a rule at every vertex without keeping the result.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::{DynamicGraph, StaticGraph, VertexId};
use crate::reductions::{
    apply_rule, ReducerBudgets, ReductionLog, RuleContext, RuleFlags, RuleId, RuleOutcome,
};
use crate::scheduler::{run_reduce, ModelSet, ReduceConfig, ScreeningMode};

pub const UNSUCCESSFUL: u8 = 0;
pub const SUCCESSFUL: u8 = 1;
pub const TIMEOUT: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelRecord {
    pub vertex: VertexId,
    pub rule: RuleId,
    pub label: u8,
}

/// Whether label 1 marks the rule's targets instead of the tested vertex.
fn labels_targets(rule: RuleId) -> bool {
    rule.is_global() || matches!(rule, RuleId::Twin | RuleId::HeavySet | RuleId::HeavySet3)
}

fn test_range(
    g: &DynamicGraph,
    rule: RuleId,
    budgets: ReducerBudgets,
    flags: RuleFlags,
    anchors: &[VertexId],
) -> Vec<(VertexId, u8)> {
    let mut g = g.clone();
    let mut log = ReductionLog::new();
    let mut marks = Vec::new();
    for &v in anchors {
        let mark = g.checkpoint();
        let mut ctx = RuleContext::new(budgets, flags);
        match apply_rule(rule, &mut g, &mut log, &mut ctx, v) {
            RuleOutcome::Applied { targets } => {
                if labels_targets(rule) {
                    marks.extend(targets.into_iter().map(|t| (t, SUCCESSFUL)));
                } else {
                    marks.push((v, SUCCESSFUL));
                }
            }
            RuleOutcome::Skipped(_) if rule.uses_oracle() => marks.push((v, TIMEOUT)),
            _ => {}
        }
        g.rollback(mark);
        log.truncate(0, 0);
    }
    marks
}

/// One record per active vertex of `g`, in increasing id order. Label 1 beats
/// label 2 when a vertex collects both. `g` is only read.
pub fn generate_labels(
    g: &DynamicGraph,
    rule: RuleId,
    budgets: &ReducerBudgets,
    flags: &RuleFlags,
) -> Vec<LabelRecord> {
    let active: Vec<VertexId> = g.active_vertices().collect();
    let anchors: &[VertexId] = if rule.is_global() {
        &active[..active.len().min(1)]
    } else {
        &active
    };
    let chunk = anchors.len().div_ceil(rayon::current_num_threads()).max(1);
    let marks: Vec<(VertexId, u8)> = anchors
        .par_chunks(chunk)
        .flat_map_iter(|part| test_range(g, rule, *budgets, *flags, part))
        .collect();
    let mut label = vec![UNSUCCESSFUL; g.slots()];
    for (v, l) in marks {
        if l == SUCCESSFUL || label[v] == UNSUCCESSFUL {
            label[v] = l;
        }
    }
    active
        .into_iter()
        .map(|vertex| LabelRecord {
            vertex,
            rule,
            label: label[vertex],
        })
        .collect()
}

/// The kernel left by the cheap rules, used for the reduced dataset.
pub fn after_cheap(g: &StaticGraph, budgets: &ReducerBudgets, flags: &RuleFlags) -> StaticGraph {
    let cfg = ReduceConfig {
        mode: ScreeningMode::NoGnnRed,
        budgets: *budgets,
        flags: *flags,
    };
    let reduced = run_reduce(DynamicGraph::from_static(g), &cfg, &ModelSet::new())
        .expect("no models needed without expensive rules");
    reduced.graph.to_static().0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Split::Train, Split::Val, Split::Test]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown split {s:?}"))
    }
}

/// Random 60/20/20 assignment of `n` vertices. Validation and test get
/// floor(n/5) each, so rounding favors training.
pub fn split_vertices(n: usize, seed: u64) -> Vec<Split> {
    let small = n / 5;
    let mut tags: Vec<Split> = (0..n)
        .map(|i| match i {
            i if i < small => Split::Val,
            i if i < 2 * small => Split::Test,
            _ => Split::Train,
        })
        .collect();
    tags.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    tags
}

pub const LABEL_HEADER: &str = "graph,vertex,rule,label";
pub const SPLIT_HEADER: &str = "graph,vertex,split";

/// Labels as CSV with 1-indexed vertices.
pub fn write_labels_csv(graph: &str, records: &[LabelRecord]) -> String {
    let mut out = String::from(LABEL_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{graph},{},{},{}\n",
            r.vertex + 1,
            r.rule,
            r.label
        ));
    }
    out
}

pub fn write_splits_csv(graph: &str, splits: &[Split]) -> String {
    let mut out = String::from(SPLIT_HEADER);
    out.push('\n');
    for (v, s) in splits.iter().enumerate() {
        out.push_str(&format!("{graph},{},{s}\n", v + 1));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

fn csv_rows<'a>(
    text: &'a str,
    header: &str,
    columns: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>, CsvError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(CsvError {
                line: 1,
                message: format!("expected header {header:?}"),
            })
        }
    }
    lines
        .map(|(i, l)| {
            let cols: Vec<&str> = l.trim().split(',').collect();
            if cols.len() != columns {
                return Err(CsvError {
                    line: i + 1,
                    message: format!("expected {columns} columns, found {}", cols.len()),
                });
            }
            Ok((i + 1, cols))
        })
        .collect()
}

fn vertex_column(line: usize, s: &str) -> Result<VertexId, CsvError> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v - 1),
        _ => Err(CsvError {
            line,
            message: format!("bad vertex {s:?}"),
        }),
    }
}

pub fn parse_labels_csv(text: &str) -> Result<Vec<(String, LabelRecord)>, CsvError> {
    csv_rows(text, LABEL_HEADER, 4)?
        .into_iter()
        .map(|(line, c)| {
            let err = |message: String| CsvError { line, message };
            let rule = c[2].parse::<RuleId>().map_err(|e| err(e.to_string()))?;
            let label = match c[3] {
                "0" => UNSUCCESSFUL,
                "1" => SUCCESSFUL,
                "2" if rule.uses_oracle() => TIMEOUT,
                other => return Err(err(format!("bad label {other:?} for {rule}"))),
            };
            let vertex = vertex_column(line, c[1])?;
            Ok((
                c[0].to_string(),
                LabelRecord {
                    vertex,
                    rule,
                    label,
                },
            ))
        })
        .collect()
}

pub fn parse_splits_csv(text: &str) -> Result<Vec<(String, VertexId, Split)>, CsvError> {
    csv_rows(text, SPLIT_HEADER, 3)?
        .into_iter()
        .map(|(line, c)| {
            let split = c[2].parse().map_err(|message| CsvError { line, message })?;
            Ok((c[0].to_string(), vertex_column(line, c[1])?, split))
        })
        .collect()
}
