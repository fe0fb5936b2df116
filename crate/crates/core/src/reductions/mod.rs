//! Exact data reduction rules.
//!
//! Every rule inspects a [`DynamicGraph`] at an anchor vertex (or globally),
//! and on success rewrites the graph and appends [`Event`]s to a
//! [`ReductionLog`]. A rule that does not apply leaves the graph untouched.
//! The log alone is enough to lift a solution of the reduced graph back to
//! the input graph.

mod expensive;
mod global;
mod local;
mod twins;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::exact::Budget;
use crate::graph::{DynamicGraph, Status, VertexId, Weight};

pub use expensive::{extended_unconfined, generalized_fold, heavy_set, heavy_set3};
pub use global::{critical_set, critical_set_value, cut_vertex};
pub use local::{
    basic_single_edge, clique_neighborhood_removal, degree_one, degree_two, domination,
    extended_domination, extended_domination_reverse, extended_single_edge, neighborhood_removal,
    simplicial, simplicial_include, simplicial_transfer, single_edge, triangle, v_shape,
};
pub use twins::{almost_twin, twin, weighted_funnel};

/// Reduction rules in scheduling order: cheap rules first, then the
/// expensive ones that the screening models guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    NeighborhoodRemoval,
    DegreeOne,
    Triangle,
    VShape,
    Simplicial,
    SimplicialTransfer,
    Domination,
    BasicSingleEdge,
    ExtendedSingleEdge,
    Twin,
    AlmostTwin,
    WeightedFunnel,
    CliqueNeighborhoodRemoval,
    ExtendedDomination,
    ExtendedDominationReverse,
    ExtendedUnconfined,
    CriticalSet,
    GeneralizedFold,
    HeavySet,
    HeavySet3,
    CutVertex,
}

impl RuleId {
    pub const ALL: [RuleId; 21] = [
        RuleId::NeighborhoodRemoval,
        RuleId::DegreeOne,
        RuleId::Triangle,
        RuleId::VShape,
        RuleId::Simplicial,
        RuleId::SimplicialTransfer,
        RuleId::Domination,
        RuleId::BasicSingleEdge,
        RuleId::ExtendedSingleEdge,
        RuleId::Twin,
        RuleId::AlmostTwin,
        RuleId::WeightedFunnel,
        RuleId::CliqueNeighborhoodRemoval,
        RuleId::ExtendedDomination,
        RuleId::ExtendedDominationReverse,
        RuleId::ExtendedUnconfined,
        RuleId::CriticalSet,
        RuleId::GeneralizedFold,
        RuleId::HeavySet,
        RuleId::HeavySet3,
        RuleId::CutVertex,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::NeighborhoodRemoval => "neighborhood-removal",
            RuleId::DegreeOne => "degree-one",
            RuleId::Triangle => "triangle",
            RuleId::VShape => "v-shape",
            RuleId::Simplicial => "simplicial",
            RuleId::SimplicialTransfer => "simplicial-transfer",
            RuleId::Domination => "domination",
            RuleId::BasicSingleEdge => "basic-single-edge",
            RuleId::ExtendedSingleEdge => "extended-single-edge",
            RuleId::Twin => "twin",
            RuleId::AlmostTwin => "almost-twin",
            RuleId::WeightedFunnel => "funnel",
            RuleId::CliqueNeighborhoodRemoval => "clique-neighborhood-removal",
            RuleId::ExtendedDomination => "extended-domination",
            RuleId::ExtendedDominationReverse => "extended-domination-reverse",
            RuleId::ExtendedUnconfined => "unconfined",
            RuleId::CriticalSet => "critical-set",
            RuleId::GeneralizedFold => "generalized-fold",
            RuleId::HeavySet => "heavy-set",
            RuleId::HeavySet3 => "heavy-set-3",
            RuleId::CutVertex => "cut-vertex",
        }
    }

    /// Rules guarded by screening models and disabled without them.
    pub fn is_expensive(self) -> bool {
        self >= RuleId::ExtendedUnconfined
    }

    /// Rules applied to the whole graph at once instead of at an anchor.
    pub fn is_global(self) -> bool {
        matches!(self, RuleId::CriticalSet | RuleId::CutVertex)
    }

    /// Rules that solve subproblems under a budget and can therefore time out.
    pub fn uses_oracle(self) -> bool {
        matches!(
            self,
            RuleId::Twin
                | RuleId::AlmostTwin
                | RuleId::ExtendedUnconfined
                | RuleId::GeneralizedFold
                | RuleId::HeavySet
                | RuleId::HeavySet3
                | RuleId::CutVertex
        )
    }

    pub fn expensive() -> impl Iterator<Item = RuleId> {
        Self::ALL.into_iter().filter(|r| r.is_expensive())
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

impl FromStr for RuleId {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VShapeCase {
    /// `x`, `y` and `v` merged into `product`.
    Fold { product: VertexId },
    /// `v` removed; `x` (the lighter neighbor) now stands for taking both.
    Mid { added: Vec<(VertexId, VertexId)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwinCase {
    /// Product stands for `set`, the unique heavy independent set of N(v).
    Neighborhood { set: Vec<VertexId> },
    /// Product stands for the twin pair.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunnelCase {
    /// u and v removed, kept neighbors re-weighted.
    Removed,
    /// u survives with reduced weight.
    Kept,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Include {
        v: VertexId,
        weight: Weight,
    },
    Exclude {
        v: VertexId,
    },
    EdgeRemove {
        u: VertexId,
        v: VertexId,
        delta: Weight,
    },
    EdgeAdd {
        u: VertexId,
        v: VertexId,
        delta: Weight,
    },
    FoldDegreeOne {
        v: VertexId,
        u: VertexId,
        weight: Weight,
    },
    FoldTriangle {
        v: VertexId,
        x: VertexId,
        y: VertexId,
        weight: Weight,
    },
    FoldVShape {
        v: VertexId,
        x: VertexId,
        y: VertexId,
        weight: Weight,
        case: VShapeCase,
    },
    WeightTransferSimplicial {
        v: VertexId,
        removed: Vec<VertexId>,
        survivors: Vec<VertexId>,
        weight: Weight,
    },
    FoldTwin {
        u: VertexId,
        v: VertexId,
        product: VertexId,
        neighborhood: Vec<VertexId>,
        offset: Weight,
        case: TwinCase,
    },
    FoldFunnel {
        v: VertexId,
        u: VertexId,
        kept: Vec<VertexId>,
        added: Vec<(VertexId, VertexId)>,
        weight: Weight,
        case: FunnelCase,
    },
    CutVertexFold {
        v: VertexId,
        component: Vec<VertexId>,
        /// best set of the component avoiding N(v)
        with_v: Vec<VertexId>,
        /// best set of the component
        without_v: Vec<VertexId>,
        offset: Weight,
        excluded: bool,
    },
    CriticalSetInclude {
        set: Vec<VertexId>,
        weight: Weight,
    },
}

impl Event {
    /// Contribution of this event to the log offset.
    pub fn offset(&self) -> Weight {
        match self {
            Event::Include { weight, .. } => *weight,
            Event::Exclude { .. } | Event::EdgeRemove { .. } | Event::EdgeAdd { .. } => 0,
            Event::FoldDegreeOne { weight, .. }
            | Event::FoldTriangle { weight, .. }
            | Event::FoldVShape { weight, .. }
            | Event::WeightTransferSimplicial { weight, .. }
            | Event::FoldFunnel { weight, .. }
            | Event::CriticalSetInclude { weight, .. } => *weight,
            Event::FoldTwin { offset, .. } | Event::CutVertexFold { offset, .. } => *offset,
        }
    }
}

/// One applied rule, as written to the trace file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub rule: RuleId,
    pub anchor: Option<VertexId>,
    pub offset_delta: Weight,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.anchor {
            Some(v) => write!(f, "{} {} {}", self.rule, v + 1, self.offset_delta),
            None => write!(f, "{} - {}", self.rule, self.offset_delta),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionLog {
    events: Vec<Event>,
    offset: Weight,
    trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestoreError {
    #[error("vertex {0} is not in the reduced graph")]
    NotInKernel(VertexId),
    #[error("vertices {0} and {1} of the reduced solution are adjacent")]
    NotIndependent(VertexId, VertexId),
}

impl ReductionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn offset(&self) -> Weight {
        self.offset
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(&mut self, event: Event) {
        self.offset += event.offset();
        self.events.push(event);
    }

    pub(crate) fn record(&mut self, entry: TraceEntry) {
        self.trace.push(entry);
    }

    /// Drops events and trace entries beyond the given lengths.
    pub fn truncate(&mut self, events: usize, trace: usize) {
        for e in self.events.drain(events..) {
            self.offset -= e.offset();
        }
        self.trace.truncate(trace);
    }

    /// Replays the log backwards over `reduced` (ids of the reduced graph,
    /// `slots` = number of ids ever allocated) and returns the lifted set
    /// restricted to the first `original_n` ids, sorted.
    ///
    /// For a maximal independent set of the reduced graph the result is an
    /// independent set of weight `ω(reduced) + offset`.
    pub fn lift(&self, slots: usize, original_n: usize, reduced: &[VertexId]) -> Vec<VertexId> {
        let mut s = vec![false; slots];
        for &v in reduced {
            s[v] = true;
        }
        for event in self.events.iter().rev() {
            match event {
                Event::Include { v, .. } => s[*v] = true,
                Event::Exclude { v } => s[*v] = false,
                Event::EdgeRemove { u, v, .. } => {
                    if s[*v] {
                        s[*u] = false;
                    }
                }
                Event::EdgeAdd { u, v, .. } => {
                    if s[*v] {
                        s[*u] = true;
                    }
                }
                Event::FoldDegreeOne { v, u, .. } => {
                    if !s[*u] {
                        s[*v] = true;
                    }
                }
                Event::FoldTriangle { v, x, y, .. } => {
                    if !s[*x] && !s[*y] {
                        s[*v] = true;
                    }
                }
                Event::FoldVShape { v, x, y, case, .. } => match case {
                    VShapeCase::Fold { product } => {
                        if s[*product] {
                            s[*product] = false;
                            s[*x] = true;
                            s[*y] = true;
                        } else {
                            s[*v] = true;
                        }
                    }
                    VShapeCase::Mid { .. } => {
                        if s[*x] {
                            s[*y] = true;
                        } else if !s[*y] {
                            s[*v] = true;
                        }
                    }
                },
                Event::WeightTransferSimplicial { v, survivors, .. } => {
                    if survivors.iter().all(|&u| !s[u]) {
                        s[*v] = true;
                    }
                }
                Event::FoldTwin {
                    u,
                    v,
                    product,
                    case,
                    ..
                } => {
                    let chosen = s[*product];
                    s[*product] = false;
                    match case {
                        TwinCase::Neighborhood { set } => {
                            if chosen {
                                for &x in set {
                                    s[x] = true;
                                }
                            } else {
                                s[*u] = true;
                                s[*v] = true;
                            }
                        }
                        TwinCase::Pair => {
                            if chosen {
                                s[*u] = true;
                                s[*v] = true;
                            }
                        }
                    }
                }
                Event::FoldFunnel {
                    v, u, kept, case, ..
                } => {
                    let hit = kept.iter().any(|&x| s[x]);
                    match case {
                        FunnelCase::Removed => {
                            if hit {
                                s[*u] = true;
                            } else {
                                s[*v] = true;
                            }
                        }
                        FunnelCase::Kept => {
                            if !hit && !s[*u] {
                                s[*v] = true;
                            }
                        }
                    }
                }
                Event::CutVertexFold {
                    v,
                    with_v,
                    without_v,
                    excluded,
                    ..
                } => {
                    let take = if !*excluded && s[*v] {
                        with_v
                    } else {
                        without_v
                    };
                    for &x in take {
                        s[x] = true;
                    }
                }
                Event::CriticalSetInclude { set, .. } => {
                    for &x in set {
                        s[x] = true;
                    }
                }
            }
        }
        (0..original_n).filter(|&v| s[v]).collect()
    }
}

/// Lifts an independent set of the current (reduced) graph to the original
/// graph. Fails if the set uses inactive vertices or is not independent.
pub fn restore_solution(
    g: &DynamicGraph,
    log: &ReductionLog,
    reduced: &[VertexId],
) -> Result<Vec<VertexId>, RestoreError> {
    let mut member = vec![false; g.slots()];
    for &v in reduced {
        if v >= g.slots() || !g.is_active(v) {
            return Err(RestoreError::NotInKernel(v));
        }
        member[v] = true;
    }
    for &v in reduced {
        if let Some(&u) = g.neighbors(v).iter().find(|&&u| member[u]) {
            return Err(RestoreError::NotIndependent(v.min(u), v.max(u)));
        }
    }
    Ok(log.lift(g.slots(), g.original_n(), reduced))
}

/// Limits on the work a single rule application may do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducerBudgets {
    /// Largest subgraph whose independent sets are enumerated.
    pub enumeration_limit: usize,
    /// Search nodes per exact subproblem.
    pub oracle_nodes: u64,
    /// Wall-clock cap per rule application at one vertex.
    pub vertex_time: Duration,
    /// Under screening, a global rule runs only if the model suggests more
    /// than this fraction of the active vertices.
    pub global_fraction: f64,
    /// Largest component split off by the cut vertex rule.
    pub component_limit: usize,
    pub heavy_pairs: usize,
    pub heavy_triples: usize,
}

impl Default for ReducerBudgets {
    fn default() -> Self {
        ReducerBudgets {
            enumeration_limit: crate::exact::DEFAULT_ENUMERATION_LIMIT,
            oracle_nodes: 1_000_000,
            vertex_time: Duration::from_millis(100),
            global_fraction: 0.01,
            component_limit: 64,
            heavy_pairs: 64,
            heavy_triples: 128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RuleFlags {
    /// Almost twin also accepts ω(u)+ω(v) ≥ α(G[N(v)]).
    pub almost_twin_alpha: bool,
    /// Extended unconfined solves non-independent neighborhoods exactly when
    /// looking for satellites.
    pub full_unconfined: bool,
}

/// Per-run state shared by rule applications.
#[derive(Debug, Clone, Default)]
pub struct RuleContext {
    pub budgets: ReducerBudgets,
    pub flags: RuleFlags,
    /// Vertex pairs whose edge was removed or added by the domination pair;
    /// neither rule touches them again, which rules out ping-pong.
    pinned: HashSet<(VertexId, VertexId)>,
}

impl RuleContext {
    pub fn new(budgets: ReducerBudgets, flags: RuleFlags) -> Self {
        RuleContext {
            budgets,
            flags,
            pinned: HashSet::new(),
        }
    }

    pub(crate) fn oracle_budget(&self) -> Budget {
        Budget {
            nodes: self.budgets.oracle_nodes.max(1),
            time: Some(self.budgets.vertex_time),
        }
    }

    pub(crate) fn is_pinned(&self, u: VertexId, v: VertexId) -> bool {
        self.pinned.contains(&(u.min(v), u.max(v)))
    }

    pub(crate) fn pin(&mut self, u: VertexId, v: VertexId) {
        self.pinned.insert((u.min(v), u.max(v)));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// Exact subproblem ran out of nodes or time.
    Budget,
    /// Subgraph too large to enumerate, or too many independent sets.
    Enumeration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleOutcome {
    /// The rule fired. `targets` are the vertices a training label marks.
    Applied {
        targets: Vec<VertexId>,
    },
    NotApplicable,
    Skipped(SkipReason),
}

impl RuleOutcome {
    pub fn is_applied(&self) -> bool {
        matches!(self, RuleOutcome::Applied { .. })
    }
}

pub(crate) fn applied(targets: Vec<VertexId>) -> RuleOutcome {
    RuleOutcome::Applied { targets }
}

/// Applies `rule` at `anchor` (ignored by global rules) and records a trace
/// entry when it fires. Inactive anchors are never applicable.
pub fn apply_rule(
    rule: RuleId,
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &mut RuleContext,
    anchor: VertexId,
) -> RuleOutcome {
    if !rule.is_global() && !g.is_active(anchor) {
        return RuleOutcome::NotApplicable;
    }
    let before = log.offset();
    let outcome = match rule {
        RuleId::NeighborhoodRemoval => neighborhood_removal(g, log, anchor),
        RuleId::DegreeOne => degree_one(g, log, anchor),
        RuleId::Triangle => triangle(g, log, anchor),
        RuleId::VShape => v_shape(g, log, anchor),
        RuleId::Simplicial => simplicial_include(g, log, anchor),
        RuleId::SimplicialTransfer => simplicial_transfer(g, log, anchor),
        RuleId::Domination => domination(g, log, anchor),
        RuleId::BasicSingleEdge => basic_single_edge(g, log, anchor),
        RuleId::ExtendedSingleEdge => extended_single_edge(g, log, anchor),
        RuleId::Twin => twin(g, log, ctx, anchor),
        RuleId::AlmostTwin => almost_twin(g, log, ctx, anchor),
        RuleId::WeightedFunnel => weighted_funnel(g, log, anchor),
        RuleId::CliqueNeighborhoodRemoval => clique_neighborhood_removal(g, log, anchor),
        RuleId::ExtendedDomination => extended_domination(g, log, ctx, anchor),
        RuleId::ExtendedDominationReverse => extended_domination_reverse(g, log, ctx, anchor),
        RuleId::ExtendedUnconfined => extended_unconfined(g, log, ctx, anchor),
        RuleId::CriticalSet => critical_set(g, log),
        RuleId::GeneralizedFold => generalized_fold(g, log, ctx, anchor),
        RuleId::HeavySet => heavy_set(g, log, ctx, anchor),
        RuleId::HeavySet3 => heavy_set3(g, log, ctx, anchor),
        RuleId::CutVertex => cut_vertex(g, log, ctx),
    };
    if outcome.is_applied() {
        log.record(TraceEntry {
            rule,
            anchor: (!rule.is_global()).then_some(anchor),
            offset_delta: log.offset() - before,
        });
    }
    outcome
}

// Mutation helpers. Rules only mutate after checking their preconditions, so
// a failing graph operation here is a bug in the rule.

pub(crate) fn remove(g: &mut DynamicGraph, v: VertexId, status: Status) {
    g.remove_vertex(v, status)
        .expect("rule removes an active vertex");
}

pub(crate) fn reweight(g: &mut DynamicGraph, v: VertexId, w: Weight) {
    g.set_weight(v, w).expect("rule keeps weights positive");
}

pub(crate) fn connect(g: &mut DynamicGraph, u: VertexId, v: VertexId) {
    g.add_edge(u, v).expect("rule adds a missing edge");
}

/// Includes `v`: excludes its neighbors and logs the inclusion.
pub(crate) fn include(g: &mut DynamicGraph, log: &mut ReductionLog, v: VertexId) {
    let weight = g.weight(v);
    let nbrs = g.neighbors(v).to_vec();
    for u in nbrs {
        remove(g, u, Status::Excluded);
    }
    remove(g, v, Status::Included);
    log.push(Event::Include { v, weight });
}

pub(crate) fn exclude(g: &mut DynamicGraph, log: &mut ReductionLog, v: VertexId) {
    remove(g, v, Status::Excluded);
    log.push(Event::Exclude { v });
}

/// Sorted-list subset test.
pub(crate) fn is_subset(a: &[VertexId], b: &[VertexId]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// N[u] ⊆ N[v] for adjacent u, v.
pub(crate) fn closed_subset(g: &DynamicGraph, u: VertexId, v: VertexId) -> bool {
    g.degree(u) <= g.degree(v) && g.neighbors(u).iter().all(|&w| w == v || g.has_edge(v, w))
}

pub(crate) fn is_clique(g: &DynamicGraph, vs: &[VertexId]) -> bool {
    let need = vs.len().saturating_sub(1);
    if vs.iter().any(|&x| g.degree(x) < need) {
        return false;
    }
    vs.iter()
        .enumerate()
        .all(|(i, &a)| vs[i + 1..].iter().all(|&b| g.has_edge(a, b)))
}

pub(crate) fn set_weight(g: &DynamicGraph, vs: &[VertexId]) -> Weight {
    vs.iter().map(|&v| g.weight(v)).sum()
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn rule_order_is_cheap_then_expensive() {
        let first_expensive = RuleId::ALL.iter().position(|r| r.is_expensive()).unwrap();
        assert!(RuleId::ALL[first_expensive..]
            .iter()
            .all(|r| r.is_expensive()));
        assert_eq!(RuleId::ALL[first_expensive], RuleId::ExtendedUnconfined);
        for (i, r) in RuleId::ALL.iter().enumerate() {
            assert_eq!(r.index(), i);
            assert_eq!(r.name().parse::<RuleId>().unwrap(), *r);
        }
    }

    #[test]
    fn empty_log_restores_identity() {
        let g0 = graph(&[1, 2, 3], &[(0, 1)]);
        let g = DynamicGraph::from_static(&g0);
        let log = ReductionLog::new();
        assert_eq!(restore_solution(&g, &log, &[1, 2]).unwrap(), vec![1, 2]);
        assert_eq!(
            restore_solution(&g, &log, &[0, 1]),
            Err(RestoreError::NotIndependent(0, 1))
        );
    }

    #[test]
    fn truncate_rewinds_offset() {
        let mut log = ReductionLog::new();
        log.push(Event::Include { v: 0, weight: 3 });
        log.push(Event::Include { v: 1, weight: 4 });
        log.truncate(1, 0);
        assert_eq!(log.offset(), 3);
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn trace_line_format() {
        let e = TraceEntry {
            rule: RuleId::DegreeOne,
            anchor: Some(0),
            offset_delta: 2,
        };
        assert_eq!(e.to_string(), "degree-one 1 2");
        let e = TraceEntry {
            rule: RuleId::CriticalSet,
            anchor: None,
            offset_delta: 6,
        };
        assert_eq!(e.to_string(), "critical-set - 6");
    }

    fn small_graph() -> impl proptest::strategy::Strategy<Value = crate::graph::StaticGraph> {
        use proptest::prelude::*;
        (1usize..11, 0.1f64..0.7).prop_flat_map(|(n, p)| {
            (
                proptest::collection::vec(1i64..12, n),
                proptest::collection::vec(proptest::bool::weighted(p), n * (n - 1) / 2),
            )
                .prop_map(move |(w, bits)| {
                    let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
                    let edges: Vec<_> = pairs
                        .zip(bits)
                        .filter(|&(_, b)| b)
                        .map(|(e, _)| e)
                        .collect();
                    graph(&w, &edges)
                })
        })
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(400))]
        #[test]
        fn every_rule_is_exact(g0 in small_graph(), order in 0usize..21) {
            // sweep all rules, starting at a rotating rule, until nothing applies
            let mut g = DynamicGraph::from_static(&g0);
            let mut log = ReductionLog::new();
            let mut ctx = RuleContext::default();
            for _ in 0..50 {
                let mut changed = false;
                for k in 0..RuleId::ALL.len() {
                    let rule = RuleId::ALL[(order + k) % RuleId::ALL.len()];
                    for v in 0..g.slots() {
                        if apply_rule(rule, &mut g, &mut log, &mut ctx, v).is_applied() {
                            eprintln!("{}", log.trace().last().unwrap());
                            assert_exact(&g0, &g, &log);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }
}
