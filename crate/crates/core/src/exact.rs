//! Exact maximum weight independent set on small graphs.
//!
//! Branch and bound over bitsets: branch on a vertex of maximum degree,
//! resolve degree-zero and dominated degree-one vertices greedily, and prune
//! with the bound "current weight + remaining weight". Used by the expensive
//! reduction rules for neighborhood subproblems.

use std::time::{Duration, Instant};

use crate::graph::{StaticGraph, VertexId, Weight};

/// Default size limit for exhaustive independent set enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of search nodes expanded. At least one.
    pub nodes: u64,
    pub time: Option<Duration>,
}

impl Budget {
    pub fn nodes(nodes: u64) -> Self {
        Budget {
            nodes: nodes.max(1),
            time: None,
        }
    }

    pub fn unlimited() -> Self {
        Budget {
            nodes: u64::MAX,
            time: None,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nodes: 1_000_000,
            time: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactStatus {
    Optimal,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub weight: Weight,
    /// Sorted vertex ids.
    pub set: Vec<VertexId>,
    pub status: ExactStatus,
}

impl ExactResult {
    pub fn is_optimal(&self) -> bool {
        self.status == ExactStatus::Optimal
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for v in 0..n {
            b.insert(v);
        }
        b
    }

    #[inline]
    fn insert(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    #[inline]
    fn remove(&mut self, v: usize) {
        self.0[v / 64] &= !(1 << (v % 64));
    }

    #[inline]
    fn contains(&self, v: usize) -> bool {
        self.0[v / 64] >> (v % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and_not(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn intersection_count(&self, other: &Bits) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn first_common(&self, other: &Bits) -> Option<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .find(|(_, (a, b))| *a & *b != 0)
            .map(|(i, (a, b))| i * 64 + (a & b).trailing_zeros() as usize)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + t)
                }
            })
        })
    }
}

struct Search<'a> {
    adj: Vec<Bits>,
    closed: Vec<Bits>,
    weights: &'a [Weight],
    best_weight: Weight,
    best_set: Option<Bits>,
    nodes: u64,
    budget: Budget,
    start: Instant,
    aborted: bool,
    /// stop at the first set reaching `best_weight + 1`
    first_hit: bool,
}

impl<'a> Search<'a> {
    fn new(g: &'a StaticGraph, budget: Budget) -> Self {
        let n = g.n();
        let mut adj = Vec::with_capacity(n);
        let mut closed = Vec::with_capacity(n);
        for v in 0..n {
            let mut b = Bits::empty(n);
            for &u in g.neighbors(v) {
                b.insert(u);
            }
            let mut c = b.clone();
            c.insert(v);
            adj.push(b);
            closed.push(c);
        }
        Search {
            adj,
            closed,
            weights: g.weights(),
            best_weight: -1,
            best_set: None,
            nodes: 0,
            budget,
            start: Instant::now(),
            aborted: false,
            first_hit: false,
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.budget.nodes {
            self.aborted = true;
        } else if let Some(limit) = self.budget.time {
            if self.nodes.is_multiple_of(256) && self.start.elapsed() > limit {
                self.aborted = true;
            }
        }
        self.aborted
    }

    fn done(&self) -> bool {
        self.aborted || (self.first_hit && self.best_set.is_some())
    }

    fn recurse(&mut self, mut cand: Bits, mut chosen: Bits, mut weight: Weight) {
        if self.done() || self.out_of_budget() {
            return;
        }
        // greedy: isolated vertices and degree-one vertices at least as heavy
        // as their neighbor are always safe to take
        loop {
            let mut changed = false;
            let members: Vec<usize> = cand.iter().collect();
            for v in members {
                if !cand.contains(v) {
                    continue;
                }
                match self.adj[v].intersection_count(&cand) {
                    0 => {
                        cand.remove(v);
                        chosen.insert(v);
                        weight += self.weights[v];
                        changed = true;
                    }
                    1 => {
                        let u = self.adj[v].first_common(&cand).expect("one neighbor");
                        if self.weights[v] >= self.weights[u] {
                            cand.remove(v);
                            cand.remove(u);
                            chosen.insert(v);
                            weight += self.weights[v];
                            changed = true;
                        }
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        let remaining: Weight = cand.iter().map(|v| self.weights[v]).sum();
        if weight + remaining <= self.best_weight {
            return;
        }
        if cand.is_empty() {
            self.best_weight = weight;
            self.best_set = Some(chosen);
            return;
        }
        let mut pick = usize::MAX;
        let mut pick_deg = 0;
        for v in cand.iter() {
            let d = self.adj[v].intersection_count(&cand);
            if pick == usize::MAX || d > pick_deg {
                pick = v;
                pick_deg = d;
            }
        }
        let mut with = cand.clone();
        with.and_not(&self.closed[pick]);
        let mut chosen_with = chosen.clone();
        chosen_with.insert(pick);
        self.recurse(with, chosen_with, weight + self.weights[pick]);
        let mut without = cand;
        without.remove(pick);
        self.recurse(without, chosen, weight);
    }
}

fn bits_to_set(b: &Bits) -> Vec<VertexId> {
    b.iter().collect()
}

/// Maximum weight independent set without canonical tie-breaking.
///
/// On budget exhaustion the best set found so far is returned (possibly empty)
/// as a lower bound.
pub fn max_weight_set(g: &StaticGraph, budget: &Budget) -> ExactResult {
    let n = g.n();
    let mut s = Search::new(g, *budget);
    s.recurse(Bits::full(n), Bits::empty(n), 0);
    let status = if s.aborted {
        ExactStatus::BudgetExceeded
    } else {
        ExactStatus::Optimal
    };
    match s.best_set {
        Some(b) => ExactResult {
            weight: s.best_weight,
            set: bits_to_set(&b),
            status,
        },
        None => ExactResult {
            weight: 0,
            set: Vec::new(),
            status,
        },
    }
}

/// Exact MWIS. Among optimal sets the lexicographically smallest sorted
/// vertex list is returned.
pub fn solve_exact(g: &StaticGraph, budget: &Budget) -> ExactResult {
    let first = max_weight_set(g, budget);
    if !first.is_optimal() || g.n() == 0 {
        return first;
    }
    let n = g.n();
    let target = first.weight;
    let mut search = Search::new(g, *budget);
    search.nodes = 0;
    let mut cand = Bits::full(n);
    let mut chosen = Vec::new();
    let mut weight = 0;
    for v in 0..n {
        if !cand.contains(v) {
            continue;
        }
        let mut rest = cand.clone();
        rest.and_not(&search.closed[v]);
        for u in 0..v {
            rest.remove(u);
        }
        search.best_weight = target - weight - g.weight(v) - 1;
        search.best_set = None;
        search.first_hit = true;
        search.recurse(rest, Bits::empty(n), 0);
        if search.aborted {
            // the weight is still optimal; only the tie-breaking is lost
            return first;
        }
        if search.best_set.is_some() {
            chosen.push(v);
            weight += g.weight(v);
            cand.and_not(&search.closed[v]);
        } else {
            cand.remove(v);
        }
    }
    debug_assert_eq!(weight, target);
    ExactResult {
        weight,
        set: chosen,
        status: ExactStatus::Optimal,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("graph with {0} vertices exceeds the enumeration limit")]
    TooLarge(usize),
    #[error("more than {0} independent sets")]
    Overflow(usize),
}

/// Visits every independent set of `g` (including the empty set) in
/// increasing bitmask order over the vertex ids. The visitor receives the set
/// as a bitmask and may stop early by returning `false`.
///
/// Fails with `TooLarge` when `g` has more than `limit` vertices, or
/// `Overflow` once more than `cap` sets would be emitted.
pub fn for_each_independent_set(
    g: &StaticGraph,
    limit: usize,
    cap: usize,
    mut visit: impl FnMut(u64) -> bool,
) -> Result<usize, EnumerationError> {
    let n = g.n();
    if n > limit.min(40) {
        return Err(EnumerationError::TooLarge(n));
    }
    let adj: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u))
        .collect();
    let mut count = 0usize;
    let mut mask: u64 = 0;
    let end: u64 = 1u64 << n;
    while mask < end {
        // lowest member of `mask` with a neighbor in `mask`; that neighbor is
        // higher, so both stay fixed while the bits below are counted through
        let mut bad = None;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if adj[v] & mask != 0 {
                bad = Some(v);
                break;
            }
        }
        match bad {
            None => {
                count += 1;
                if count > cap {
                    return Err(EnumerationError::Overflow(cap));
                }
                if !visit(mask) {
                    return Ok(count);
                }
                mask += 1;
            }
            Some(lo) => {
                mask = (mask | ((1u64 << lo) - 1)) + 1;
            }
        }
    }
    Ok(count)
}

/// Collects all independent sets as sorted vertex lists.
pub fn enumerate_independent_sets(
    g: &StaticGraph,
    limit: usize,
    cap: usize,
) -> Result<Vec<Vec<VertexId>>, EnumerationError> {
    let mut out = Vec::new();
    for_each_independent_set(g, limit, cap, |mask| {
        out.push(mask_to_set(mask));
        true
    })?;
    Ok(out)
}

pub fn mask_to_set(mask: u64) -> Vec<VertexId> {
    (0..64).filter(|&v| mask >> v & 1 == 1).collect()
}
