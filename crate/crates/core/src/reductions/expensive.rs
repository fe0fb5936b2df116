//! Rules that solve or enumerate subproblems: extended unconfined,
//! generalized neighborhood folding (inclusion case) and heavy sets.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::exact::{for_each_independent_set, max_weight_set, EnumerationError};
use crate::graph::{DynamicGraph, VertexId, Weight};

use super::{
    applied, exclude, include, set_weight, ReductionLog, RuleContext, RuleOutcome, SkipReason,
};

use RuleOutcome::NotApplicable;

fn is_independent(g: &DynamicGraph, vs: &[VertexId]) -> bool {
    vs.iter()
        .enumerate()
        .all(|(i, &a)| vs[i + 1..].iter().all(|&b| !g.has_edge(a, b)))
}

/// α of G[vs], or `None` when the budget runs out.
fn alpha(g: &DynamicGraph, ctx: &RuleContext, vs: &[VertexId]) -> Option<Weight> {
    if is_independent(g, vs) {
        return Some(set_weight(g, vs));
    }
    let (sub, _) = g.induced_subgraph(vs).expect("active vertices");
    let r = max_weight_set(&sub, &ctx.oracle_budget());
    r.is_optimal().then_some(r.weight)
}

/// Excludes `v` if assuming it lies in every optimum leads to a
/// contradiction. The set S = {v} grows by satellites of extending children
/// until some child x satisfies ω(x) ≥ ω(S ∩ N(x)) + α(G[N(x) ∖ N[S]]).
pub fn extended_unconfined(
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &mut RuleContext,
    v: VertexId,
) -> RuleOutcome {
    let start = Instant::now();
    let mut s: BTreeSet<VertexId> = BTreeSet::from([v]);
    let mut skipped = false;
    loop {
        if start.elapsed() > ctx.budgets.vertex_time {
            return RuleOutcome::Skipped(SkipReason::Budget);
        }
        let mut closed: BTreeSet<VertexId> = s.clone();
        for &x in &s {
            closed.extend(g.neighbors(x).iter().copied());
        }
        let children: Vec<(VertexId, Weight, Vec<VertexId>)> = closed
            .iter()
            .copied()
            .filter(|x| !s.contains(x))
            .filter_map(|x| {
                let in_s: Weight = g
                    .neighbors(x)
                    .iter()
                    .filter(|y| s.contains(y))
                    .map(|&y| g.weight(y))
                    .sum();
                if g.weight(x) < in_s {
                    return None;
                }
                let rest: Vec<VertexId> = g
                    .neighbors(x)
                    .iter()
                    .copied()
                    .filter(|y| !closed.contains(y))
                    .collect();
                Some((x, in_s, rest))
            })
            .collect();

        for (x, in_s, rest) in &children {
            let wx = g.weight(*x);
            let upper = set_weight(g, rest);
            let fires = if wx >= in_s + upper {
                true
            } else if rest.iter().all(|&y| wx < in_s + g.weight(y)) {
                false
            } else {
                match alpha(g, ctx, rest) {
                    Some(a) => wx >= in_s + a,
                    None => {
                        skipped = true;
                        false
                    }
                }
            };
            if fires {
                exclude(g, log, v);
                return applied(vec![v]);
            }
        }

        let mut satellites = Vec::new();
        for (x, in_s, rest) in &children {
            let wx = g.weight(*x);
            if rest.is_empty() {
                continue;
            }
            if is_independent(g, rest) {
                let total = set_weight(g, rest);
                satellites = rest
                    .iter()
                    .copied()
                    .filter(|&y| wx >= in_s + total - g.weight(y))
                    .collect();
            } else if ctx.flags.full_unconfined {
                for &y in rest {
                    let others: Vec<VertexId> = rest.iter().copied().filter(|&z| z != y).collect();
                    match alpha(g, ctx, &others) {
                        Some(a) if wx >= in_s + a => satellites.push(y),
                        Some(_) => {}
                        None => skipped = true,
                    }
                }
            }
            if !satellites.is_empty() {
                break;
            }
        }
        if satellites.is_empty() {
            return if skipped {
                RuleOutcome::Skipped(SkipReason::Budget)
            } else {
                NotApplicable
            };
        }
        if !is_independent(g, &satellites) {
            // two satellites that must both be in every optimum are adjacent
            exclude(g, log, v);
            return applied(vec![v]);
        }
        s.extend(satellites);
    }
}

/// Includes `v` if ω(v) ≥ α(G[N(v)]).
pub fn generalized_fold(
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &mut RuleContext,
    v: VertexId,
) -> RuleOutcome {
    let wv = g.weight(v);
    if wv < g.neighborhood_weight(v) {
        if g.neighbors(v).iter().any(|&u| g.weight(u) > wv) {
            return NotApplicable;
        }
        let (sub, _) = g.induced_subgraph(g.neighbors(v)).expect("active");
        let r = max_weight_set(&sub, &ctx.oracle_budget());
        if r.weight > wv {
            return NotApplicable;
        }
        if !r.is_optimal() {
            return RuleOutcome::Skipped(SkipReason::Budget);
        }
    }
    include(g, log, v);
    applied(vec![v])
}

/// Checks that every independent set C of G[N(set)] satisfies
/// ω(N(C) ∩ set) ≥ ω(C).
fn is_heavy(g: &DynamicGraph, ctx: &RuleContext, set: &[VertexId]) -> Result<bool, SkipReason> {
    let mut outer: Vec<VertexId> = set
        .iter()
        .flat_map(|&x| g.neighbors(x).iter().copied())
        .collect();
    outer.sort_unstable();
    outer.dedup();
    // per outer vertex: which members of `set` it touches
    let touch: Vec<u8> = outer
        .iter()
        .map(|&y| {
            set.iter()
                .enumerate()
                .filter(|&(_, &x)| g.has_edge(x, y))
                .fold(0u8, |m, (i, _)| m | 1 << i)
        })
        .collect();
    let member_weight = |bits: u8| -> Weight {
        set.iter()
            .enumerate()
            .filter(|&(i, _)| bits >> i & 1 == 1)
            .map(|(_, &x)| g.weight(x))
            .sum()
    };
    if outer
        .iter()
        .zip(&touch)
        .any(|(&y, &t)| member_weight(t) < g.weight(y))
    {
        return Ok(false);
    }
    let (sub, map) = g.induced_subgraph(&outer).expect("active");
    debug_assert_eq!(map, outer);
    let mut heavy = true;
    let walk = for_each_independent_set(
        &sub,
        ctx.budgets.enumeration_limit,
        ctx.budgets.oracle_nodes as usize,
        |mask| {
            let mut bits = 0u8;
            let mut w = 0;
            let mut rest = mask;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                bits |= touch[i];
                w += sub.weight(i);
            }
            heavy = member_weight(bits) >= w;
            heavy
        },
    );
    match walk {
        Ok(_) => Ok(heavy),
        Err(EnumerationError::TooLarge(_) | EnumerationError::Overflow(_)) => {
            Err(SkipReason::Enumeration)
        }
    }
}

/// Partners of the anchor: vertices sharing a neighbor with it but not
/// adjacent to it, grouped by the shared neighbor, heaviest first.
fn partner_groups(g: &DynamicGraph, a: VertexId) -> Vec<Vec<VertexId>> {
    g.neighbors(a)
        .iter()
        .map(|&x| {
            let mut p: Vec<VertexId> = g
                .neighbors(x)
                .iter()
                .copied()
                .filter(|&y| y != a && !g.has_edge(a, y))
                .collect();
            p.sort_by_key(|&y| (std::cmp::Reverse(g.weight(y)), y));
            p
        })
        .collect()
}

fn include_heavy(
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &RuleContext,
    candidates: Vec<Vec<VertexId>>,
) -> RuleOutcome {
    let mut skipped = None;
    for set in candidates {
        match is_heavy(g, ctx, &set) {
            Ok(true) => {
                for &x in &set {
                    include(g, log, x);
                }
                return applied(set);
            }
            Ok(false) => {}
            Err(reason) => skipped = Some(reason),
        }
    }
    match skipped {
        Some(reason) => RuleOutcome::Skipped(reason),
        None => NotApplicable,
    }
}

/// Heavy set of two: the anchor and a non-adjacent vertex sharing a
/// neighbor with it.
pub fn heavy_set(
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &mut RuleContext,
    a: VertexId,
) -> RuleOutcome {
    let mut seen = BTreeSet::new();
    let mut candidates = Vec::new();
    'outer: for group in partner_groups(g, a) {
        for p in group {
            if candidates.len() >= ctx.budgets.heavy_pairs {
                break 'outer;
            }
            if seen.insert(p) {
                let mut set = vec![a, p];
                set.sort_unstable();
                candidates.push(set);
            }
        }
    }
    include_heavy(g, log, ctx, candidates)
}

/// Heavy set of three: the anchor and two vertices that share a neighbor
/// with it, all pairwise non-adjacent.
pub fn heavy_set3(
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &mut RuleContext,
    a: VertexId,
) -> RuleOutcome {
    let mut seen = BTreeSet::new();
    let mut candidates = Vec::new();
    'outer: for group in partner_groups(g, a) {
        for (i, &p) in group.iter().enumerate() {
            for &q in &group[i + 1..] {
                if candidates.len() >= ctx.budgets.heavy_triples {
                    break 'outer;
                }
                if g.has_edge(p, q) {
                    continue;
                }
                let mut set = vec![a, p, q];
                set.sort_unstable();
                if seen.insert(set.clone()) {
                    candidates.push(set);
                }
            }
        }
    }
    include_heavy(g, log, ctx, candidates)
}
