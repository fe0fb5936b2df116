//! Rules built on nested neighborhoods: twins, almost twins and funnels.

use crate::exact::{for_each_independent_set, mask_to_set, max_weight_set, EnumerationError};
use crate::graph::{DynamicGraph, Status, VertexId, Weight};

use super::{
    applied, connect, include, is_clique, is_subset, remove, reweight, set_weight, Event,
    FunnelCase, ReductionLog, RuleContext, RuleOutcome, SkipReason, TwinCase,
};

use RuleOutcome::NotApplicable;

fn find_twin(g: &DynamicGraph, v: VertexId) -> Option<VertexId> {
    let nv = g.neighbors(v);
    let x0 = *nv.iter().min_by_key(|&&x| (g.degree(x), x))?;
    g.neighbors(x0)
        .iter()
        .copied()
        .find(|&u| u != v && g.neighbors(u) == nv)
}

/// Twins u, v (non-adjacent, N(u) = N(v)): include both, fold them with
/// their neighborhood, or fold the pair into one vertex.
pub fn twin(
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &mut RuleContext,
    v: VertexId,
) -> RuleOutcome {
    let Some(u) = find_twin(g, v) else {
        return NotApplicable;
    };
    let nbhd = g.neighbors(v).to_vec();
    let pair = g.weight(u) + g.weight(v);
    let (sub, map) = g.induced_subgraph(&nbhd).expect("active neighborhood");
    let best = max_weight_set(&sub, &ctx.oracle_budget());
    if !best.is_optimal() {
        return RuleOutcome::Skipped(SkipReason::Budget);
    }
    if pair >= best.weight {
        include(g, log, u);
        include(g, log, v);
        return applied(vec![u, v]);
    }
    // is the optimum the only independent set heavier than the pair?
    let mut heavy: Option<u64> = None;
    let mut unique = true;
    let walk = for_each_independent_set(&sub, ctx.budgets.enumeration_limit, usize::MAX, |mask| {
        let w: Weight = mask_to_set(mask).iter().map(|&i| sub.weight(i)).sum();
        if w > pair {
            if heavy.is_some() {
                unique = false;
                return false;
            }
            heavy = Some(mask);
        }
        true
    });
    if let Err(EnumerationError::TooLarge(_) | EnumerationError::Overflow(_)) = walk {
        return RuleOutcome::Skipped(SkipReason::Enumeration);
    }
    let wu = g.weight(u);
    let wv = g.weight(v);
    if unique {
        let set: Vec<VertexId> = mask_to_set(heavy.expect("optimum is heavier"))
            .into_iter()
            .map(|i| map[i])
            .collect();
        let mut outer: Vec<VertexId> = set
            .iter()
            .flat_map(|&x| g.neighbors(x).iter().copied())
            .filter(|&w| w != u && w != v && nbhd.binary_search(&w).is_err())
            .collect();
        outer.sort_unstable();
        outer.dedup();
        for &x in &nbhd {
            remove(g, x, Status::Folded);
        }
        remove(g, u, Status::Folded);
        remove(g, v, Status::Folded);
        let product = g
            .add_vertex(best.weight - pair, &outer)
            .expect("heavy set outweighs the pair");
        log.push(Event::FoldTwin {
            u,
            v,
            product,
            neighborhood: nbhd,
            offset: wu + wv,
            case: TwinCase::Neighborhood { set },
        });
    } else {
        remove(g, u, Status::Folded);
        remove(g, v, Status::Folded);
        let product = g.add_vertex(pair, &nbhd).expect("positive weight");
        log.push(Event::FoldTwin {
            u,
            v,
            product,
            neighborhood: nbhd,
            offset: 0,
            case: TwinCase::Pair,
        });
    }
    applied(vec![u, v])
}

/// Non-adjacent u, v with ∅ ≠ N(u) ⊆ N(v) and ω(u) + ω(v) ≥ ω(N(v)): include
/// u. The anchor may be either vertex of the pair.
pub fn almost_twin(
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &mut RuleContext,
    a: VertexId,
) -> RuleOutcome {
    let mut pairs: Vec<(VertexId, VertexId)> = Vec::new();
    if let Some(&x0) = g.neighbors(a).iter().min_by_key(|&&x| (g.degree(x), x)) {
        for &b in g.neighbors(x0) {
            if b != a && !g.has_edge(a, b) && is_subset(g.neighbors(a), g.neighbors(b)) {
                pairs.push((a, b));
            }
        }
    }
    let mut inner = std::collections::BTreeSet::new();
    for &x in g.neighbors(a) {
        inner.extend(g.neighbors(x).iter().copied());
    }
    for u in inner {
        if u != a && !g.has_edge(a, u) && is_subset(g.neighbors(u), g.neighbors(a)) {
            pairs.push((u, a));
        }
    }
    let mut skipped = false;
    for (u, v) in pairs {
        let pair = g.weight(u) + g.weight(v);
        let mut fires = pair >= g.neighborhood_weight(v);
        if !fires && ctx.flags.almost_twin_alpha {
            let (sub, _) = g.induced_subgraph(g.neighbors(v)).expect("active");
            let r = max_weight_set(&sub, &ctx.oracle_budget());
            if r.is_optimal() {
                fires = pair >= r.weight;
            } else {
                skipped = true;
            }
        }
        if fires {
            include(g, log, u);
            return applied(vec![u]);
        }
    }
    if skipped {
        RuleOutcome::Skipped(SkipReason::Budget)
    } else {
        NotApplicable
    }
}

/// u-v funnel: N(v) ∖ {u} is a clique and ω(v) is at least every weight in
/// it. Exactly one of u, v is in some optimum, which lets v fold into its
/// neighborhood.
pub fn weighted_funnel(g: &mut DynamicGraph, log: &mut ReductionLog, v: VertexId) -> RuleOutcome {
    let nv = g.neighbors(v).to_vec();
    if nv.len() < 2 {
        return NotApplicable;
    }
    let wv = g.weight(v);
    let heavier: Vec<VertexId> = nv.iter().copied().filter(|&x| g.weight(x) > wv).collect();
    let candidates: Vec<VertexId> = match heavier.len() {
        0 => {
            // u must cover every missing edge inside N(v)
            let missing = nv.iter().enumerate().find_map(|(i, &a)| {
                nv[i + 1..]
                    .iter()
                    .find(|&&b| !g.has_edge(a, b))
                    .map(|&b| (a, b))
            });
            match missing {
                Some((a, b)) => vec![a, b],
                None => nv.clone(),
            }
        }
        1 => heavier,
        _ => return NotApplicable,
    };
    let Some(u) = candidates.into_iter().find(|&u| {
        let rest: Vec<VertexId> = nv.iter().copied().filter(|&x| x != u).collect();
        is_clique(g, &rest)
    }) else {
        return NotApplicable;
    };
    let wu = g.weight(u);
    let kept: Vec<VertexId> = nv
        .iter()
        .copied()
        .filter(|&x| x != u && !g.has_edge(u, x) && g.weight(x) + wu > wv)
        .collect();
    let outer: Vec<VertexId> = g
        .neighbors(u)
        .iter()
        .copied()
        .filter(|&w| w != v && nv.binary_search(&w).is_err())
        .collect();
    let mut added = Vec::new();
    for &x in &kept {
        for &w in &outer {
            if !g.has_edge(x, w) {
                connect(g, x, w);
                added.push((x, w));
            }
        }
    }
    for &x in &nv {
        if x != u && kept.binary_search(&x).is_err() {
            remove(g, x, Status::Excluded);
        }
    }
    remove(g, v, Status::Folded);
    let case = if wv >= wu {
        for &x in &kept {
            reweight(g, x, g.weight(x) + wu - wv);
        }
        remove(g, u, Status::Folded);
        FunnelCase::Removed
    } else {
        reweight(g, u, wu - wv);
        FunnelCase::Kept
    };
    debug_assert!(set_weight(g, &kept) > 0 || kept.is_empty());
    log.push(Event::FoldFunnel {
        v,
        u,
        kept,
        added,
        weight: wv,
        case,
    });
    applied(vec![v])
}
