//! Rules that look at the whole graph: critical weighted independent sets and
//! folding of small components hanging off a cut vertex.

use crate::exact::max_weight_set;
use crate::flow::{FlowNetwork, INFINITE};
use crate::graph::{DynamicGraph, StaticGraph, Status, VertexId, Weight};

use super::{applied, remove, reweight, Event, ReductionLog, RuleContext, RuleOutcome};

/// Maximum of ω(X) − ω(N(X)) over all vertex sets X, together with the
/// critical independent set X ∖ N(X) of a maximizer.
pub fn critical_set_value(g: &StaticGraph) -> (Weight, Vec<VertexId>) {
    let n = g.n();
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = FlowNetwork::new(2 * n + 2);
    for v in 0..n {
        net.add_arc(s, v, g.weight(v));
        net.add_arc(n + v, t, g.weight(v));
        for &u in g.neighbors(v) {
            net.add_arc(v, n + u, INFINITE);
        }
    }
    let flow = net.max_flow(s, t);
    let side = net.source_side(s);
    let in_x = &side[..n];
    let set: Vec<VertexId> = (0..n)
        .filter(|&v| in_x[v] && !g.neighbors(v).iter().any(|&u| in_x[u]))
        .collect();
    (g.total_weight() - flow, set)
}

/// Includes a critical independent set when its value is positive.
pub fn critical_set(g: &mut DynamicGraph, log: &mut ReductionLog) -> RuleOutcome {
    let (k, map) = g.to_static();
    let (value, set) = critical_set_value(&k);
    if value <= 0 || set.is_empty() {
        return RuleOutcome::NotApplicable;
    }
    let set: Vec<VertexId> = set.into_iter().map(|i| map[i]).collect();
    let weight = set.iter().map(|&v| g.weight(v)).sum();
    for &v in &set {
        for u in g.neighbors(v).to_vec() {
            if g.is_active(u) {
                remove(g, u, Status::Excluded);
            }
        }
    }
    for &v in &set {
        remove(g, v, Status::Included);
    }
    log.push(Event::CriticalSetInclude {
        set: set.clone(),
        weight,
    });
    applied(set)
}

/// Articulation points of the kernel (in kernel ids) with, for each, the
/// vertex sets it separates from the rest of its component.
fn separated_parts(k: &StaticGraph) -> Vec<(VertexId, Vec<Vec<VertexId>>)> {
    let n = k.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut parent = vec![usize::MAX; n];
    // DFS-tree children whose subtree is cut off by their parent
    let mut cut_children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<VertexId>> = Vec::new();
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let c = comps.len();
        comps.push(Vec::new());
        let mut stack = vec![(root, 0usize)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        comp_of[root] = c;
        comps[c].push(root);
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < k.degree(v) {
                let u = k.neighbors(v)[*i];
                *i += 1;
                if disc[u] == usize::MAX {
                    parent[u] = v;
                    disc[u] = time;
                    low[u] = time;
                    time += 1;
                    comp_of[u] = c;
                    comps[c].push(u);
                    children[v].push(u);
                    stack.push((u, 0));
                } else if u != parent[v] {
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        cut_children[p].push(v);
                    }
                }
            }
        }
    }
    let subtree = |r: VertexId| -> Vec<VertexId> {
        let mut out = vec![r];
        let mut i = 0;
        while i < out.len() {
            out.extend(children[out[i]].iter().copied());
            i += 1;
        }
        out
    };
    let mut result = Vec::new();
    for v in 0..n {
        let is_root = parent[v] == usize::MAX;
        let cuts = &cut_children[v];
        if (is_root && cuts.len() < 2) || (!is_root && cuts.is_empty()) {
            continue;
        }
        let mut parts: Vec<Vec<VertexId>> = cuts.iter().map(|&c| subtree(c)).collect();
        if !is_root {
            let mut inside = vec![false; n];
            inside[v] = true;
            for p in &parts {
                for &x in p {
                    inside[x] = true;
                }
            }
            parts.push(
                comps[comp_of[v]]
                    .iter()
                    .copied()
                    .filter(|&x| !inside[x])
                    .collect(),
            );
        }
        result.push((v, parts));
    }
    result
}

/// For every cut vertex v with a separated part C of at most
/// `component_limit` vertices, solves C with and without N(v) and folds the
/// difference into ω(v).
pub fn cut_vertex(
    g: &mut DynamicGraph,
    log: &mut ReductionLog,
    ctx: &mut RuleContext,
) -> RuleOutcome {
    let (k, map) = g.to_static();
    let mut targets = Vec::new();
    for (kv, parts) in separated_parts(&k) {
        let Some(part) = parts
            .into_iter()
            .filter(|p| !p.is_empty() && p.len() <= ctx.budgets.component_limit)
            .min_by_key(|p| (p.len(), p.iter().map(|&i| map[i]).min()))
        else {
            continue;
        };
        let v = map[kv];
        let mut component: Vec<VertexId> = part.iter().map(|&i| map[i]).collect();
        component.sort_unstable();
        if !g.is_active(v) || component.iter().any(|&x| !g.is_active(x)) {
            continue;
        }
        let far: Vec<VertexId> = component
            .iter()
            .copied()
            .filter(|&x| !g.has_edge(v, x))
            .collect();
        let solve = |vs: &[VertexId]| {
            let (sub, sub_map) = g.induced_subgraph(vs).expect("active component");
            let r = max_weight_set(&sub, &ctx.oracle_budget());
            r.is_optimal().then(|| {
                (
                    r.weight,
                    r.set.iter().map(|&i| sub_map[i]).collect::<Vec<_>>(),
                )
            })
        };
        let (Some((a, without_v)), Some((b, with_v))) = (solve(&component), solve(&far)) else {
            continue;
        };
        for &x in &component {
            remove(g, x, Status::Folded);
        }
        let w = g.weight(v) - (a - b);
        let excluded = w <= 0;
        if excluded {
            remove(g, v, Status::Excluded);
        } else {
            reweight(g, v, w);
        }
        log.push(Event::CutVertexFold {
            v,
            component,
            with_v,
            without_v,
            offset: a,
            excluded,
        });
        targets.push(v);
    }
    if targets.is_empty() {
        RuleOutcome::NotApplicable
    } else {
        applied(targets)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    /// max over all X ⊆ V of ω(X) − ω(N(X)), by enumeration.
    fn brute_value(g: &StaticGraph) -> Weight {
        let n = g.n();
        (0u32..1 << n)
            .map(|mask| {
                let mut nx = 0u32;
                let mut wx = 0;
                for v in 0..n {
                    if mask >> v & 1 == 1 {
                        wx += g.weight(v);
                        for &u in g.neighbors(v) {
                            nx |= 1 << u;
                        }
                    }
                }
                let wn: Weight = (0..n)
                    .filter(|&u| nx >> u & 1 == 1)
                    .map(|u| g.weight(u))
                    .sum();
                wx - wn
            })
            .max()
            .unwrap()
    }

    fn run(
        g0: &StaticGraph,
        rule: impl FnOnce(&mut DynamicGraph, &mut ReductionLog, &mut RuleContext) -> RuleOutcome,
    ) -> (DynamicGraph, ReductionLog, RuleOutcome) {
        let mut g = DynamicGraph::from_static(g0);
        let mut log = ReductionLog::new();
        let mut ctx = RuleContext::default();
        let out = rule(&mut g, &mut log, &mut ctx);
        assert_exact(g0, &g, &log);
        (g, log, out)
    }

    #[test]
    fn critical_set_examples() {
        let g0 = graph(&[5, 3, 3], &[(0, 1), (0, 2)]);
        let (g, log, out) = run(&g0, |g, l, _| critical_set(g, l));
        assert_eq!(
            out,
            RuleOutcome::Applied {
                targets: vec![1, 2]
            }
        );
        assert_eq!(log.offset(), 6);
        assert_eq!(g.active_count(), 0);

        let g0 = graph(&[2, 2, 2], &[(0, 1), (1, 2), (0, 2)]);
        let (_, _, out) = run(&g0, |g, l, _| critical_set(g, l));
        assert_eq!(out, RuleOutcome::NotApplicable);

        let g0 = graph(&[4], &[]);
        let (_, log, _) = run(&g0, |g, l, _| critical_set(g, l));
        assert_eq!(log.offset(), 4);
    }

    #[test]
    fn cut_vertex_examples() {
        // a=0 (5) - c=1 (2) - b=2 (3)
        let g0 = graph(&[5, 2, 3], &[(0, 1), (1, 2)]);
        let (g, log, out) = run(&g0, cut_vertex);
        assert_eq!(out, RuleOutcome::Applied { targets: vec![1] });
        assert_eq!(log.offset(), 5);
        assert_eq!(g.status(1), Status::Excluded);

        // a=0 (1) - c=1 (5) - b=2 (3)
        let g0 = graph(&[1, 5, 3], &[(0, 1), (1, 2)]);
        let (g, log, _) = run(&g0, cut_vertex);
        assert_eq!(g.weight(1), 4);
        assert_eq!(log.offset(), 1);

        let g0 = graph(&[1, 1, 1, 1], &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let (_, _, out) = run(&g0, cut_vertex);
        assert_eq!(out, RuleOutcome::NotApplicable);
    }

    fn small_graph() -> impl Strategy<Value = StaticGraph> {
        (1usize..10).prop_flat_map(|n| {
            (
                proptest::collection::vec(1i64..20, n),
                proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
            )
                .prop_map(move |(w, bits)| {
                    let mut edges = Vec::new();
                    let mut i = 0;
                    for a in 0..n {
                        for b in a + 1..n {
                            if bits[i] {
                                edges.push((a, b));
                            }
                            i += 1;
                        }
                    }
                    graph(&w, &edges)
                })
        })
    }

    proptest! {
        #[test]
        fn critical_value_matches_enumeration(g0 in small_graph()) {
            let (value, set) = critical_set_value(&g0);
            prop_assert_eq!(value, brute_value(&g0));
            prop_assert!(g0.is_independent(&set));
        }

        #[test]
        fn global_rules_are_exact(g0 in small_graph()) {
            run(&g0, |g, l, _| critical_set(g, l));
            run(&g0, cut_vertex);
        }
    }
}
