//! Reduce, solve the kernel, lift the solution back and check it.

use std::time::{Duration, Instant};

use crate::chils::{run_chils, ChilsConfig, ChilsError};
use crate::exact::{solve_exact, Budget};
use crate::graph::{DynamicGraph, StaticGraph, VertexId, Weight};
use crate::local_search::{greedy_solution, run_baseline, LsLimit, DEFAULT_MQ};
use crate::reductions::{restore_solution, RestoreError};
use crate::scheduler::{run_reduce, ModelSet, ReduceConfig, ReduceError, ReduceStats};

#[derive(Debug, Clone)]
pub enum KernelSolver {
    Exact(Budget),
    Baseline {
        limit: LsLimit,
        mq: usize,
        seed: u64,
    },
    Chils(ChilsConfig),
}

impl Default for KernelSolver {
    fn default() -> Self {
        KernelSolver::Baseline {
            limit: LsLimit::iterations(100_000),
            mq: DEFAULT_MQ,
            seed: crate::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub reduce: ReduceConfig,
    pub solver: KernelSolver,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    /// Sorted ids of the input graph.
    pub solution: Vec<VertexId>,
    pub weight: Weight,
    pub kernel_weight: Weight,
    pub offset: Weight,
    pub kernel_vertices: usize,
    pub kernel_edges: usize,
    /// Whether the kernel was solved to optimality.
    pub optimal: bool,
    pub stats: ReduceStats,
    pub solve_time: Duration,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Chils(#[from] ChilsError),
    #[error("restoring the kernel solution failed: {0}")]
    Restore(#[from] RestoreError),
    #[error("verification failed: {0}")]
    Verification(String),
}

/// Checks that `set` is an independent set of `g` with the given weight.
pub fn verify_solution(g: &StaticGraph, set: &[VertexId], weight: Weight) -> Result<(), String> {
    if let Some(&v) = set.iter().find(|&&v| v >= g.n()) {
        return Err(format!("vertex {} out of range", v + 1));
    }
    let mut member = vec![false; g.n()];
    for &v in set {
        if member[v] {
            return Err(format!("vertex {} listed twice", v + 1));
        }
        member[v] = true;
    }
    for (u, v) in g.edges() {
        if member[u] && member[v] {
            return Err(format!("edge {} {} inside the set", u + 1, v + 1));
        }
    }
    let actual = g.set_weight(set);
    if actual != weight {
        return Err(format!("weight {actual} instead of {weight}"));
    }
    Ok(())
}

/// Adds every vertex without a neighbor in `set`, in id order.
fn make_maximal(g: &StaticGraph, set: &mut Vec<VertexId>) {
    let mut blocked = vec![false; g.n()];
    for &v in set.iter() {
        blocked[v] = true;
        for &u in g.neighbors(v) {
            blocked[u] = true;
        }
    }
    for v in 0..g.n() {
        if !blocked[v] {
            set.push(v);
            for &u in g.neighbors(v) {
                blocked[u] = true;
            }
        }
    }
    set.sort_unstable();
}

pub fn solve_kernel(
    k: &StaticGraph,
    solver: &KernelSolver,
) -> Result<(Vec<VertexId>, bool), ChilsError> {
    if k.n() == 0 {
        return Ok((Vec::new(), true));
    }
    Ok(match solver {
        KernelSolver::Exact(budget) => {
            let r = solve_exact(k, budget);
            let optimal = r.is_optimal();
            (r.set, optimal)
        }
        KernelSolver::Baseline { limit, mq, seed } => {
            let start = greedy_solution(k, *seed);
            (run_baseline(k, start, *mq, limit, *seed).vertices(), false)
        }
        KernelSolver::Chils(cfg) => (run_chils(k, cfg, None)?.solution.vertices(), false),
    })
}

pub fn pipeline_solve(
    g: &StaticGraph,
    cfg: &PipelineConfig,
    models: &ModelSet,
) -> Result<PipelineResult, PipelineError> {
    let reduced = run_reduce(DynamicGraph::from_static(g), &cfg.reduce, models)?;
    let (kernel, map) = reduced.graph.to_static();
    let start = Instant::now();
    let (mut ks, optimal) = solve_kernel(&kernel, &cfg.solver)?;
    let solve_time = start.elapsed();
    make_maximal(&kernel, &mut ks);
    let kernel_weight = kernel.set_weight(&ks);
    let in_dynamic: Vec<VertexId> = ks.iter().map(|&v| map[v]).collect();
    let solution = restore_solution(&reduced.graph, &reduced.log, &in_dynamic)?;
    let offset = reduced.log.offset();
    verify_solution(g, &solution, kernel_weight + offset).map_err(PipelineError::Verification)?;
    Ok(PipelineResult {
        weight: kernel_weight + offset,
        solution,
        kernel_weight,
        offset,
        kernel_vertices: kernel.n(),
        kernel_edges: kernel.m(),
        optimal,
        stats: reduced.stats,
        solve_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::testutil::{brute, graph};

    #[test]
    fn verification_catches_bad_sets() {
        let g = graph(&[1, 2, 3], &[(0, 1)]);
        assert!(verify_solution(&g, &[0, 2], 4).is_ok());
        assert!(verify_solution(&g, &[0, 1], 3).is_err());
        assert!(verify_solution(&g, &[0, 2], 5).is_err());
        assert!(verify_solution(&g, &[2, 2], 6).is_err());
        assert!(verify_solution(&g, &[3], 0).is_err());
    }

    #[test]
    fn maximal_extension() {
        let g = graph(&[1, 1, 1, 1], &[(0, 1), (2, 3)]);
        let mut s = vec![1];
        make_maximal(&g, &mut s);
        assert_eq!(s, vec![1, 2]);
    }

    #[test]
    fn fully_reducible_path() {
        let g = graph(&[1, 2, 3, 4, 5], &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let r = pipeline_solve(&g, &PipelineConfig::default(), &ModelSet::new()).unwrap();
        assert_eq!(r.kernel_vertices, 0);
        assert_eq!(r.weight, brute(&g));
    }
}
