//! CHILS: a portfolio of BASELINE searches that alternates between the full
//! graph and the difference core, the part where the solutions disagree.

use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::{StaticGraph, VertexId, Weight};
use crate::local_search::{rng_for, LocalSearch, LsLimit, Solution, DEFAULT_MQ};

pub const DEFAULT_P: usize = 16;
pub const DEFAULT_PHASE_TIME: Duration = Duration::from_secs(10);
pub const DEFAULT_PERTURB_THRESHOLD: usize = 500;
pub const DEFAULT_LS_ITERS: u64 = 1000;
pub const DEFAULT_CHILS_ITERS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deterministic {
    pub ls_iters: u64,
    pub chils_iters: u64,
}

impl Default for Deterministic {
    fn default() -> Self {
        Deterministic {
            ls_iters: DEFAULT_LS_ITERS,
            chils_iters: DEFAULT_CHILS_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChilsConfig {
    pub p: usize,
    /// Base queue size; member i uses `mq + 4 i`.
    pub mq: usize,
    pub t_g: Duration,
    pub t_c: Duration,
    /// Overall wall-time budget, ignored in deterministic mode.
    pub time: Duration,
    pub perturb_threshold: usize,
    pub deterministic: Option<Deterministic>,
    pub seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

impl Default for ChilsConfig {
    fn default() -> Self {
        ChilsConfig {
            p: DEFAULT_P,
            mq: DEFAULT_MQ,
            t_g: DEFAULT_PHASE_TIME,
            t_c: DEFAULT_PHASE_TIME,
            time: Duration::from_secs(60),
            perturb_threshold: DEFAULT_PERTURB_THRESHOLD,
            deterministic: None,
            seed: crate::DEFAULT_SEED,
            threads: 0,
        }
    }
}

impl ChilsConfig {
    pub fn member_mq(&self, id: usize) -> usize {
        self.mq + 4 * id
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChilsError {
    #[error("the portfolio needs at least two solutions, got {0}")]
    TooFewSolutions(usize),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Vertices on which the portfolio disagrees, with the agreed part folded
/// into an offset.
#[derive(Debug, Clone)]
pub struct DCore {
    pub graph: StaticGraph,
    /// Core id to graph id.
    pub map: Vec<VertexId>,
    /// Vertices in every solution.
    pub intersection: Vec<VertexId>,
    pub offset: Weight,
}

impl DCore {
    /// The core set in graph ids joined with the intersection.
    pub fn lift(&self, core_set: &[VertexId]) -> Vec<VertexId> {
        let mut out = self.intersection.clone();
        out.extend(core_set.iter().map(|&c| self.map[c]));
        out.sort_unstable();
        out
    }
}

pub fn build_dcore(g: &StaticGraph, solutions: &[Solution]) -> DCore {
    let p = solutions.len();
    let mut core = Vec::new();
    let mut intersection = Vec::new();
    for v in 0..g.n() {
        match solutions.iter().filter(|s| s.contains(v)).count() {
            0 => {}
            c if c == p => intersection.push(v),
            _ => core.push(v),
        }
    }
    let (graph, map) = g.induced_subgraph(&core);
    DCore {
        offset: g.set_weight(&intersection),
        graph,
        map,
        intersection,
    }
}

/// A core solution taken into the portfolio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Acceptance {
    pub iteration: u64,
    pub id: usize,
    pub core_weight: Weight,
    pub offset: Weight,
    pub lifted_weight: Weight,
    pub independent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: u64,
    pub best_weight: Weight,
    pub best_id: usize,
    pub core_size: usize,
    pub perturbed: bool,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct ChilsResult {
    pub solution: Solution,
    pub best_id: usize,
    pub iterations: Vec<IterationRecord>,
    pub acceptances: Vec<Acceptance>,
    pub time_to_best: Duration,
}

struct Member {
    id: usize,
    sol: Solution,
    rng: Option<ChaCha8Rng>,
    mq: usize,
}

impl Member {
    fn search(&mut self, g: &StaticGraph, limit: &LsLimit) {
        let mut ls = LocalSearch::new(g, self.sol.clone(), self.mq, self.rng.take().unwrap());
        ls.run(limit);
        let (sol, rng) = ls.into_parts();
        self.sol = sol;
        self.rng = Some(rng);
    }

    fn search_core(&mut self, core: &StaticGraph, limit: &LsLimit) -> Solution {
        let mut ls = LocalSearch::with_greedy_start(core, self.mq, self.rng.take().unwrap());
        ls.run(limit);
        let (sol, rng) = ls.into_parts();
        self.rng = Some(rng);
        sol
    }

    fn perturb(&mut self, g: &StaticGraph) {
        let mut ls = LocalSearch::new(g, self.sol.clone(), self.mq, self.rng.take().unwrap());
        ls.perturb();
        let (sol, rng) = ls.into_parts();
        self.sol = sol;
        self.rng = Some(rng);
    }
}

/// Heaviest member, lowest id on ties.
fn best_of(members: &[Member]) -> usize {
    let mut best = 0;
    for m in members {
        if m.sol.weight() > members[best].sol.weight() {
            best = m.id;
        }
    }
    best
}

pub fn run_chils(
    g: &StaticGraph,
    cfg: &ChilsConfig,
    warm: Option<&Solution>,
) -> Result<ChilsResult, ChilsError> {
    if cfg.p < 2 {
        return Err(ChilsError::TooFewSolutions(cfg.p));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| ChilsError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| portfolio_loop(g, cfg, warm)))
}

fn portfolio_loop(g: &StaticGraph, cfg: &ChilsConfig, warm: Option<&Solution>) -> ChilsResult {
    let start = Instant::now();
    let mut members: Vec<Member> = (0..cfg.p)
        .into_par_iter()
        .map(|id| {
            let rng = rng_for(cfg.seed, id as u64);
            let mq = cfg.member_mq(id);
            let (sol, rng) = match warm {
                Some(s) => (s.clone(), rng),
                None => LocalSearch::with_greedy_start(g, mq, rng).into_parts(),
            };
            Member {
                id,
                sol,
                rng: Some(rng),
                mq,
            }
        })
        .collect();
    let mut best = best_of(&members);
    let mut best_weight = members[best].sol.weight();
    let mut time_to_best = start.elapsed();
    let mut iterations = Vec::new();
    let mut acceptances = Vec::new();
    let mut iteration = 0u64;
    loop {
        // wall-time limits shrink to what is left of the overall budget
        let limit = |phase: Duration| match cfg.deterministic {
            Some(d) => LsLimit::iterations(d.ls_iters),
            None => LsLimit::time(cfg.time.saturating_sub(start.elapsed()).min(phase)),
        };
        let done = match cfg.deterministic {
            Some(d) => iteration >= d.chils_iters,
            None => start.elapsed() >= cfg.time,
        };
        if done {
            break;
        }
        let full_limit = limit(cfg.t_g);
        members
            .par_iter_mut()
            .for_each(|m| m.search(g, &full_limit));
        best = best_of(&members);

        let sols: Vec<Solution> = members.iter().map(|m| m.sol.clone()).collect();
        let core = build_dcore(g, &sols);
        let core_limit = limit(cfg.t_c);
        let found: Vec<Solution> = members
            .par_iter_mut()
            .map(|m| m.search_core(&core.graph, &core_limit))
            .collect();
        for (m, cs) in members.iter_mut().zip(found) {
            let lifted_weight = cs.weight() + core.offset;
            let odd_other = m.id % 2 == 1 && m.id != best;
            if lifted_weight >= m.sol.weight() || odd_other {
                let set = core.lift(&cs.vertices());
                let independent = g.is_independent(&set);
                acceptances.push(Acceptance {
                    iteration,
                    id: m.id,
                    core_weight: cs.weight(),
                    offset: core.offset,
                    lifted_weight: g.set_weight(&set),
                    independent,
                });
                m.sol = Solution::from_set(g, &set).expect("lifted core solution is independent");
            }
        }
        best = best_of(&members);

        let perturbed = core.graph.n() < cfg.perturb_threshold;
        if perturbed {
            members
                .par_iter_mut()
                .filter(|m| m.id % 2 == 1 && m.id != best)
                .for_each(|m| m.perturb(g));
            best = best_of(&members);
        }
        if members[best].sol.weight() > best_weight {
            best_weight = members[best].sol.weight();
            time_to_best = start.elapsed();
        }
        iterations.push(IterationRecord {
            iteration,
            best_weight,
            best_id: best,
            core_size: core.graph.n(),
            perturbed,
            elapsed: start.elapsed(),
        });
        iteration += 1;
    }
    ChilsResult {
        solution: members[best].sol.clone(),
        best_id: best,
        iterations,
        acceptances,
        time_to_best,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::testutil::{brute, graph};
    use rand::{Rng, SeedableRng};

    fn sol(g: &StaticGraph, set: &[VertexId]) -> Solution {
        Solution::from_set(g, set).unwrap()
    }

    #[test]
    fn identical_solutions_give_empty_core() {
        let g = graph(&[1, 2, 3], &[(0, 1)]);
        let s = sol(&g, &[1, 2]);
        let core = build_dcore(&g, &[s.clone(), s.clone(), s]);
        assert_eq!(core.graph.n(), 0);
        assert_eq!(core.offset, 5);
        assert_eq!(core.lift(&[]), vec![1, 2]);
    }

    #[test]
    fn p4_core() {
        let g = graph(&[1, 2, 3, 4], &[(0, 1), (1, 2), (2, 3)]);
        let core = build_dcore(&g, &[sol(&g, &[0, 2]), sol(&g, &[0, 3]), sol(&g, &[0, 2])]);
        assert_eq!(core.map, vec![2, 3]);
        assert_eq!(core.graph.m(), 1);
        assert_eq!(core.offset, 1);
        assert_eq!(core.intersection, vec![0]);
    }

    #[test]
    fn config_defaults() {
        let c = ChilsConfig::default();
        assert_eq!((c.p, c.perturb_threshold), (16, 500));
        assert_eq!(
            (c.t_g, c.t_c),
            (Duration::from_secs(10), Duration::from_secs(10))
        );
        assert_eq!(c.member_mq(3), c.mq + 12);
        assert_eq!(
            Deterministic::default(),
            Deterministic {
                ls_iters: 1000,
                chils_iters: 10
            }
        );
    }

    fn det(p: usize, threads: usize, seed: u64) -> ChilsConfig {
        ChilsConfig {
            p,
            deterministic: Some(Deterministic {
                ls_iters: 200,
                chils_iters: 4,
            }),
            seed,
            threads,
            ..Default::default()
        }
    }

    fn random_graph(seed: u64, n: usize, p: f64) -> StaticGraph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let w = (0..n).map(|_| rng.gen_range(1..=20)).collect();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        StaticGraph::from_edges(w, &edges).unwrap()
    }

    #[test]
    fn small_graph_reaches_optimum() {
        let g = random_graph(5, 12, 0.3);
        let r = run_chils(&g, &det(2, 1, 1), None).unwrap();
        assert_eq!(r.solution.weight(), brute(&g));
        assert!(g.is_independent(&r.solution.vertices()));
    }

    #[test]
    fn warm_start_with_optimum_never_gets_worse() {
        let g = random_graph(6, 14, 0.25);
        let opt = crate::exact::solve_exact(&g, &crate::exact::Budget::unlimited());
        let warm = sol(&g, &opt.set);
        let r = run_chils(&g, &det(4, 1, 2), Some(&warm)).unwrap();
        assert_eq!(r.solution.weight(), opt.weight);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let g = random_graph(7, 80, 0.08);
        let a = run_chils(&g, &det(6, 1, 3), None).unwrap();
        let b = run_chils(&g, &det(6, 3, 3), None).unwrap();
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.acceptances, b.acceptances);
    }

    #[test]
    fn acceptances_are_sound_and_best_is_monotone() {
        let g = random_graph(8, 120, 0.05);
        let r = run_chils(&g, &det(4, 1, 4), None).unwrap();
        assert!(!r.acceptances.is_empty());
        for a in &r.acceptances {
            assert!(a.independent);
            assert_eq!(a.lifted_weight, a.core_weight + a.offset);
        }
        let bests: Vec<_> = r.iterations.iter().map(|i| i.best_weight).collect();
        assert!(bests.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn portfolio_of_one_is_rejected() {
        let g = graph(&[1], &[]);
        let cfg = ChilsConfig {
            p: 1,
            ..Default::default()
        };
        assert_eq!(
            run_chils(&g, &cfg, None).unwrap_err(),
            ChilsError::TooFewSolutions(1)
        );
    }
}
