//! BASELINE iterated local search: random local perturbation, greedy repair
//! from a change queue, and backtracking when the weight drops.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{StaticGraph, VertexId, Weight};

pub const DEFAULT_MQ: usize = 32;

/// Extension steps allowed on one alternating augmenting path.
pub const AAP_MAX_STEPS: usize = 256;

/// Independent set with per-vertex tightness and solution-neighbor weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    member: Vec<bool>,
    weight: Weight,
    tight: Vec<u32>,
    nbr_weight: Vec<Weight>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolutionError {
    #[error("vertex {0} out of range")]
    OutOfRange(VertexId),
    #[error("vertices {0} and {1} are adjacent")]
    NotIndependent(VertexId, VertexId),
}

impl Solution {
    pub fn empty(g: &StaticGraph) -> Self {
        Solution {
            member: vec![false; g.n()],
            weight: 0,
            tight: vec![0; g.n()],
            nbr_weight: vec![0; g.n()],
        }
    }

    pub fn from_set(g: &StaticGraph, set: &[VertexId]) -> Result<Self, SolutionError> {
        let mut s = Solution::empty(g);
        for &v in set {
            if v >= g.n() {
                return Err(SolutionError::OutOfRange(v));
            }
            if s.member[v] {
                continue;
            }
            if s.tight[v] > 0 {
                let u = *g.neighbors(v).iter().find(|&&u| s.member[u]).unwrap();
                return Err(SolutionError::NotIndependent(u.min(v), u.max(v)));
            }
            s.insert(g, v);
        }
        Ok(s)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.member[v]
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    /// |N(v) ∩ S|
    pub fn tightness(&self, v: VertexId) -> u32 {
        self.tight[v]
    }

    /// ω(N(v) ∩ S)
    pub fn neighbor_weight(&self, v: VertexId) -> Weight {
        self.nbr_weight[v]
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.weight == 0 && self.len() == 0
    }

    /// Members in increasing order.
    pub fn vertices(&self) -> Vec<VertexId> {
        (0..self.member.len()).filter(|&v| self.member[v]).collect()
    }

    fn insert(&mut self, g: &StaticGraph, v: VertexId) {
        debug_assert!(!self.member[v] && self.tight[v] == 0);
        self.member[v] = true;
        self.weight += g.weight(v);
        for &u in g.neighbors(v) {
            self.tight[u] += 1;
            self.nbr_weight[u] += g.weight(v);
        }
    }

    fn remove(&mut self, g: &StaticGraph, v: VertexId) {
        debug_assert!(self.member[v]);
        self.member[v] = false;
        self.weight -= g.weight(v);
        for &u in g.neighbors(v) {
            self.tight[u] -= 1;
            self.nbr_weight[u] -= g.weight(v);
        }
    }

    /// Independence plus every maintained field against a recomputation.
    pub fn is_consistent(&self, g: &StaticGraph) -> bool {
        let fresh = match Solution::from_set(g, &self.vertices()) {
            Ok(s) => s,
            Err(_) => return false,
        };
        fresh == *self
    }

    /// The only solution neighbor of a one-tight vertex.
    fn mate(&self, g: &StaticGraph, v: VertexId) -> VertexId {
        debug_assert_eq!(self.tight[v], 1);
        *g.neighbors(v).iter().find(|&&u| self.member[u]).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AapMode {
    /// Extend to the best neighbor, apply only a strictly improving prefix.
    Greedy,
    /// Extend at random, apply the best improving prefix or else the whole path.
    Perturb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LsLimit {
    pub iterations: Option<u64>,
    pub time: Option<Duration>,
}

impl LsLimit {
    pub fn iterations(k: u64) -> Self {
        LsLimit {
            iterations: Some(k),
            time: None,
        }
    }

    pub fn time(t: Duration) -> Self {
        LsLimit {
            iterations: None,
            time: Some(t),
        }
    }
}

/// Working state of one BASELINE run.
pub struct LocalSearch<'g> {
    g: &'g StaticGraph,
    sol: Solution,
    queue: VecDeque<VertexId>,
    mq: usize,
    rng: ChaCha8Rng,
    /// Vertices flipped since the iteration started, with their old membership.
    journal: Vec<(VertexId, bool)>,
    // path scratch
    on_out: Vec<bool>,
    on_in: Vec<bool>,
    out_adj: Vec<u32>,
}

/// The PRNG of worker `stream` under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl<'g> LocalSearch<'g> {
    pub fn new(g: &'g StaticGraph, initial: Solution, mq: usize, rng: ChaCha8Rng) -> Self {
        let n = g.n();
        LocalSearch {
            g,
            sol: initial,
            queue: VecDeque::new(),
            mq,
            rng,
            journal: Vec::new(),
            on_out: vec![false; n],
            on_in: vec![false; n],
            out_adj: vec![0; n],
        }
    }

    /// Starts from the empty set and runs greedy over all vertices in random
    /// order.
    pub fn with_greedy_start(g: &'g StaticGraph, mq: usize, rng: ChaCha8Rng) -> Self {
        let mut ls = LocalSearch::new(g, Solution::empty(g), mq, rng);
        let mut order: Vec<VertexId> = (0..g.n()).collect();
        order.shuffle(&mut ls.rng);
        ls.queue.extend(order);
        ls.greedy();
        ls
    }

    pub fn solution(&self) -> &Solution {
        &self.sol
    }

    pub fn into_solution(self) -> Solution {
        self.sol
    }

    pub fn into_parts(self) -> (Solution, ChaCha8Rng) {
        (self.sol, self.rng)
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn push(&mut self, v: VertexId) {
        self.queue.push_back(v);
    }

    fn observe(&mut self, v: VertexId) {
        self.queue.extend(self.g.neighbors(v).iter().copied());
    }

    fn flip_in(&mut self, v: VertexId) {
        self.sol.insert(self.g, v);
        self.journal.push((v, false));
        self.observe(v);
    }

    fn flip_out(&mut self, v: VertexId) {
        self.sol.remove(self.g, v);
        self.journal.push((v, true));
        self.observe(v);
    }

    /// S = {u} ∪ (S ∖ N(u))
    fn insert_evicting(&mut self, u: VertexId) {
        let g = self.g;
        for &x in g.neighbors(u) {
            if self.sol.member[x] {
                self.flip_out(x);
            }
        }
        self.flip_in(u);
    }

    fn undo(&mut self) {
        while let Some((v, was_in)) = self.journal.pop() {
            if was_in {
                self.sol.insert(self.g, v);
            } else {
                self.sol.remove(self.g, v);
            }
        }
    }

    fn try_neighborhood_swap(&mut self, u: VertexId) -> bool {
        if self.sol.member[u] || self.g.weight(u) <= self.sol.nbr_weight[u] {
            return false;
        }
        self.insert_evicting(u);
        true
    }

    /// Replaces a solution vertex c by two non-adjacent neighbors that have c
    /// as their only solution neighbor. c is u itself or u's solution mate.
    fn try_two_one(&mut self, u: VertexId) -> bool {
        let g = self.g;
        let c = if self.sol.member[u] {
            u
        } else if self.sol.tight[u] == 1 {
            self.sol.mate(g, u)
        } else {
            return false;
        };
        let mut t: Vec<VertexId> = g
            .neighbors(c)
            .iter()
            .copied()
            .filter(|&x| self.sol.tight[x] == 1)
            .collect();
        if t.len() < 2 {
            return false;
        }
        t.sort_by_key(|&x| (std::cmp::Reverse(g.weight(x)), x));
        let wc = g.weight(c);
        let mut pair = None;
        'outer: for i in 0..t.len() - 1 {
            // sorted by weight, so no later pair can beat the best one left
            if g.weight(t[i]) + g.weight(t[i + 1]) <= wc {
                break;
            }
            for &y in &t[i + 1..] {
                if g.weight(t[i]) + g.weight(y) <= wc {
                    break;
                }
                if !g.has_edge(t[i], y) {
                    pair = Some((t[i], y));
                    break 'outer;
                }
            }
        }
        let Some((x, y)) = pair else {
            return false;
        };
        self.flip_out(c);
        self.flip_in(x);
        self.flip_in(y);
        true
    }

    /// Builds an alternating augmenting path from `start` and applies it per
    /// `mode`. `start` must be in S or one-tight. Returns whether S changed.
    pub fn aap_move(&mut self, start: VertexId, mode: AapMode) -> bool {
        let g = self.g;
        // path vertices in S (outs) and outside S (ins), with the weight gain
        // of every prefix: prefix k applies outs[..o_k] and ins[..i_k]
        let mut outs: Vec<VertexId> = Vec::new();
        let mut ins: Vec<VertexId> = Vec::new();
        let mut prefixes: Vec<(usize, usize, Weight)> = Vec::new();
        let mut last;
        if self.sol.member[start] {
            outs.push(start);
            last = start;
            prefixes.push((1, 0, -g.weight(start)));
        } else if self.sol.tight[start] == 1 {
            let u = self.sol.mate(g, start);
            outs.push(u);
            self.add_in(start, &mut ins);
            last = u;
            prefixes.push((1, 1, g.weight(start) - g.weight(u)));
        } else {
            return false;
        }
        self.on_out[last] = true;
        let mut gain = prefixes[0].2;
        let mut options: Vec<(VertexId, VertexId)> = Vec::new();
        for _ in 0..AAP_MAX_STEPS {
            options.clear();
            for &x in g.neighbors(last) {
                if self.sol.member[x]
                    || self.on_in[x]
                    || self.out_adj[x] > 0
                    || self.sol.tight[x] != 2
                {
                    continue;
                }
                let y = *g
                    .neighbors(x)
                    .iter()
                    .find(|&&y| y != last && self.sol.member[y])
                    .unwrap();
                options.push((x, y));
            }
            if options.is_empty() {
                break;
            }
            let step_gain = |&(x, y): &(VertexId, VertexId), on_out: &[bool]| {
                g.weight(x) - if on_out[y] { 0 } else { g.weight(y) }
            };
            let (x, y) = match mode {
                AapMode::Greedy => *options
                    .iter()
                    .max_by_key(|o| (step_gain(o, &self.on_out), std::cmp::Reverse(o.0)))
                    .unwrap(),
                AapMode::Perturb => options[self.rng.gen_range(0..options.len())],
            };
            gain += step_gain(&(x, y), &self.on_out);
            self.add_in(x, &mut ins);
            if !self.on_out[y] {
                self.on_out[y] = true;
                outs.push(y);
            }
            prefixes.push((outs.len(), ins.len(), gain));
            last = y;
        }
        // clear scratch before applying
        for &v in &outs {
            self.on_out[v] = false;
        }
        for &x in &ins {
            self.on_in[x] = false;
            for &w in g.neighbors(x) {
                self.out_adj[w] -= 1;
            }
        }
        let best = prefixes
            .iter()
            .enumerate()
            .filter(|(_, p)| p.2 > 0)
            .max_by_key(|(k, p)| (p.2, *k))
            .map(|(k, _)| k);
        let chosen = match (best, mode) {
            (Some(k), _) => k,
            (None, AapMode::Perturb) => prefixes.len() - 1,
            (None, AapMode::Greedy) => return false,
        };
        let (o, i, _) = prefixes[chosen];
        for &v in &outs[..o] {
            self.flip_out(v);
        }
        for &x in &ins[..i] {
            self.flip_in(x);
        }
        true
    }

    fn add_in(&mut self, x: VertexId, ins: &mut Vec<VertexId>) {
        self.on_in[x] = true;
        for &w in self.g.neighbors(x) {
            self.out_adj[w] += 1;
        }
        ins.push(x);
    }

    /// Pops the queue until it is empty, applying the first operator that
    /// improves at each popped vertex.
    pub fn greedy(&mut self) {
        while let Some(u) = self.queue.pop_front() {
            if self.try_neighborhood_swap(u) || self.try_two_one(u) {
                continue;
            }
            if !self.sol.member[u] && self.sol.tight[u] == 1 {
                self.aap_move(u, AapMode::Greedy);
            }
        }
    }

    fn perturb_step(&mut self) {
        let n = self.g.n();
        if n == 0 {
            return;
        }
        let u = self.rng.gen_range(0..n);
        if self.sol.member[u] || self.sol.tight[u] == 1 {
            self.aap_move(u, AapMode::Perturb);
        } else {
            self.insert_evicting(u);
            let mut flips = 0;
            while self.queue.len() < self.mq && !self.queue.is_empty() && flips < self.mq {
                let i = self.rng.gen_range(0..self.queue.len());
                let v = self.queue.swap_remove_back(i).unwrap();
                if self.sol.member[v] {
                    self.flip_out(v);
                } else {
                    self.insert_evicting(v);
                }
                flips += 1;
            }
        }
        self.greedy();
    }

    /// One iteration: perturb, repair, and undo if the weight dropped.
    pub fn iterate(&mut self) {
        let cost = self.sol.weight;
        self.journal.clear();
        self.perturb_step();
        if self.sol.weight < cost {
            self.undo();
        }
        self.journal.clear();
    }

    /// Perturbation and repair without backtracking.
    pub fn perturb(&mut self) {
        self.journal.clear();
        self.perturb_step();
        self.journal.clear();
    }

    /// Iterates until `limit`; returns the number of iterations done. An
    /// empty limit does nothing.
    pub fn run(&mut self, limit: &LsLimit) -> u64 {
        if limit.iterations.is_none() && limit.time.is_none() {
            return 0;
        }
        let start = Instant::now();
        let mut done = 0u64;
        loop {
            if limit.iterations.is_some_and(|k| done >= k) {
                break;
            }
            if limit.time.is_some_and(|t| start.elapsed() >= t) {
                break;
            }
            self.iterate();
            done += 1;
        }
        done
    }
}

/// BASELINE from `initial`. The result is never lighter than `initial`.
pub fn run_baseline(
    g: &StaticGraph,
    initial: Solution,
    mq: usize,
    limit: &LsLimit,
    seed: u64,
) -> Solution {
    let mut ls = LocalSearch::new(g, initial, mq, rng_for(seed, 0));
    ls.run(limit);
    ls.into_solution()
}

/// Random-order greedy start.
pub fn greedy_solution(g: &StaticGraph, seed: u64) -> Solution {
    LocalSearch::with_greedy_start(g, DEFAULT_MQ, rng_for(seed, 0)).into_solution()
}
