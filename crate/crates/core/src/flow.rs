//! Maximum flow by blocking flows on level graphs (Dinic).

use std::collections::VecDeque;

pub type Capacity = i64;

pub const INFINITE: Capacity = Capacity::MAX / 4;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: Capacity,
}

#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.out.len()
    }

    /// Adds a directed arc with the given capacity (and its residual twin).
    pub fn add_arc(&mut self, from: usize, to: usize, cap: Capacity) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0 });
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.nodes()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &a in &self.out[x] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && level[arc.to] == u32::MAX {
                    level[arc.to] = level[x] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[t] != u32::MAX).then_some(level)
    }

    /// Augments along one path of the level graph (iteratively, to keep deep
    /// networks off the call stack).
    fn augment(&mut self, s: usize, t: usize, level: &[u32], next: &mut [usize]) -> Capacity {
        let mut path: Vec<usize> = Vec::new();
        let mut x = s;
        loop {
            if x == t {
                let pushed = path.iter().map(|&a| self.arcs[a].cap).min().unwrap_or(0);
                for &a in &path {
                    self.arcs[a].cap -= pushed;
                    self.arcs[a ^ 1].cap += pushed;
                }
                return pushed;
            }
            let mut advanced = false;
            while next[x] < self.out[x].len() {
                let a = self.out[x][next[x]];
                let arc = &self.arcs[a];
                if arc.cap > 0 && level[arc.to] == level[x] + 1 {
                    path.push(a);
                    x = arc.to;
                    advanced = true;
                    break;
                }
                next[x] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the arc that led here
                match path.pop() {
                    None => return 0,
                    Some(a) => {
                        x = self.arcs[a ^ 1].to;
                        next[x] += 1;
                    }
                }
            }
        }
    }

    /// Computes a maximum s-t flow and returns its value. The network keeps the
    /// residual capacities afterwards.
    pub fn max_flow(&mut self, s: usize, t: usize) -> Capacity {
        let mut total = 0;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0usize; self.nodes()];
            loop {
                let pushed = self.augment(s, t, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual network (the source side of a
    /// minimum cut once `max_flow` has run).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &a in &self.out[x] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        // CLRS figure 26.1, max flow 23
        let mut f = FlowNetwork::new(6);
        for &(a, b, c) in &[
            (0, 1, 16),
            (0, 2, 13),
            (2, 1, 4),
            (1, 3, 12),
            (3, 2, 9),
            (2, 4, 14),
            (4, 3, 7),
            (3, 5, 20),
            (4, 5, 4),
        ] {
            f.add_arc(a, b, c);
        }
        assert_eq!(f.max_flow(0, 5), 23);
        let side = f.source_side(0);
        assert!(side[0] && !side[5]);
    }

    #[test]
    fn disconnected_sink() {
        let mut f = FlowNetwork::new(3);
        f.add_arc(0, 1, 5);
        assert_eq!(f.max_flow(0, 2), 0);
        assert_eq!(f.source_side(0), vec![true, true, false]);
    }

    #[test]
    fn cut_equals_flow_on_small_random_networks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..7);
            let mut arcs = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if a != b && rng.gen_bool(0.4) {
                        arcs.push((a, b, rng.gen_range(1..10)));
                    }
                }
            }
            let mut f = FlowNetwork::new(n);
            for &(a, b, c) in &arcs {
                f.add_arc(a, b, c);
            }
            let flow = f.max_flow(0, n - 1);
            // brute-force minimum cut over all source-side sets
            let mut best = Capacity::MAX;
            for mask in 0u32..(1 << n) {
                if mask & 1 == 0 || mask >> (n - 1) & 1 == 1 {
                    continue;
                }
                let cut: Capacity = arcs
                    .iter()
                    .filter(|&&(a, b, _)| mask >> a & 1 == 1 && mask >> b & 1 == 0)
                    .map(|&(_, _, c)| c)
                    .sum();
                best = best.min(cut);
            }
            assert_eq!(flow, best);
        }
    }
}
