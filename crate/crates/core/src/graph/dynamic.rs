use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use super::{GraphError, StaticGraph, VertexId, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Active,
    Included,
    Excluded,
    Folded,
}

#[derive(Debug, Clone)]
enum Mutation {
    RemoveVertex { v: VertexId, prev: Status },
    AddVertex,
    AddEdge(VertexId, VertexId),
    RemoveEdge(VertexId, VertexId),
    SetWeight { v: VertexId, old: Weight },
}

/// Mutable working graph for the reduction engine.
///
/// Removed vertices keep their last neighbor list so a rollback can reinsert
/// them. Fold products are appended after the existing ids. Every vertex whose
/// neighborhood or weight changes is recorded in a touched list that the
/// scheduler drains after each successful rule.
#[derive(Debug, Clone)]
pub struct DynamicGraph {
    adj: Vec<Vec<VertexId>>,
    weight: Vec<Weight>,
    status: Vec<Status>,
    original_n: usize,
    active: usize,
    journal: Vec<Mutation>,
    touched: Vec<VertexId>,
    touched_flag: Vec<bool>,
}

impl DynamicGraph {
    pub fn from_static(g: &StaticGraph) -> Self {
        let n = g.n();
        DynamicGraph {
            adj: (0..n).map(|v| g.neighbors(v).to_vec()).collect(),
            weight: g.weights().to_vec(),
            status: vec![Status::Active; n],
            original_n: n,
            active: n,
            journal: Vec::new(),
            touched: Vec::new(),
            touched_flag: vec![false; n],
        }
    }

    /// Number of allocated ids, including removed vertices and fold products.
    pub fn slots(&self) -> usize {
        self.adj.len()
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    pub fn active_count(&self) -> usize {
        self.active
    }

    #[inline]
    pub fn is_active(&self, v: VertexId) -> bool {
        v < self.status.len() && self.status[v] == Status::Active
    }

    pub fn status(&self, v: VertexId) -> Status {
        self.status[v]
    }

    #[inline]
    pub fn weight(&self, v: VertexId) -> Weight {
        self.weight[v]
    }

    /// Sorted neighbor list. Only meaningful for active vertices.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn neighborhood_weight(&self, v: VertexId) -> Weight {
        self.adj[v].iter().map(|&u| self.weight[u]).sum()
    }

    pub fn active_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.slots()).filter(move |&v| self.status[v] == Status::Active)
    }

    pub fn active_edge_count(&self) -> usize {
        self.active_vertices()
            .map(|v| self.adj[v].len())
            .sum::<usize>()
            / 2
    }

    fn check_active(&self, v: VertexId) -> Result<(), GraphError> {
        if v >= self.slots() {
            Err(GraphError::OutOfRange(v))
        } else if self.status[v] != Status::Active {
            Err(GraphError::Inactive(v))
        } else {
            Ok(())
        }
    }

    fn touch(&mut self, v: VertexId) {
        if !self.touched_flag[v] {
            self.touched_flag[v] = true;
            self.touched.push(v);
        }
    }

    /// Removes an active vertex, marking it with `status`.
    pub fn remove_vertex(&mut self, v: VertexId, status: Status) -> Result<(), GraphError> {
        self.check_active(v)?;
        debug_assert!(status != Status::Active);
        for i in 0..self.adj[v].len() {
            let u = self.adj[v][i];
            let pos = self.adj[u]
                .binary_search(&v)
                .map_err(|_| GraphError::Asymmetric(u, v))?;
            self.adj[u].remove(pos);
            self.touch(u);
        }
        self.status[v] = status;
        self.active -= 1;
        self.journal.push(Mutation::RemoveVertex {
            v,
            prev: Status::Active,
        });
        Ok(())
    }

    /// Appends a new active vertex adjacent to `neighbors` and returns its id.
    pub fn add_vertex(
        &mut self,
        weight: Weight,
        neighbors: &[VertexId],
    ) -> Result<VertexId, GraphError> {
        let v = self.slots();
        if weight <= 0 {
            return Err(GraphError::NonPositiveWeight(v));
        }
        let mut list = neighbors.to_vec();
        list.sort_unstable();
        list.dedup();
        for &u in &list {
            self.check_active(u)?;
        }
        for &u in &list {
            // v is larger than every existing id
            self.adj[u].push(v);
            self.touch(u);
        }
        self.adj.push(list);
        self.weight.push(weight);
        self.status.push(Status::Active);
        self.touched_flag.push(false);
        self.active += 1;
        self.touch(v);
        self.journal.push(Mutation::AddVertex);
        Ok(v)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        self.check_active(u)?;
        self.check_active(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let pu = match self.adj[u].binary_search(&v) {
            Ok(_) => return Err(GraphError::DuplicateEdge(u, v)),
            Err(p) => p,
        };
        self.adj[u].insert(pu, v);
        let pv = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(pv, u);
        self.touch(u);
        self.touch(v);
        self.journal.push(Mutation::AddEdge(u, v));
        Ok(())
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        self.check_active(u)?;
        self.check_active(v)?;
        let pu = self.adj[u]
            .binary_search(&v)
            .map_err(|_| GraphError::MissingEdge(u, v))?;
        self.adj[u].remove(pu);
        let pv = self.adj[v]
            .binary_search(&u)
            .map_err(|_| GraphError::Asymmetric(v, u))?;
        self.adj[v].remove(pv);
        self.touch(u);
        self.touch(v);
        self.journal.push(Mutation::RemoveEdge(u, v));
        Ok(())
    }

    /// Sets the weight of an active vertex. The new weight must stay positive.
    pub fn set_weight(&mut self, v: VertexId, weight: Weight) -> Result<(), GraphError> {
        self.check_active(v)?;
        if weight <= 0 {
            return Err(GraphError::NonPositiveWeight(v));
        }
        let old = self.weight[v];
        if old == weight {
            return Ok(());
        }
        self.weight[v] = weight;
        self.touch(v);
        for i in 0..self.adj[v].len() {
            let u = self.adj[v][i];
            self.touch(u);
        }
        self.journal.push(Mutation::SetWeight { v, old });
        Ok(())
    }

    /// Position in the mutation journal, usable with [`Self::rollback`].
    pub fn checkpoint(&self) -> usize {
        self.journal.len()
    }

    /// Undoes every mutation recorded after `checkpoint`.
    pub fn rollback(&mut self, checkpoint: usize) {
        while self.journal.len() > checkpoint {
            match self.journal.pop().expect("journal entry") {
                Mutation::RemoveVertex { v, prev } => {
                    for i in 0..self.adj[v].len() {
                        let u = self.adj[v][i];
                        let pos = self.adj[u].binary_search(&v).unwrap_err();
                        self.adj[u].insert(pos, v);
                    }
                    self.status[v] = prev;
                    self.active += 1;
                }
                Mutation::AddVertex => {
                    let v = self.slots() - 1;
                    for i in 0..self.adj[v].len() {
                        let u = self.adj[v][i];
                        let last = self.adj[u].pop();
                        debug_assert_eq!(last, Some(v));
                    }
                    self.adj.pop();
                    self.weight.pop();
                    self.status.pop();
                    if self.touched_flag.pop() == Some(true) {
                        self.touched.retain(|&t| t != v);
                    }
                    self.active -= 1;
                }
                Mutation::AddEdge(u, v) => {
                    let pu = self.adj[u].binary_search(&v).expect("edge to undo");
                    self.adj[u].remove(pu);
                    let pv = self.adj[v].binary_search(&u).expect("edge to undo");
                    self.adj[v].remove(pv);
                }
                Mutation::RemoveEdge(u, v) => {
                    let pu = self.adj[u].binary_search(&v).unwrap_err();
                    self.adj[u].insert(pu, v);
                    let pv = self.adj[v].binary_search(&u).unwrap_err();
                    self.adj[v].insert(pv, u);
                }
                Mutation::SetWeight { v, old } => {
                    self.weight[v] = old;
                }
            }
        }
    }

    /// Drops the undo history (rollback before this point becomes impossible).
    pub fn clear_journal(&mut self) {
        self.journal.clear();
    }

    /// Drains the set of vertices whose neighborhood or weight changed since
    /// the last call, keeping only those still active.
    pub fn take_touched(&mut self) -> Vec<VertexId> {
        let mut out = std::mem::take(&mut self.touched);
        for &v in &out {
            self.touched_flag[v] = false;
        }
        out.retain(|&v| self.status[v] == Status::Active);
        out
    }

    pub fn clear_touched(&mut self) {
        let _ = self.take_touched();
    }

    /// Hash of the active structure: ids, statuses, weights and adjacency.
    pub fn checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.slots().hash(&mut h);
        for v in 0..self.slots() {
            self.status[v].hash(&mut h);
            if self.status[v] == Status::Active {
                v.hash(&mut h);
                self.weight[v].hash(&mut h);
                self.adj[v].hash(&mut h);
            }
        }
        h.finish()
    }

    /// Checks that the active subgraph satisfies the static graph invariants.
    pub fn validate(&self) -> Result<(), GraphError> {
        let mut count = 0;
        for v in self.active_vertices() {
            count += 1;
            if self.weight[v] <= 0 {
                return Err(GraphError::NonPositiveWeight(v));
            }
            let nbrs = &self.adj[v];
            for (i, &u) in nbrs.iter().enumerate() {
                if u == v {
                    return Err(GraphError::SelfLoop(v));
                }
                if i > 0 && nbrs[i - 1] >= u {
                    return Err(GraphError::Unsorted(v));
                }
                if !self.is_active(u) {
                    return Err(GraphError::Inactive(u));
                }
                if !self.has_edge(u, v) {
                    return Err(GraphError::Asymmetric(v, u));
                }
            }
        }
        if count != self.active {
            return Err(GraphError::Io(format!(
                "active counter {} disagrees with {} active vertices",
                self.active, count
            )));
        }
        Ok(())
    }

    /// Induced subgraph on active `vertices`, with the new-to-old mapping.
    pub fn induced_subgraph(
        &self,
        vertices: &[VertexId],
    ) -> Result<(StaticGraph, Vec<VertexId>), GraphError> {
        let mut to_old = vertices.to_vec();
        to_old.sort_unstable();
        to_old.dedup();
        for &v in &to_old {
            self.check_active(v)?;
        }
        let mut local = std::collections::HashMap::with_capacity(to_old.len());
        for (i, &v) in to_old.iter().enumerate() {
            local.insert(v, i);
        }
        let adjacency = to_old
            .iter()
            .map(|&v| {
                self.adj[v]
                    .iter()
                    .filter_map(|u| local.get(u).copied())
                    .collect()
            })
            .collect();
        let weights = to_old.iter().map(|&v| self.weight[v]).collect();
        Ok((StaticGraph::from_adjacency(weights, adjacency)?, to_old))
    }

    /// Snapshot of the whole active subgraph.
    pub fn to_static(&self) -> (StaticGraph, Vec<VertexId>) {
        let active: Vec<_> = self.active_vertices().collect();
        self.induced_subgraph(&active)
            .expect("active subgraph is always valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> DynamicGraph {
        let g = StaticGraph::from_edges(vec![2, 1, 2, 2], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        DynamicGraph::from_static(&g)
    }

    #[test]
    fn remove_and_rollback_restores_structure() {
        let mut g = path4();
        let before = g.checksum();
        let cp = g.checkpoint();
        g.remove_vertex(1, Status::Excluded).unwrap();
        g.add_edge(0, 3).unwrap();
        g.set_weight(2, 7).unwrap();
        let x = g.add_vertex(4, &[0, 2]).unwrap();
        assert_eq!(x, 4);
        g.remove_edge(2, 3).unwrap();
        g.validate().unwrap();
        assert_ne!(g.checksum(), before);
        g.rollback(cp);
        g.validate().unwrap();
        assert_eq!(g.checksum(), before);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.slots(), 4);
    }

    #[test]
    fn inactive_vertices_are_rejected() {
        let mut g = path4();
        g.remove_vertex(0, Status::Included).unwrap();
        assert_eq!(
            g.remove_vertex(0, Status::Excluded),
            Err(GraphError::Inactive(0))
        );
        assert_eq!(g.add_edge(0, 2), Err(GraphError::Inactive(0)));
        assert!(g.induced_subgraph(&[0, 1]).is_err());
    }

    #[test]
    fn touched_tracks_changed_neighborhoods() {
        let mut g = path4();
        g.remove_vertex(1, Status::Excluded).unwrap();
        let mut t = g.take_touched();
        t.sort();
        assert_eq!(t, vec![0, 2]);
        assert!(g.take_touched().is_empty());
    }

    #[test]
    fn weight_must_stay_positive() {
        let mut g = path4();
        assert!(g.set_weight(0, 0).is_err());
        assert!(g.add_vertex(-1, &[]).is_err());
    }
}
