//! Spanning-tree bases of the transportation problem.
//!
//! The `m + n` nodes of the bipartite graph live in slots: sources occupy
//! `0..m` and destinations `m..m + n`. The tree is stored as parent
//! pointers rooted at source 0; every non-root slot owns the basic edge to
//! its parent together with that edge's flow. An edge is therefore
//! identified by its lower endpoint (the "child slot").

use std::fmt;

use thiserror::Error;

use crate::instance::{FlowEntry, FlowSolution, Instance, Side};

/// A node of the bipartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    Source(usize),
    Destination(usize),
}

impl NodeId {
    pub fn side(self) -> Side {
        match self {
            NodeId::Source(_) => Side::Source,
            NodeId::Destination(_) => Side::Destination,
        }
    }

    pub fn index(self) -> usize {
        match self {
            NodeId::Source(i) | NodeId::Destination(i) => i,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Source(i) => write!(f, "s{}", i + 1),
            NodeId::Destination(j) => write!(f, "d{}", j + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BasisError {
    #[error("a basis of a {m}x{n} instance needs {expected} edges, got {found}")]
    EdgeCount {
        m: usize,
        n: usize,
        expected: usize,
        found: usize,
    },
    #[error("edge ({0}, {1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("edge ({0}, {1}) carries negative flow {2}")]
    NegativeFlow(usize, usize, i64),
    #[error("edges do not form a spanning tree ({reached} of {nodes} nodes reachable from the root)")]
    NotSpanning { reached: usize, nodes: usize },
}

/// Which of several tied blocking edges leaves the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeavingRule {
    /// The tied edge closest to the source endpoint of the entering edge.
    NearestSource,
    /// The tied edge with the smallest row-major variable index (Bland).
    SmallestIndex,
}

/// Simplex multipliers anchored at `u[0] = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multipliers {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
}

impl Multipliers {
    #[inline]
    pub fn reduced_cost(&self, inst: &Instance, i: usize, j: usize) -> i64 {
        inst.cost(i, j) - self.u[i] - self.v[j]
    }
}

/// The unique tree path from source `i` to destination `j`.
///
/// Edge positions are counted from the entering edge `(i, j)`: the first
/// path edge (leaving `i`) is position 1. Odd positions lose flow when the
/// entering variable increases; even positions gain it.
#[derive(Debug, Clone, Default)]
pub struct CyclePath {
    source: usize,
    destination: usize,
    nodes: Vec<usize>,
    edges: Vec<usize>,
    source_side: usize,
    scratch: Vec<usize>,
    /// Visit stamps of the two-sided climb, indexed by slot.
    marks: Vec<u32>,
    stamp: u32,
}

impl CyclePath {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entering(&self) -> (usize, usize) {
        (self.source, self.destination)
    }

    /// Number of nodes on the path, `|P|`.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of edges on the path (always odd).
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Node slots from source `i` to destination `j`.
    pub fn slots(&self) -> &[usize] {
        &self.nodes
    }

    /// Child slot of the tree edge at 0-based step `k` (position `k + 1`).
    pub fn edge_slot(&self, k: usize) -> usize {
        self.edges[k]
    }

    pub fn edge_slots(&self) -> &[usize] {
        &self.edges
    }

    /// Position is odd (decreases with the entering variable).
    #[inline]
    pub fn is_odd_step(k: usize) -> bool {
        k.is_multiple_of(2)
    }

    /// Steps `0..source_side()` climb from the source endpoint to the
    /// lowest common ancestor; the remaining steps descend to the
    /// destination endpoint.
    pub fn source_side(&self) -> usize {
        self.source_side
    }
}

/// A basic solution stored as a spanning tree rooted at source 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisTree {
    m: usize,
    n: usize,
    parent: Vec<usize>,
    flow: Vec<i64>,
    children: Vec<Vec<usize>>,
}

pub const ROOT: usize = 0;

impl BasisTree {
    /// Builds a basis from `m + n - 1` `(source, destination, flow)` triples.
    pub fn from_edges(m: usize, n: usize, edges: &[(usize, usize, i64)]) -> Result<Self, BasisError> {
        let nodes = m + n;
        if edges.len() + 1 != nodes {
            return Err(BasisError::EdgeCount {
                m,
                n,
                expected: nodes - 1,
                found: edges.len(),
            });
        }
        let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); nodes];
        for &(i, j, x) in edges {
            if i >= m || j >= n {
                return Err(BasisError::OutOfRange(i, j));
            }
            if x < 0 {
                return Err(BasisError::NegativeFlow(i, j, x));
            }
            adj[i].push((m + j, x));
            adj[m + j].push((i, x));
        }
        let mut tree = BasisTree {
            m,
            n,
            parent: vec![usize::MAX; nodes],
            flow: vec![0; nodes],
            children: vec![Vec::new(); nodes],
        };
        tree.parent[ROOT] = ROOT;
        let mut stack = vec![ROOT];
        let mut reached = 1;
        while let Some(p) = stack.pop() {
            for &(c, x) in &adj[p] {
                if c == tree.parent[p] && p != ROOT {
                    continue;
                }
                if tree.parent[c] != usize::MAX {
                    // reached twice: a cycle (or a duplicated edge)
                    return Err(BasisError::NotSpanning { reached, nodes });
                }
                tree.parent[c] = p;
                tree.flow[c] = x;
                tree.children[p].push(c);
                reached += 1;
                stack.push(c);
            }
        }
        if reached != nodes {
            return Err(BasisError::NotSpanning { reached, nodes });
        }
        Ok(tree)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.m + self.n
    }

    #[inline]
    pub fn node(&self, slot: usize) -> NodeId {
        if slot < self.m {
            NodeId::Source(slot)
        } else {
            NodeId::Destination(slot - self.m)
        }
    }

    #[inline]
    pub fn slot(&self, node: NodeId) -> usize {
        match node {
            NodeId::Source(i) => i,
            NodeId::Destination(j) => self.m + j,
        }
    }

    #[inline]
    pub fn is_source_slot(&self, slot: usize) -> bool {
        slot < self.m
    }

    #[inline]
    pub fn parent(&self, slot: usize) -> usize {
        self.parent[slot]
    }

    #[inline]
    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    pub fn children(&self, slot: usize) -> &[usize] {
        &self.children[slot]
    }

    /// Flow on the edge from `slot` to its parent.
    #[inline]
    pub fn flow(&self, slot: usize) -> i64 {
        self.flow[slot]
    }

    /// `(source, destination)` of the edge owned by a non-root slot.
    #[inline]
    pub fn edge_of(&self, slot: usize) -> (usize, usize) {
        let p = self.parent[slot];
        if slot < self.m {
            (slot, p - self.m)
        } else {
            (p, slot - self.m)
        }
    }

    /// Child slot of the basic edge `(i, j)`, if it is basic.
    #[inline]
    pub fn basic_slot(&self, i: usize, j: usize) -> Option<usize> {
        let d = self.m + j;
        if self.parent[d] == i {
            Some(d)
        } else if i != ROOT && self.parent[i] == d {
            Some(i)
        } else {
            None
        }
    }

    #[inline]
    pub fn is_basic(&self, i: usize, j: usize) -> bool {
        self.basic_slot(i, j).is_some()
    }

    /// All `m + n - 1` basic edges as `(source, destination, flow)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (1..self.node_count()).map(move |s| {
            let (i, j) = self.edge_of(s);
            (i, j, self.flow[s])
        })
    }

    /// Basic edges sorted by `(source, destination)`.
    pub fn sorted_edges(&self) -> Vec<(usize, usize, i64)> {
        let mut e: Vec<_> = self.edges().collect();
        e.sort_unstable();
        e
    }

    /// Number of basic edges carrying zero flow.
    pub fn degenerate_count(&self) -> usize {
        (1..self.node_count()).filter(|&s| self.flow[s] == 0).count()
    }

    pub fn solution(&self) -> FlowSolution {
        FlowSolution {
            entries: self
                .edges()
                .map(|(source, destination, flow)| FlowEntry {
                    source,
                    destination,
                    flow,
                })
                .collect(),
        }
    }

    pub fn objective(&self, inst: &Instance) -> i128 {
        self.edges()
            .map(|(i, j, x)| inst.cost(i, j) as i128 * x as i128)
            .sum()
    }

    /// Solves `c_ij = u_i + v_j` on every basic edge with `u_0 = 0`, in one
    /// traversal from the root.
    pub fn compute_multipliers(&self, inst: &Instance) -> Multipliers {
        let mut mult = Multipliers {
            u: vec![0; self.m],
            v: vec![0; self.n],
        };
        self.compute_multipliers_into(inst, &mut mult);
        mult
    }

    pub fn compute_multipliers_into(&self, inst: &Instance, mult: &mut Multipliers) {
        mult.u.resize(self.m, 0);
        mult.v.resize(self.n, 0);
        mult.u[ROOT] = 0;
        let mut stack = Vec::with_capacity(64);
        stack.push(ROOT);
        while let Some(p) = stack.pop() {
            for &c in &self.children[p] {
                if c < self.m {
                    let j = p - self.m;
                    mult.u[c] = inst.cost(c, j) - mult.v[j];
                } else {
                    let j = c - self.m;
                    mult.v[j] = inst.cost(p, j) - mult.u[p];
                }
                stack.push(c);
            }
        }
    }

    /// The tree path from source `i` to destination `j`, found by climbing
    /// from both ends in turn and stamping visited nodes until one climb
    /// meets the other at their lowest common ancestor. The work is
    /// proportional to the path length.
    pub fn find_path(&self, i: usize, j: usize) -> CyclePath {
        let mut path = CyclePath::new();
        self.find_path_into(i, j, &mut path);
        path
    }

    pub fn find_path_into(&self, i: usize, j: usize, path: &mut CyclePath) {
        debug_assert!(i < self.m && j < self.n);
        path.source = i;
        path.destination = j;
        path.nodes.clear();
        path.edges.clear();
        path.scratch.clear();
        let nodes = self.node_count();
        if path.marks.len() != nodes || path.stamp == u32::MAX {
            path.marks.clear();
            path.marks.resize(nodes, 0);
            path.stamp = 0;
        }
        path.stamp += 1;
        let stamp = path.stamp;
        let marks = &mut path.marks;
        let (mut a, mut b) = (i, self.m + j);
        marks[a] = stamp;
        marks[b] = stamp;
        let lca = loop {
            if a != ROOT {
                a = self.parent[a];
                if marks[a] == stamp {
                    break a;
                }
                marks[a] = stamp;
            }
            if b != ROOT {
                b = self.parent[b];
                if marks[b] == stamp {
                    break b;
                }
                marks[b] = stamp;
            }
        };
        let mut a = i;
        while a != lca {
            path.nodes.push(a);
            a = self.parent[a];
        }
        let mut b = self.m + j;
        while b != lca {
            path.scratch.push(b);
            b = self.parent[b];
        }
        path.source_side = path.nodes.len();
        path.edges.extend_from_slice(&path.nodes);
        path.nodes.push(lca);
        for &s in path.scratch.iter().rev() {
            path.nodes.push(s);
            path.edges.push(s);
        }
    }

    /// Sum of `c_ij` over the entering edge minus the odd-position edges
    /// plus the even-position edges. For a basis with valid multipliers this
    /// equals the reduced cost of the entering variable.
    pub fn cycle_cost(&self, inst: &Instance, path: &CyclePath) -> i64 {
        let (i, j) = path.entering();
        let mut delta = inst.cost(i, j);
        for (k, &s) in path.edges.iter().enumerate() {
            let (p, q) = self.edge_of(s);
            if CyclePath::is_odd_step(k) {
                delta -= inst.cost(p, q);
            } else {
                delta += inst.cost(p, q);
            }
        }
        delta
    }

    /// Largest amount the entering variable can increase by: the minimum
    /// flow over odd positions, with the step index of the blocking edge.
    pub fn max_increase(&self, path: &CyclePath) -> (i64, usize) {
        self.max_increase_by(path, LeavingRule::NearestSource)
    }

    pub fn max_increase_by(&self, path: &CyclePath, rule: LeavingRule) -> (i64, usize) {
        self.blocking(path, 0, rule)
    }

    /// Largest amount the entering variable can decrease by before an
    /// even-position edge empties, with the step index of that edge.
    pub fn max_decrease(&self, path: &CyclePath) -> (i64, usize) {
        self.blocking(path, 1, LeavingRule::NearestSource)
    }

    fn blocking(&self, path: &CyclePath, first: usize, rule: LeavingRule) -> (i64, usize) {
        let mut best = (i64::MAX, usize::MAX);
        let mut best_key = usize::MAX;
        for k in (first..path.edges.len()).step_by(2) {
            let s = path.edges[k];
            let x = self.flow[s];
            let better = match rule {
                LeavingRule::NearestSource => x < best.0,
                LeavingRule::SmallestIndex => {
                    let (p, q) = self.edge_of(s);
                    let key = p * self.n + q;
                    let better = x < best.0 || (x == best.0 && key < best_key);
                    if better {
                        best_key = key;
                    }
                    better
                }
            };
            if better {
                best = (x, k);
            }
        }
        best
    }

    /// Pushes `delta` around the cycle: odd positions lose `delta`, even
    /// positions gain it. The entering variable itself is not stored in the
    /// tree; callers track its value.
    ///
    /// Panics if a flow would become negative.
    pub fn apply_flow_change(&mut self, path: &CyclePath, delta: i64) {
        if delta == 0 {
            return;
        }
        for (k, &s) in path.edges.iter().enumerate() {
            let x = &mut self.flow[s];
            if CyclePath::is_odd_step(k) {
                *x -= delta;
            } else {
                *x += delta;
            }
            assert!(*x >= 0, "flow change of {delta} drives edge {:?} negative", self.edge_of(s));
        }
    }

    /// Replaces the edge at step `leaving` of `path` with the entering edge
    /// carrying `entering_flow`. Flows must already be updated so that the
    /// leaving edge is empty.
    ///
    /// The subtree cut off by the leaving edge is rehung under the entering
    /// edge by reversing parent pointers along the path segment between
    /// them; nothing else changes. Returns the number of nodes whose parent
    /// changed.
    pub fn pivot_exchange(&mut self, path: &CyclePath, entering_flow: i64, leaving: usize) -> usize {
        assert!(leaving < path.edges.len(), "leaving edge is not on the cycle");
        assert!(entering_flow >= 0);
        let cut = path.edges[leaving];
        debug_assert_eq!(self.flow[cut], 0, "leaving edge still carries flow");
        let (i, j) = path.entering();
        let (mut node, mut new_parent) = if leaving < path.source_side {
            (i, self.m + j)
        } else {
            (self.m + j, i)
        };
        let mut carried = entering_flow;
        let mut moved = 0;
        loop {
            let old_parent = self.parent[node];
            let old_flow = self.flow[node];
            detach(&mut self.children[old_parent], node);
            self.parent[node] = new_parent;
            self.flow[node] = carried;
            self.children[new_parent].push(node);
            moved += 1;
            if node == cut {
                break;
            }
            new_parent = node;
            carried = old_flow;
            node = old_parent;
        }
        moved
    }

    /// Structural self-check: parent/children consistency, every node
    /// reachable from the root, bipartite edges and non-negative flows.
    pub fn check_structure(&self) -> Result<(), String> {
        let nodes = self.node_count();
        if self.parent[ROOT] != ROOT {
            return Err("root must be source 0".into());
        }
        let mut child_count = 0;
        for s in 0..nodes {
            for &c in &self.children[s] {
                if self.parent[c] != s {
                    return Err(format!("slot {c} listed under {s} but parent is {}", self.parent[c]));
                }
                child_count += 1;
            }
            if s == ROOT {
                continue;
            }
            let p = self.parent[s];
            if (s < self.m) == (p < self.m) {
                return Err(format!("edge {s}-{p} is not bipartite"));
            }
            if self.flow[s] < 0 {
                return Err(format!("negative flow on edge {:?}", self.edge_of(s)));
            }
        }
        if child_count + 1 != nodes {
            return Err(format!("{child_count} child links for {nodes} nodes"));
        }
        let mut stack = vec![ROOT];
        let mut reached = 0;
        while let Some(s) = stack.pop() {
            reached += 1;
            if reached > nodes {
                return Err("child links contain a cycle".into());
            }
            stack.extend_from_slice(&self.children[s]);
        }
        if reached != nodes {
            return Err(format!("only {reached} of {nodes} nodes reachable from the root"));
        }
        Ok(())
    }

    /// Checks flow conservation against the given supplies/demands.
    pub fn check_conservation(&self, supplies: &[i64], demands: &[i64]) -> Result<(), String> {
        let mut out = vec![0i64; self.m];
        let mut inc = vec![0i64; self.n];
        for (i, j, x) in self.edges() {
            out[i] += x;
            inc[j] += x;
        }
        if let Some(i) = (0..self.m).find(|&i| out[i] != supplies[i]) {
            return Err(format!("source {i} ships {} instead of {}", out[i], supplies[i]));
        }
        if let Some(j) = (0..self.n).find(|&j| inc[j] != demands[j]) {
            return Err(format!("destination {j} receives {} instead of {}", inc[j], demands[j]));
        }
        Ok(())
    }
}

fn detach(list: &mut Vec<usize>, node: usize) {
    let pos = list.iter().position(|&c| c == node).expect("child link missing");
    list.swap_remove(pos);
}
