//! Oracles written independently of the library's basis code.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use transport_core::{BasisTree, Instance, SolveOutcome};

pub struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind((0..len).collect())
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            x = self.0[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

/// Flows of the basic solution with support `cells`, found by peeling
/// leaves; `None` if the cells do not form a spanning tree or a flow would
/// be negative.
fn basic_flows(inst: &Instance, cells: &[(usize, usize)]) -> Option<Vec<i64>> {
    let (m, n) = (inst.m, inst.n);
    let mut uf = UnionFind::new(m + n);
    if !cells.iter().all(|&(i, j)| uf.union(i, m + j)) {
        return None;
    }
    let mut left: Vec<i64> = inst.supplies.iter().chain(&inst.demands).copied().collect();
    let mut degree = vec![0usize; m + n];
    for &(i, j) in cells {
        degree[i] += 1;
        degree[m + j] += 1;
    }
    let mut flows = vec![-1i64; cells.len()];
    let mut done = 0;
    while done < cells.len() {
        let before = done;
        for (e, &(i, j)) in cells.iter().enumerate() {
            if flows[e] >= 0 {
                continue;
            }
            let leaf = if degree[i] == 1 {
                i
            } else if degree[m + j] == 1 {
                m + j
            } else {
                continue;
            };
            let other = if leaf == i { m + j } else { i };
            let x = left[leaf];
            if x < 0 {
                return None;
            }
            flows[e] = x;
            left[leaf] = 0;
            left[other] -= x;
            degree[i] -= 1;
            degree[m + j] -= 1;
            done += 1;
        }
        if done == before {
            return None;
        }
    }
    if left.iter().any(|&v| v != 0) {
        return None;
    }
    Some(flows)
}

/// Minimum cost over every basic feasible solution, by enumerating all
/// `m + n - 1` subsets of cells.
pub fn enumerate_optimum(inst: &Instance) -> i128 {
    let (m, n) = (inst.m, inst.n);
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best: Option<i128> = None;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        let chosen: Vec<(usize, usize)> = pick.iter().map(|&c| cells[c]).collect();
        if let Some(flows) = basic_flows(inst, &chosen) {
            let z: i128 = chosen
                .iter()
                .zip(&flows)
                .map(|(&(i, j), &x)| inst.costs[i * n + j] as i128 * x as i128)
                .sum();
            best = Some(best.map_or(z, |b| b.min(z)));
        }
        // next k-combination of 0..cells.len()
        let mut p = k;
        while p > 0 && pick[p - 1] == cells.len() - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        pick[p - 1] += 1;
        for q in p..k {
            pick[q] = pick[q - 1] + 1;
        }
    }
    best.expect("a balanced instance has a basic feasible solution")
}

/// Exact row and column sums, non-negative integer flows, `m + n - 1`
/// acyclic basic edges and a matching objective.
pub fn check_outcome(inst: &Instance, out: &SolveOutcome) -> Result<(), String> {
    let (m, n) = (inst.m, inst.n);
    let mut rows = vec![0i128; m];
    let mut cols = vec![0i128; n];
    let mut z = 0i128;
    for e in &out.solution.entries {
        if e.flow < 0 {
            return Err(format!("negative flow at ({}, {})", e.source, e.destination));
        }
        rows[e.source] += e.flow as i128;
        cols[e.destination] += e.flow as i128;
        z += inst.costs[e.source * n + e.destination] as i128 * e.flow as i128;
    }
    for (i, (&row, &a)) in rows.iter().zip(&inst.supplies).enumerate() {
        if row != a as i128 {
            return Err(format!("row {i} sums to {row} instead of {a}"));
        }
    }
    for (j, (&col, &b)) in cols.iter().zip(&inst.demands).enumerate() {
        if col != b as i128 {
            return Err(format!("column {j} sums to {col} instead of {b}"));
        }
    }
    if z != out.report.objective {
        return Err(format!("reported objective {} but flows cost {z}", out.report.objective));
    }
    let edges: Vec<(usize, usize, i64)> = out.basis.edges().collect();
    if edges.len() != m + n - 1 {
        return Err(format!("{} basic edges, expected {}", edges.len(), m + n - 1));
    }
    let mut uf = UnionFind::new(m + n);
    for &(i, j, x) in &edges {
        if x < 0 {
            return Err(format!("negative basic flow at ({i}, {j})"));
        }
        if !uf.union(i, m + j) {
            return Err(format!("basic edge ({i}, {j}) closes a cycle"));
        }
    }
    let mut dense = vec![0i64; m * n];
    for &(i, j, x) in &edges {
        dense[i * n + j] = x;
    }
    for e in &out.solution.entries {
        if e.flow > 0 && dense[e.source * n + e.destination] != e.flow {
            return Err(format!("solution entry ({}, {}) is not basic", e.source, e.destination));
        }
    }
    Ok(())
}

/// Duals of a spanning tree (`u_0 = 0`) by breadth-first search over its
/// edges.
pub fn tree_duals(inst: &Instance, edges: &[(usize, usize, i64)]) -> (Vec<i64>, Vec<i64>) {
    let (m, n) = (inst.m, inst.n);
    let mut adj = vec![Vec::new(); m + n];
    for &(i, j, _) in edges {
        adj[i].push(m + j);
        adj[m + j].push(i);
    }
    let mut pot: Vec<Option<i64>> = vec![None; m + n];
    pot[0] = Some(0);
    let mut queue = VecDeque::from([0]);
    while let Some(a) = queue.pop_front() {
        for &b in &adj[a] {
            if pot[b].is_none() {
                let (i, j) = if a < m { (a, b - m) } else { (b, a - m) };
                let c = inst.costs[i * n + j];
                pot[b] = Some(c - pot[a].unwrap());
                queue.push_back(b);
            }
        }
    }
    let pot: Vec<i64> = pot.into_iter().map(|p| p.expect("tree is spanning")).collect();
    (pot[..m].to_vec(), pot[m..].to_vec())
}

/// Full reduced-cost sweep: every cell non-negative, basic cells zero.
pub fn certify_basis(inst: &Instance, tree: &BasisTree) -> Result<(), String> {
    let edges: Vec<(usize, usize, i64)> = tree.edges().collect();
    let (u, v) = tree_duals(inst, &edges);
    let n = inst.n;
    for &(i, j, _) in &edges {
        if inst.costs[i * n + j] - u[i] - v[j] != 0 {
            return Err(format!("basic cell ({i}, {j}) has nonzero reduced cost"));
        }
    }
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            let r = inst.costs[i * n + j] - ui - vj;
            if r < 0 {
                return Err(format!("cell ({i}, {j}) has reduced cost {r}"));
            }
        }
    }
    Ok(())
}

/// A random spanning tree of the bipartite graph with random flows, a
/// fraction `zero_prob` of them zero; the instance masses are derived from
/// the flows.
pub fn random_basis(rng: &mut impl Rng, m: usize, n: usize, zero_prob: f64) -> (Instance, BasisTree) {
    let mut order: Vec<usize> = (1..m).chain(m + 1..m + n).collect();
    order.shuffle(rng);
    let mut placed_src = vec![0usize];
    let mut placed_dst = vec![m];
    let mut edges = vec![(0usize, 0usize)];
    for node in order {
        if node < m {
            let d = placed_dst[rng.gen_range(0..placed_dst.len())];
            edges.push((node, d - m));
            placed_src.push(node);
        } else {
            let s = placed_src[rng.gen_range(0..placed_src.len())];
            edges.push((s, node - m));
            placed_dst.push(node);
        }
    }
    let with_flow: Vec<(usize, usize, i64)> = edges
        .into_iter()
        .map(|(i, j)| (i, j, if rng.gen_bool(zero_prob) { 0 } else { rng.gen_range(1..20) }))
        .collect();
    let mut supplies = vec![0i64; m];
    let mut demands = vec![0i64; n];
    for &(i, j, x) in &with_flow {
        supplies[i] += x;
        demands[j] += x;
    }
    let costs = (0..m * n).map(|_| rng.gen_range(1..50)).collect();
    let inst = Instance::new(supplies, demands, costs).expect("derived masses are balanced");
    let tree = BasisTree::from_edges(m, n, &with_flow).expect("random tree is spanning");
    (inst, tree)
}

/// Would raising non-basic `(i, j)` be blocked? Walks the tree path from
/// source `i` to destination `j` found by breadth-first search and looks
/// for a zero flow at an odd position.
pub fn path_blocked(tree: &BasisTree, i: usize, j: usize) -> bool {
    let m = tree.m();
    let nodes = m + tree.n();
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); nodes];
    for (p, q, x) in tree.edges() {
        adj[p].push((m + q, x));
        adj[m + q].push((p, x));
    }
    let mut prev: Vec<Option<(usize, i64)>> = vec![None; nodes];
    let mut seen = vec![false; nodes];
    seen[i] = true;
    let mut queue = VecDeque::from([i]);
    while let Some(a) = queue.pop_front() {
        for &(b, x) in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                prev[b] = Some((a, x));
                queue.push_back(b);
            }
        }
    }
    let mut flows = Vec::new();
    let mut at = m + j;
    while let Some((p, x)) = prev[at] {
        flows.push(x);
        at = p;
    }
    flows.reverse();
    flows.iter().step_by(2).any(|&x| x == 0)
}
