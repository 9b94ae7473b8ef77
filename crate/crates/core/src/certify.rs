//! Optimality certificates for arbitrary flow solutions.
//!
//! A feasible solution is reduced to an acyclic support without changing
//! its cost (a support cycle of nonzero cost already proves it is not
//! optimal), completed to a spanning tree with zero edges, and then moved
//! through degenerate Bland pivots. Either the duals of some basis of the
//! same solution are dual feasible (optimal), or a non-basic cell with a
//! negative reduced cost admits a positive step (not optimal).

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::basis::{BasisTree, CyclePath, Multipliers};
use crate::instance::{FlowSolution, Instance, SolutionError};
use crate::netsimplex::{self, BlandEnd};

/// Evidence that a feasible solution is not optimal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Cell `(source, destination)` has a negative reduced cost under the
    /// duals of a basis of the solution, and raising it moves flow.
    ReducedCost {
        source: usize,
        destination: usize,
        reduced_cost: i64,
    },
    /// A cycle in the support; shifting one unit in the improving direction
    /// changes the cost by `cost_change < 0`. Cells alternate between
    /// gaining and losing flow, starting with the first.
    Cycle { cells: Vec<(usize, usize)>, cost_change: i64 },
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("infeasible solution: {0}")]
    Infeasible(#[from] SolutionError),
    #[error("solution is not optimal: {0:?}")]
    NotOptimal(Witness),
}

/// Proof of optimality: dual multipliers with non-negative reduced costs
/// that vanish on the support of the solution.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub objective: i128,
    pub multipliers: Multipliers,
}

/// First cell in row-major order with a negative reduced cost.
pub fn negative_reduced_cost(inst: &Instance, mult: &Multipliers) -> Option<(usize, usize, i64)> {
    let n = inst.n;
    for i in 0..inst.m {
        let ui = mult.u[i];
        let row = inst.cost_row(i);
        if let Some(j) = (0..n).find(|&j| row[j] - ui - mult.v[j] < 0) {
            return Some((i, j, row[j] - ui - mult.v[j]));
        }
    }
    None
}

/// Full reduced-cost sweep over the duals of `tree`.
pub fn optimality_witness(inst: &Instance, tree: &BasisTree) -> Option<(usize, usize, i64)> {
    negative_reduced_cost(inst, &tree.compute_multipliers(inst))
}

/// Checks that `solution` is feasible and optimal for `inst`.
pub fn verify(inst: &Instance, solution: &FlowSolution) -> Result<Certificate, VerifyError> {
    inst.check_feasible(solution)?;
    let objective = inst.objective(solution)?;
    let mut support: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for e in &solution.entries {
        if e.flow > 0 {
            *support.entry((e.source, e.destination)).or_default() += e.flow;
        }
    }
    while let Some(cycle) = find_cycle(inst, &support) {
        cancel_cycle(inst, &mut support, &cycle)?;
    }
    let mut tree = complete_basis(inst, &support);
    let mut mult = tree.compute_multipliers(inst);
    let mut path = CyclePath::new();
    let mut z = objective;
    let out = netsimplex::bland_until_improvement(inst, &mut tree, &mut mult, &mut path, &mut z, None, false);
    match out.end {
        BlandEnd::Optimal => Ok(Certificate {
            objective,
            multipliers: mult,
        }),
        BlandEnd::Improving {
            entering: (i, j),
            reduced_cost,
            ..
        } => Err(VerifyError::NotOptimal(Witness::ReducedCost {
            source: i,
            destination: j,
            reduced_cost,
        })),
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(len: usize) -> Self {
        UnionFind((0..len).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

/// A support cycle as the closing cell followed by the forest path from its
/// source to its destination.
fn find_cycle(inst: &Instance, support: &BTreeMap<(usize, usize), i64>) -> Option<Vec<(usize, usize)>> {
    let m = inst.m;
    let mut uf = UnionFind::new(m + inst.n);
    let mut adj: Vec<Vec<(usize, (usize, usize))>> = vec![Vec::new(); m + inst.n];
    for &(i, j) in support.keys() {
        if uf.union(i, m + j) {
            adj[i].push((m + j, (i, j)));
            adj[m + j].push((i, (i, j)));
            continue;
        }
        let mut prev: Vec<Option<(usize, (usize, usize))>> = vec![None; m + inst.n];
        let mut queue = VecDeque::from([i]);
        let mut seen = vec![false; m + inst.n];
        seen[i] = true;
        while let Some(x) = queue.pop_front() {
            if x == m + j {
                break;
            }
            for &(y, cell) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, cell));
                    queue.push_back(y);
                }
            }
        }
        let mut cells = Vec::new();
        let mut x = m + j;
        while let Some((p, cell)) = prev[x] {
            cells.push(cell);
            x = p;
        }
        cells.push((i, j));
        cells.reverse();
        // cells: (i, j), then the path from j back to i; reorder to run from i
        let closing = cells.remove(0);
        cells.reverse();
        cells.insert(0, closing);
        return Some(cells);
    }
    None
}

/// Shifts flow around a support cycle. Nonzero cost proves non-optimality;
/// otherwise some cell drops out of the support.
fn cancel_cycle(
    inst: &Instance,
    support: &mut BTreeMap<(usize, usize), i64>,
    cycle: &[(usize, usize)],
) -> Result<(), VerifyError> {
    // cycle[0] gains, then cells alternate losing and gaining
    let delta: i64 = cycle
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| if k % 2 == 0 { inst.cost(i, j) } else { -inst.cost(i, j) })
        .sum();
    if delta != 0 {
        let cells = if delta < 0 {
            cycle.to_vec()
        } else {
            let mut c = cycle[1..].to_vec();
            c.push(cycle[0]);
            c
        };
        return Err(VerifyError::NotOptimal(Witness::Cycle {
            cells,
            cost_change: -delta.abs(),
        }));
    }
    let t = cycle.iter().skip(1).step_by(2).map(|c| support[c]).min().unwrap_or(0);
    for (k, c) in cycle.iter().enumerate() {
        let x = support.get_mut(c).expect("cycle cell outside support");
        if k % 2 == 0 {
            *x += t;
        } else {
            *x -= t;
        }
    }
    support.retain(|_, x| *x > 0);
    Ok(())
}

/// Spanning tree over an acyclic support, padded with zero cells in
/// row-major order.
fn complete_basis(inst: &Instance, support: &BTreeMap<(usize, usize), i64>) -> BasisTree {
    let (m, n) = (inst.m, inst.n);
    let mut uf = UnionFind::new(m + n);
    let mut edges: Vec<(usize, usize, i64)> = Vec::with_capacity(m + n - 1);
    for (&(i, j), &x) in support {
        uf.union(i, m + j);
        edges.push((i, j, x));
    }
    'outer: for i in 0..m {
        for j in 0..n {
            if edges.len() == m + n - 1 {
                break 'outer;
            }
            if uf.union(i, m + j) {
                edges.push((i, j, 0));
            }
        }
    }
    BasisTree::from_edges(m, n, &edges).expect("completed support is a spanning tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::tests::example_basis;
    use crate::instance::tests::example3;

    #[test]
    fn optimal_example_is_certified() {
        let inst = example3();
        let sol = FlowSolution::from_triples(&[(0, 1, 30), (1, 0, 20), (1, 1, 10), (2, 1, 10), (2, 2, 20)]);
        let cert = verify(&inst, &sol).unwrap();
        assert_eq!(cert.objective, 110);
        for i in 0..3 {
            for j in 0..3 {
                assert!(cert.multipliers.reduced_cost(&inst, i, j) >= 0);
            }
        }
    }

    #[test]
    fn initial_example_gets_witness() {
        let inst = example3();
        let err = verify(&inst, &example_basis().solution()).unwrap_err();
        match err {
            VerifyError::NotOptimal(Witness::ReducedCost {
                source,
                destination,
                reduced_cost,
            }) => assert_eq!((source, destination, reduced_cost), (1, 0, -4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_is_rejected() {
        let inst = example3();
        let sol = FlowSolution::from_triples(&[(0, 1, 30), (1, 0, 20), (1, 1, 10), (2, 1, 10), (2, 2, 19)]);
        assert!(matches!(verify(&inst, &sol), Err(VerifyError::Infeasible(_))));
    }

    #[test]
    fn cyclic_support() {
        // all costs 1: every feasible solution is optimal
        let inst = Instance::from_rows(vec![2, 2], vec![2, 2], &[vec![1, 1], vec![1, 1]]).unwrap();
        let sol = FlowSolution::from_triples(&[(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)]);
        assert_eq!(verify(&inst, &sol).unwrap().objective, 4);
        // diagonal is cheaper: the four-cycle is an improving cycle
        let inst = Instance::from_rows(vec![2, 2], vec![2, 2], &[vec![1, 3], vec![3, 1]]).unwrap();
        match verify(&inst, &sol) {
            Err(VerifyError::NotOptimal(Witness::Cycle { cells, cost_change })) => {
                assert_eq!(cost_change, -4);
                assert_eq!(cells.len(), 4);
                assert!(cells[0] == (0, 0) || cells[0] == (1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_optimum_needs_pivots() {
        // the zero completion x12 prices negative, but the optimum holds
        let inst = Instance::from_rows(vec![0, 2], vec![1, 1], &[vec![5, 1], vec![1, 5]]).unwrap();
        let sol = FlowSolution::from_triples(&[(1, 0, 1), (1, 1, 1)]);
        assert_eq!(verify(&inst, &sol).unwrap().objective, 6);
    }
}
