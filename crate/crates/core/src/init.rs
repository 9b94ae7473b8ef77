//! Initial basic feasible solutions: North-West Corner, Matrix Minimum
//! Rule and Vogel's Approximation.
//!
//! All three heuristics share one allocation rule: every allocation closes
//! exactly one line (row or column) except the last, which closes both.
//! That yields exactly `m + n - 1` allocations forming a spanning tree.
//! When an allocation empties its row and its column at once while other
//! lines remain open, the column is closed and the row stays open with
//! nothing left; NWC then continues to the right, while MMR and VAM
//! immediately place a zero allocation at the cheapest open cell of that
//! row.

use std::fmt;
use std::str::FromStr;

use crate::basis::BasisTree;
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMethod {
    Nwc,
    #[default]
    Mmr,
    Vam,
}

impl InitMethod {
    pub fn build(self, inst: &Instance) -> BasisTree {
        match self {
            InitMethod::Nwc => north_west_corner(inst),
            InitMethod::Mmr => matrix_minimum_rule(inst),
            InitMethod::Vam => vogel_approximation(inst),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitMethod::Nwc => "nwc",
            InitMethod::Mmr => "mmr",
            InitMethod::Vam => "vam",
        }
    }
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nwc" => Ok(InitMethod::Nwc),
            "mmr" => Ok(InitMethod::Mmr),
            "vam" | "va" => Ok(InitMethod::Vam),
            other => Err(format!("unknown initial basis `{other}` (expected nwc, mmr or vam)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Closed {
    Row,
    Column,
    /// Row and column emptied together; the column was closed and the row
    /// is still open with zero mass left.
    ColumnKeepingEmptyRow,
    Both,
}

struct Allocator<'a> {
    inst: &'a Instance,
    row_left: Vec<i64>,
    col_left: Vec<i64>,
    row_open: Vec<bool>,
    col_open: Vec<bool>,
    open_rows: usize,
    open_cols: usize,
    edges: Vec<(usize, usize, i64)>,
}

impl<'a> Allocator<'a> {
    fn new(inst: &'a Instance) -> Self {
        Allocator {
            inst,
            row_left: inst.supplies.clone(),
            col_left: inst.demands.clone(),
            row_open: vec![true; inst.m],
            col_open: vec![true; inst.n],
            open_rows: inst.m,
            open_cols: inst.n,
            edges: Vec::with_capacity(inst.m + inst.n - 1),
        }
    }

    fn done(&self) -> bool {
        self.open_rows == 0
    }

    fn allocate(&mut self, i: usize, j: usize) -> Closed {
        debug_assert!(self.row_open[i] && self.col_open[j]);
        let x = self.row_left[i].min(self.col_left[j]);
        self.row_left[i] -= x;
        self.col_left[j] -= x;
        self.edges.push((i, j, x));
        let (r, c) = (self.row_left[i], self.col_left[j]);
        if self.open_rows == 1 && self.open_cols == 1 {
            debug_assert!(r == 0 && c == 0, "instance is not balanced");
            self.close_row(i);
            self.close_col(j);
            Closed::Both
        } else if r == 0 && (c > 0 || self.open_cols == 1) {
            self.close_row(i);
            Closed::Row
        } else if c == 0 && (r > 0 || self.open_rows == 1) {
            self.close_col(j);
            Closed::Column
        } else {
            self.close_col(j);
            Closed::ColumnKeepingEmptyRow
        }
    }

    /// Allocates at `(i, j)` and, on simultaneous exhaustion, keeps filling
    /// row `i` with zero allocations at its cheapest open cells until the
    /// row closes.
    fn allocate_then_close_row(&mut self, i: usize, j: usize) {
        let mut col = j;
        while self.allocate(i, col) == Closed::ColumnKeepingEmptyRow {
            col = self.cheapest_open_in_row(i);
        }
    }

    fn cheapest_open_in_row(&self, i: usize) -> usize {
        let row = self.inst.cost_row(i);
        (0..self.inst.n)
            .filter(|&j| self.col_open[j])
            .min_by_key(|&j| (row[j], j))
            .expect("an open row always has an open column")
    }

    fn close_row(&mut self, i: usize) {
        self.row_open[i] = false;
        self.open_rows -= 1;
    }

    fn close_col(&mut self, j: usize) {
        self.col_open[j] = false;
        self.open_cols -= 1;
    }

    fn finish(self) -> BasisTree {
        debug_assert_eq!(self.open_cols, 0);
        BasisTree::from_edges(self.inst.m, self.inst.n, &self.edges)
            .expect("allocation rule always yields a spanning tree")
    }
}

/// North-West Corner rule.
pub fn north_west_corner(inst: &Instance) -> BasisTree {
    let mut alloc = Allocator::new(inst);
    let (mut i, mut j) = (0, 0);
    loop {
        match alloc.allocate(i, j) {
            Closed::Row => i += 1,
            Closed::Column | Closed::ColumnKeepingEmptyRow => j += 1,
            Closed::Both => break,
        }
    }
    alloc.finish()
}

/// Row-major cell indices sorted by `(cost, row, column)`.
pub(crate) fn cells_by_cost(inst: &Instance) -> Vec<usize> {
    let cells = inst.m * inst.n;
    let max_cost = inst.costs.iter().copied().max().unwrap_or(0);
    if cells <= u32::MAX as usize && max_cost <= u32::MAX as i64 {
        // pack (cost, index) into one key; much faster to sort
        let mut keys: Vec<u64> = inst
            .costs
            .iter()
            .enumerate()
            .map(|(k, &c)| ((c as u64) << 32) | k as u64)
            .collect();
        keys.sort_unstable();
        keys.into_iter().map(|k| (k & 0xffff_ffff) as usize).collect()
    } else {
        let mut idx: Vec<usize> = (0..cells).collect();
        idx.sort_unstable_by_key(|&k| (inst.costs[k], k));
        idx
    }
}

/// Matrix Minimum Rule: cheapest cell first, ties in row-major order.
pub fn matrix_minimum_rule(inst: &Instance) -> BasisTree {
    let mut alloc = Allocator::new(inst);
    let n = inst.n;
    for cell in cells_by_cost(inst) {
        if alloc.done() {
            break;
        }
        let (i, j) = (cell / n, cell % n);
        if alloc.row_open[i] && alloc.col_open[j] {
            alloc.allocate_then_close_row(i, j);
        }
    }
    alloc.finish()
}

/// Cursor over a line's cells in cost order that lazily skips closed
/// cross-lines; tracks the cheapest and second cheapest open cells.
struct LineCursor {
    first: usize,
    second: usize,
}

/// Vogel's Approximation Method.
///
/// Penalty of an open line is the gap between its two cheapest open cells
/// (0 when a single cell remains). The line with the largest penalty is
/// served at its cheapest open cell; ties prefer rows, then lower indices.
pub fn vogel_approximation(inst: &Instance) -> BasisTree {
    let (m, n) = (inst.m, inst.n);
    let row_order: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            let mut v: Vec<u32> = (0..n as u32).collect();
            v.sort_unstable_by_key(|&j| (inst.cost(i, j as usize), j));
            v
        })
        .collect();
    let col_order: Vec<Vec<u32>> = (0..n)
        .map(|j| {
            let mut v: Vec<u32> = (0..m as u32).collect();
            v.sort_unstable_by_key(|&i| (inst.cost(i as usize, j), i));
            v
        })
        .collect();
    let mut row_cur: Vec<LineCursor> = (0..m).map(|_| LineCursor { first: 0, second: 1 }).collect();
    let mut col_cur: Vec<LineCursor> = (0..n).map(|_| LineCursor { first: 0, second: 1 }).collect();

    // Advances a cursor past closed cells; returns (cheapest, second) positions.
    fn refresh(cur: &mut LineCursor, order: &[u32], open: &[bool]) -> (usize, Option<usize>) {
        while !open[order[cur.first] as usize] {
            cur.first += 1;
        }
        if cur.second <= cur.first {
            cur.second = cur.first + 1;
        }
        while cur.second < order.len() && !open[order[cur.second] as usize] {
            cur.second += 1;
        }
        (cur.first, (cur.second < order.len()).then_some(cur.second))
    }

    let mut alloc = Allocator::new(inst);
    while !alloc.done() {
        // (penalty, is_row, index, cheapest cross index)
        let mut best: Option<(i64, usize, usize)> = None;
        let mut best_is_row = false;
        for i in (0..m).filter(|&i| alloc.row_open[i]) {
            let (a, b) = refresh(&mut row_cur[i], &row_order[i], &alloc.col_open);
            let ja = row_order[i][a] as usize;
            let pen = b.map_or(0, |b| inst.cost(i, row_order[i][b] as usize) - inst.cost(i, ja));
            if best.is_none_or(|(p, _, _)| pen > p) {
                best = Some((pen, i, ja));
                best_is_row = true;
            }
        }
        for j in (0..n).filter(|&j| alloc.col_open[j]) {
            let (a, b) = refresh(&mut col_cur[j], &col_order[j], &alloc.row_open);
            let ia = col_order[j][a] as usize;
            let pen = b.map_or(0, |b| inst.cost(col_order[j][b] as usize, j) - inst.cost(ia, j));
            if best.is_none_or(|(p, _, _)| pen > p) {
                best = Some((pen, j, ia));
                best_is_row = false;
            }
        }
        let (_, line, cross) = best.expect("open lines remain");
        let (i, j) = if best_is_row { (line, cross) } else { (cross, line) };
        alloc.allocate_then_close_row(i, j);
    }
    alloc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::tests::is_spanning_tree;
    use crate::instance::tests::example3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_basis(inst: &Instance, tree: &BasisTree) {
        let edges: Vec<_> = tree.edges().collect();
        assert!(is_spanning_tree(inst.m, inst.n, &edges));
        assert!(edges.iter().all(|e| e.2 >= 0));
        tree.check_structure().unwrap();
        tree.check_conservation(&inst.supplies, &inst.demands).unwrap();
    }

    #[test]
    fn nwc_on_example() {
        let inst = example3();
        let tree = north_west_corner(&inst);
        check_basis(&inst, &tree);
        assert_eq!(tree.sorted_edges(), vec![(0, 0, 20), (0, 1, 10), (1, 1, 30), (2, 1, 10), (2, 2, 20)]);
        assert_eq!(tree.objective(&inst), 190);
    }

    #[test]
    fn nwc_trivial_and_degenerate() {
        let inst = Instance::from_rows(vec![5], vec![5], &[vec![3]]).unwrap();
        assert_eq!(north_west_corner(&inst).sorted_edges(), vec![(0, 0, 5)]);

        let inst = Instance::from_rows(vec![1, 1], vec![1, 1], &[vec![1, 2], vec![3, 4]]).unwrap();
        let tree = north_west_corner(&inst);
        check_basis(&inst, &tree);
        assert_eq!(tree.sorted_edges(), vec![(0, 0, 1), (0, 1, 0), (1, 1, 1)]);
    }

    #[test]
    fn mmr_on_example() {
        let inst = example3();
        let tree = matrix_minimum_rule(&inst);
        check_basis(&inst, &tree);
        assert_eq!(tree.sorted_edges(), vec![(0, 1, 30), (1, 0, 20), (1, 1, 10), (2, 1, 10), (2, 2, 20)]);
        assert_eq!(tree.objective(&inst), 110);
    }

    #[test]
    fn mmr_without_ties_is_greedy() {
        // strictly increasing costs row-major
        let inst = Instance::from_rows(vec![4, 6], vec![3, 3, 4], &[vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        let tree = matrix_minimum_rule(&inst);
        check_basis(&inst, &tree);
        // greedy: (0,0)=3, (0,1)=1, (1,1)=2, (1,2)=4
        assert_eq!(tree.sorted_edges(), vec![(0, 0, 3), (0, 1, 1), (1, 1, 2), (1, 2, 4)]);
    }

    #[test]
    fn vam_on_example() {
        let inst = example3();
        let tree = vogel_approximation(&inst);
        check_basis(&inst, &tree);
        // hand execution: row 1 (penalty 4, rows win ties) -> (1,2)=30; column 1 (5) -> (2,1)=20;
        // row 2 (4) -> (2,2)=10; row 3 -> (3,2)=10; (3,3)=20
        assert_eq!(tree.sorted_edges(), vec![(0, 1, 30), (1, 0, 20), (1, 1, 10), (2, 1, 10), (2, 2, 20)]);
        assert_eq!(tree.objective(&inst), 110);
    }

    #[test]
    fn vam_single_row() {
        let inst = Instance::from_rows(vec![10], vec![2, 3, 5], &[vec![4, 1, 9]]).unwrap();
        let tree = vogel_approximation(&inst);
        check_basis(&inst, &tree);
        assert_eq!(tree.sorted_edges(), vec![(0, 0, 2), (0, 1, 3), (0, 2, 5)]);
    }

    #[test]
    fn zero_mass_lines_still_span() {
        let inst = Instance::from_rows(
            vec![0, 4, 0],
            vec![0, 2, 2, 0],
            &[vec![1, 2, 3, 4], vec![5, 1, 2, 7], vec![3, 3, 3, 0]],
        )
        .unwrap();
        for method in [InitMethod::Nwc, InitMethod::Mmr, InitMethod::Vam] {
            check_basis(&inst, &method.build(&inst));
        }
        let inst = Instance::from_rows(vec![0, 0], vec![0, 0], &[vec![1, 2], vec![3, 4]]).unwrap();
        for method in [InitMethod::Nwc, InitMethod::Mmr, InitMethod::Vam] {
            check_basis(&inst, &method.build(&inst));
        }
    }

    #[test]
    fn random_instances_give_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut mmr_better = 0;
        for _ in 0..200 {
            let inst = crate::gen::uniform(10, 10, 1000, 10, rng.gen());
            let nwc = north_west_corner(&inst);
            let mmr = matrix_minimum_rule(&inst);
            let vam = vogel_approximation(&inst);
            for t in [&nwc, &mmr, &vam] {
                check_basis(&inst, t);
            }
            if mmr.objective(&inst) <= nwc.objective(&inst) {
                mmr_better += 1;
            }
            assert_eq!(matrix_minimum_rule(&inst), mmr);
        }
        assert!(mmr_better >= 180, "MMR beat NWC only {mmr_better}/200 times");
    }

    #[test]
    fn degenerate_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let (m, n) = (rng.gen_range(1..8), rng.gen_range(1..8));
            let inst = crate::gen::uniform(m, n, 3, 4, rng.gen());
            for method in [InitMethod::Nwc, InitMethod::Mmr, InitMethod::Vam] {
                check_basis(&inst, &method.build(&inst));
            }
        }
    }

    #[test]
    fn parse_method() {
        assert_eq!("MMR".parse::<InitMethod>(), Ok(InitMethod::Mmr));
        assert!("tmr".parse::<InitMethod>().is_err());
    }
}
