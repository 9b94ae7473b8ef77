//! Network simplex on the transportation basis.
//!
//! The baseline prices cells in row-major order starting just after the
//! previous entering cell and takes the first negative reduced cost. After
//! `m + n` consecutive degenerate pivots it switches to Bland's rule
//! (smallest row-major entering cell, smallest row-major leaving edge among
//! ties) until a pivot moves flow again.

use std::time::Instant;

use crate::basis::{BasisTree, CyclePath, LeavingRule, Multipliers};
use crate::certify;
use crate::iio::{SolveError, SolveOptions, SolveOutcome, Stats, TraceEvent};
use crate::instance::Instance;

/// How a Bland sequence ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlandEnd {
    Optimal,
    /// `entering` has a negative reduced cost and a positive step.
    Improving {
        entering: (usize, usize),
        reduced_cost: i64,
        amount: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlandOutcome {
    pub pivots: u64,
    pub path_nodes: u64,
    pub end: BlandEnd,
}

/// Pivots `(i, j)` into the basis with reduced cost `r`. Returns the step
/// amount and the leaving edge.
pub(crate) fn pivot(
    tree: &mut BasisTree,
    path: &mut CyclePath,
    (i, j): (usize, usize),
    r: i64,
    rule: LeavingRule,
    objective: &mut i128,
) -> (i64, (usize, usize)) {
    tree.find_path_into(i, j, path);
    let (k, at) = tree.max_increase_by(path, rule);
    let leaving = tree.edge_of(path.edge_slot(at));
    tree.apply_flow_change(path, k);
    tree.pivot_exchange(path, k, at);
    *objective += r as i128 * k as i128;
    (k, leaving)
}

/// Bland-rule pivots from the current basis until one of them moves flow or
/// no reduced cost is negative. With `apply_improving == false` the first
/// improving pivot is only reported, not executed.
pub(crate) fn bland_until_improvement(
    inst: &Instance,
    tree: &mut BasisTree,
    mult: &mut Multipliers,
    path: &mut CyclePath,
    objective: &mut i128,
    mut trace: Option<&mut Vec<TraceEvent>>,
    apply_improving: bool,
) -> BlandOutcome {
    let mut pivots = 0;
    let mut path_nodes = 0;
    loop {
        tree.compute_multipliers_into(inst, mult);
        let Some((i, j, r)) = certify::negative_reduced_cost(inst, mult) else {
            return BlandOutcome {
                pivots,
                path_nodes,
                end: BlandEnd::Optimal,
            };
        };
        if !apply_improving {
            tree.find_path_into(i, j, path);
            let (k, _) = tree.max_increase_by(path, LeavingRule::SmallestIndex);
            if k > 0 {
                return BlandOutcome {
                    pivots,
                    path_nodes,
                    end: BlandEnd::Improving {
                        entering: (i, j),
                        reduced_cost: r,
                        amount: k,
                    },
                };
            }
        }
        let (k, leaving) = pivot(tree, path, (i, j), r, LeavingRule::SmallestIndex, objective);
        pivots += 1;
        path_nodes += path.node_count() as u64;
        if let Some(t) = trace.as_mut() {
            t.push(TraceEvent::SimplexPivot {
                entering: (i, j),
                leaving,
                amount: k,
                objective: *objective,
            });
        }
        if k > 0 {
            return BlandOutcome {
                pivots,
                path_nodes,
                end: BlandEnd::Improving {
                    entering: (i, j),
                    reduced_cost: r,
                    amount: k,
                },
            };
        }
    }
}

/// First negative reduced cost in row-major order starting at `from`,
/// wrapping around.
fn rotating_scan(inst: &Instance, mult: &Multipliers, from: usize) -> Option<(usize, usize, i64)> {
    let n = inst.n;
    let cells = inst.m * n;
    let (mut i, mut j) = (from / n, from % n);
    for _ in 0..cells {
        let r = inst.costs[i * n + j] - mult.u[i] - mult.v[j];
        if r < 0 {
            return Some((i, j, r));
        }
        j += 1;
        if j == n {
            j = 0;
            i += 1;
            if i == inst.m {
                i = 0;
            }
        }
    }
    None
}

/// Solves with the network simplex baseline from the heuristic basis chosen
/// in `options`.
pub fn solve(inst: &Instance, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    inst.validate()?;
    let start = Instant::now();
    let tree = options.init.build(inst);
    let mut out = solve_from(inst, tree, options)?;
    out.report.wall_time = start.elapsed();
    Ok(out)
}

/// Solves with the network simplex baseline from a feasible basis.
/// `max_macro_iterations` caps the number of pivots.
pub fn solve_from(inst: &Instance, mut tree: BasisTree, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    inst.validate()?;
    if tree.m() != inst.m || tree.n() != inst.n {
        return Err(SolveError::Infeasible("basis dimensions do not match the instance".into()));
    }
    tree.check_conservation(&inst.supplies, &inst.demands)
        .map_err(SolveError::Infeasible)?;
    let mut objective = tree.objective(inst);
    let mut mult = tree.compute_multipliers(inst);
    let mut path = CyclePath::new();
    let mut stats = Stats::default();
    let mut trace = options.trace.then(Vec::new);
    let stall_limit = (inst.m + inst.n) as u64;
    let mut stalled = 0u64;
    let mut cursor = 0;
    let optimal = loop {
        tree.compute_multipliers_into(inst, &mut mult);
        if options.max_macro_iterations.is_some_and(|cap| stats.simplex_pivots >= cap) {
            break certify::negative_reduced_cost(inst, &mult).is_none();
        }
        if stalled >= stall_limit {
            let out = bland_until_improvement(inst, &mut tree, &mut mult, &mut path, &mut objective, trace.as_mut(), true);
            stats.simplex_pivots += out.pivots;
            stats.simplex_path_nodes += out.path_nodes;
            stalled = 0;
            match out.end {
                BlandEnd::Optimal => break true,
                BlandEnd::Improving { entering: (i, j), .. } => cursor = (i * inst.n + j + 1) % (inst.m * inst.n),
            }
            continue;
        }
        let Some((i, j, r)) = rotating_scan(inst, &mult, cursor) else {
            break true;
        };
        let (k, leaving) = pivot(&mut tree, &mut path, (i, j), r, LeavingRule::NearestSource, &mut objective);
        stats.simplex_pivots += 1;
        stats.simplex_path_nodes += path.node_count() as u64;
        if let Some(t) = trace.as_mut() {
            t.push(TraceEvent::SimplexPivot {
                entering: (i, j),
                leaving,
                amount: k,
                objective,
            });
        }
        stalled = if k == 0 { stalled + 1 } else { 0 };
        cursor = (i * inst.n + j + 1) % (inst.m * inst.n);
    };
    debug_assert_eq!(objective, tree.objective(inst));
    Ok(SolveOutcome {
        solution: tree.solution(),
        report: stats.report(objective, optimal, start.elapsed()),
        trace: trace.unwrap_or_default(),
        basis: tree,
    })
}
