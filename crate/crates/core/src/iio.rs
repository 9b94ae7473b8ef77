//! Iterated Inside Out.
//!
//! Each macro-iteration computes the multipliers of the current basis
//! once, then
//!
//! * **Phase 1** walks the candidate cells with negative reduced cost and
//!   pushes as much flow as possible around each one's cycle without
//!   changing the basis. The pushed variable is set aside together with the
//!   amount it took from its source and destination, so the tree stays a
//!   basic feasible solution of the shrunk instance. Basic edges may drop to
//!   zero and rise again; none of them leaves.
//! * **Phase 2** puts the set-aside variables back one at a time, restoring
//!   the masses, and pivots each one into the basis (or lets it vanish) by
//!   the sign of its alternating cycle cost in the current tree.
//!
//! The candidate set is a global shortlist of the cheapest cells until a
//! macro-iteration finds no negative reduced cost there; from then on every
//! cell is priced. A macro-iteration that leaves the objective and the basis
//! unchanged hands over to Bland-rule network simplex pivots until the
//! objective strictly drops.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::basis::{BasisError, BasisTree, CyclePath, Multipliers};
use crate::certify;
use crate::coloring::{Admissibility, ColorForest};
use crate::init::{self, InitMethod};
use crate::instance::{FlowSolution, Instance, InstanceError};
use crate::netsimplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// IIO with the colored spanning tree filtering Phase-1 candidates.
    #[default]
    IioPlus,
    /// IIO without coloring.
    IioMinus,
    /// The first-negative-reduced-cost network simplex baseline.
    NetworkSimplex,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::IioPlus => "iio+",
            Variant::IioMinus => "iio-",
            Variant::NetworkSimplex => "ns",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "iio+" | "iioplus" | "iio-plus" => Ok(Variant::IioPlus),
            "iio-" | "iiominus" | "iio-minus" => Ok(Variant::IioMinus),
            "ns" | "ns-bdcs" | "simplex" => Ok(Variant::NetworkSimplex),
            other => Err(format!("unknown variant `{other}` (expected iio+, iio- or ns)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub variant: Variant,
    pub init: InitMethod,
    /// Shortlist size; `None` means `10 * (m + n)`.
    pub alpha: Option<usize>,
    /// Stop after this many macro-iterations (network simplex: pivots).
    pub max_macro_iterations: Option<u64>,
    /// Carried through to reports only.
    pub seed: Option<u64>,
    /// Record every pivot in [`SolveOutcome::trace`].
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            variant: Variant::IioPlus,
            init: InitMethod::Mmr,
            alpha: None,
            max_macro_iterations: None,
            seed: None,
            trace: false,
        }
    }
}

impl SolveOptions {
    pub fn new(variant: Variant) -> Self {
        SolveOptions {
            variant,
            ..Self::default()
        }
    }

    pub fn with_init(mut self, init: InitMethod) -> Self {
        self.init = init;
        self
    }

    pub fn with_alpha(mut self, alpha: usize) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn alpha_for(&self, inst: &Instance) -> usize {
        self.alpha.unwrap_or(10 * (inst.m + inst.n)).max(1)
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    Instance(#[from] InstanceError),
    #[error("invalid starting basis: {0}")]
    Basis(#[from] BasisError),
    #[error("starting basis is infeasible: {0}")]
    Infeasible(String),
    #[error("alpha must be at least 1")]
    BadAlpha,
}

/// Counters and averages of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveReport {
    pub objective: i128,
    pub optimal: bool,
    pub pivots_total: u64,
    pub pivots_phase1: u64,
    pub pivots_phase2: u64,
    /// Network simplex pivots: the anti-cycling fallback of IIO, or every
    /// pivot of the baseline.
    pub pivots_simplex: u64,
    pub macro_iterations: u64,
    pub avg_path_length_phase1: f64,
    pub avg_path_length_phase2: f64,
    pub avg_path_length_simplex: f64,
    pub avg_colored_nodes_phase1: f64,
    pub avg_involved_nodes_phase2: f64,
    /// Smallest count of strictly positive variables seen at the end of a
    /// Phase 1 that executed at least one push (0 if none did).
    pub min_positive_after_phase1: u64,
    pub wall_time: Duration,
}

/// Raw sums behind the report averages.
#[derive(Debug, Clone, Default)]
pub(crate) struct Stats {
    pub phase1_pivots: u64,
    pub phase2_pivots: u64,
    pub simplex_pivots: u64,
    pub macro_iterations: u64,
    pub phase1_path_nodes: u64,
    pub phase2_path_nodes: u64,
    pub simplex_path_nodes: u64,
    pub phase1_recolored: u64,
    pub phase2_involved: u64,
    pub min_positive: Option<u64>,
}

fn ratio(sum: u64, count: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum as f64 / count as f64
    }
}

impl Stats {
    pub(crate) fn report(&self, objective: i128, optimal: bool, wall_time: Duration) -> SolveReport {
        SolveReport {
            objective,
            optimal,
            pivots_total: self.phase1_pivots + self.phase2_pivots + self.simplex_pivots,
            pivots_phase1: self.phase1_pivots,
            pivots_phase2: self.phase2_pivots,
            pivots_simplex: self.simplex_pivots,
            macro_iterations: self.macro_iterations,
            avg_path_length_phase1: ratio(self.phase1_path_nodes, self.phase1_pivots),
            avg_path_length_phase2: ratio(self.phase2_path_nodes, self.phase2_pivots),
            avg_path_length_simplex: ratio(self.simplex_path_nodes, self.simplex_pivots),
            avg_colored_nodes_phase1: ratio(self.phase1_recolored, self.phase1_pivots),
            avg_involved_nodes_phase2: ratio(self.phase2_involved, self.phase2_pivots),
            min_positive_after_phase1: self.min_positive.unwrap_or(0),
            wall_time,
        }
    }
}

/// One recorded step of a traced run (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// Start of a macro-iteration, after pricing.
    MacroStart { index: u64, objective: i128 },
    /// A Phase-1 push of `amount` onto non-basic `(i, j)`.
    Phase1Push {
        entering: (usize, usize),
        amount: i64,
        objective: i128,
    },
    /// End of Phase 1.
    Phase1End {
        objective: i128,
        positive_variables: u64,
        pushed: usize,
    },
    /// Reinsertion of a set-aside variable. `leaving` is `None` when the
    /// variable dropped to zero and the basis was kept.
    Phase2Pivot {
        entering: (usize, usize),
        cycle_cost: i64,
        leaving: Option<(usize, usize)>,
        value: i64,
        objective: i128,
    },
    /// A network simplex pivot (anti-cycling fallback or baseline).
    SimplexPivot {
        entering: (usize, usize),
        leaving: (usize, usize),
        amount: i64,
        objective: i128,
    },
}

/// Final basis, flows and statistics of a run.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub basis: BasisTree,
    pub solution: FlowSolution,
    pub report: SolveReport,
    pub trace: Vec<TraceEvent>,
}

/// The cheapest `alpha` cells, sorted by `(cost, row, column)`.
#[derive(Debug, Clone)]
pub struct Shortlist {
    pub alpha: usize,
    entries: Vec<(u32, u32)>,
    pub exhausted: bool,
}

impl Shortlist {
    pub fn new(inst: &Instance, alpha: usize) -> Self {
        let cells = inst.m * inst.n;
        let take = alpha.min(cells);
        let key = |k: usize| (inst.costs[k], k);
        let mut idx: Vec<usize> = (0..cells).collect();
        if take < cells {
            idx.select_nth_unstable_by_key(take, |&k| key(k));
            idx.truncate(take);
        }
        idx.sort_unstable_by_key(|&k| key(k));
        Shortlist {
            alpha,
            entries: idx
                .into_iter()
                .map(|k| ((k / inst.n) as u32, (k % inst.n) as u32))
                .collect(),
            exhausted: false,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().map(|&(i, j)| (i as usize, j as usize))
    }
}

/// A variable raised in Phase 1: `amount` was taken from source `i` and
/// destination `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddedVariable {
    pub source: usize,
    pub destination: usize,
    pub amount: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scan {
    Shortlist,
    All,
}

/// Mutable state of one IIO run.
pub struct IioSolver<'a> {
    inst: &'a Instance,
    tree: BasisTree,
    mult: Multipliers,
    /// Working supplies/demands of the shrunk instance.
    supply_left: Vec<i64>,
    demand_left: Vec<i64>,
    shortlist: Shortlist,
    forest: Option<ColorForest>,
    path: CyclePath,
    objective: i128,
    stats: Stats,
    trace: Option<Vec<TraceEvent>>,
}

/// What a macro-iteration did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroStep {
    /// A full pricing found no negative reduced cost.
    Optimal,
    /// Phase 1 and Phase 2 ran; `pushed` variables were reinserted.
    Progress { pushed: usize },
}

impl<'a> IioSolver<'a> {
    /// Starts from a feasible basis of `inst`.
    pub fn new(inst: &'a Instance, tree: BasisTree, options: &SolveOptions) -> Result<Self, SolveError> {
        inst.validate()?;
        if options.alpha == Some(0) {
            return Err(SolveError::BadAlpha);
        }
        if tree.m() != inst.m || tree.n() != inst.n {
            return Err(SolveError::Infeasible("basis dimensions do not match the instance".into()));
        }
        tree.check_conservation(&inst.supplies, &inst.demands)
            .map_err(SolveError::Infeasible)?;
        let objective = tree.objective(inst);
        let forest = (options.variant == Variant::IioPlus).then(|| ColorForest::build(&tree));
        Ok(IioSolver {
            inst,
            mult: tree.compute_multipliers(inst),
            supply_left: inst.supplies.clone(),
            demand_left: inst.demands.clone(),
            shortlist: Shortlist::new(inst, options.alpha_for(inst)),
            forest,
            path: CyclePath::new(),
            objective,
            stats: Stats::default(),
            trace: options.trace.then(Vec::new),
            tree,
        })
    }

    pub fn tree(&self) -> &BasisTree {
        &self.tree
    }

    pub fn objective(&self) -> i128 {
        self.objective
    }

    pub fn multipliers(&self) -> &Multipliers {
        &self.mult
    }

    pub fn shortlist(&self) -> &Shortlist {
        &self.shortlist
    }

    pub fn working_masses(&self) -> (&[i64], &[i64]) {
        (&self.supply_left, &self.demand_left)
    }

    fn record(&mut self, event: impl FnOnce() -> TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(event());
        }
    }

    /// Recomputes the multipliers of the current basis.
    pub fn price(&mut self) {
        self.tree.compute_multipliers_into(self.inst, &mut self.mult);
    }

    /// One macro-iteration: pricing, Phase 1, Phase 2.
    pub fn macro_iteration(&mut self) -> MacroStep {
        self.price();
        let index = self.stats.macro_iterations;
        let objective = self.objective;
        self.record(|| TraceEvent::MacroStart { index, objective });
        let mut scan = if self.shortlist.exhausted { Scan::All } else { Scan::Shortlist };
        let (log, negatives) = loop {
            let (log, negatives) = self.phase1_scan(scan);
            if negatives > 0 || scan == Scan::All {
                break (log, negatives);
            }
            self.shortlist.exhausted = true;
            scan = Scan::All;
        };
        if negatives == 0 {
            return MacroStep::Optimal;
        }
        self.stats.macro_iterations += 1;
        let pushed = log.len();
        self.phase2(&log);
        MacroStep::Progress { pushed }
    }

    /// Phase 1 over the current candidate set (the shortlist unless it has
    /// been exhausted).
    pub fn phase1(&mut self) -> Vec<AddedVariable> {
        let scan = if self.shortlist.exhausted { Scan::All } else { Scan::Shortlist };
        self.phase1_scan(scan).0
    }

    /// Returns the log and the number of negative reduced costs met.
    fn phase1_scan(&mut self, scan: Scan) -> (Vec<AddedVariable>, usize) {
        let mut log = Vec::new();
        let mut negatives = 0;
        match scan {
            Scan::Shortlist => {
                for k in 0..self.shortlist.entries.len() {
                    let (i, j) = self.shortlist.entries[k];
                    let (i, j) = (i as usize, j as usize);
                    let r = self.mult.reduced_cost(self.inst, i, j);
                    if r < 0 {
                        negatives += 1;
                        self.try_push(i, j, r, &mut log);
                    }
                }
            }
            Scan::All => {
                let n = self.inst.n;
                for i in 0..self.inst.m {
                    let ui = self.mult.u[i];
                    for j in 0..n {
                        let r = self.inst.costs[i * n + j] - ui - self.mult.v[j];
                        if r < 0 {
                            negatives += 1;
                            self.try_push(i, j, r, &mut log);
                        }
                    }
                }
            }
        }
        if !log.is_empty() {
            let positives =
                (1..self.tree.node_count()).filter(|&s| self.tree.flow(s) > 0).count() as u64 + log.len() as u64;
            self.stats.min_positive = Some(self.stats.min_positive.map_or(positives, |p| p.min(positives)));
            let objective = self.objective;
            let pushed = log.len();
            self.record(|| TraceEvent::Phase1End {
                objective,
                positive_variables: positives,
                pushed,
            });
        }
        (log, negatives)
    }

    /// Pushes flow onto non-basic `(i, j)` with reduced cost `r < 0` if the
    /// push moves a positive amount.
    fn try_push(&mut self, i: usize, j: usize, r: i64, log: &mut Vec<AddedVariable>) {
        if let Some(forest) = &self.forest {
            if forest.admissible(&self.tree, i, j) != Admissibility::Admissible {
                return;
            }
        }
        self.tree.find_path_into(i, j, &mut self.path);
        let (k, _) = self.tree.max_increase(&self.path);
        if k == 0 {
            return;
        }
        debug_assert_eq!(self.tree.cycle_cost(self.inst, &self.path), r);
        self.tree.apply_flow_change(&self.path, k);
        let mut recolored = 0;
        if let Some(forest) = self.forest.as_mut() {
            for (step, &s) in self.path.edge_slots().iter().enumerate() {
                let x = self.tree.flow(s);
                if CyclePath::is_odd_step(step) {
                    if x == 0 {
                        recolored += forest.on_edge_became_degenerate(&self.tree, s);
                    }
                } else if x == k {
                    recolored += forest.on_edge_became_positive(&self.tree, s);
                }
            }
        }
        self.supply_left[i] -= k;
        self.demand_left[j] -= k;
        self.objective += r as i128 * k as i128;
        self.stats.phase1_pivots += 1;
        self.stats.phase1_path_nodes += self.path.node_count() as u64;
        self.stats.phase1_recolored += recolored as u64;
        log.push(AddedVariable {
            source: i,
            destination: j,
            amount: k,
        });
        let objective = self.objective;
        self.record(|| TraceEvent::Phase1Push {
            entering: (i, j),
            amount: k,
            objective,
        });
    }

    /// Reinserts the Phase-1 variables in the order they were added.
    pub fn phase2(&mut self, log: &[AddedVariable]) {
        for add in log {
            self.reinsert(add);
        }
        assert!(
            self.supply_left == self.inst.supplies && self.demand_left == self.inst.demands,
            "working masses do not reconcile after phase 2"
        );
        if let Some(forest) = self.forest.as_mut() {
            forest.rebuild(&self.tree);
        }
        debug_assert!(self.tree.check_structure().is_ok());
        debug_assert_eq!(self.objective, self.tree.objective(self.inst));
    }

    fn reinsert(&mut self, add: &AddedVariable) {
        let (h, l, gamma) = (add.source, add.destination, add.amount);
        assert!(gamma > 0, "set-aside variable with non-positive amount");
        self.supply_left[h] += gamma;
        self.demand_left[l] += gamma;
        self.tree.find_path_into(h, l, &mut self.path);
        let delta = self.tree.cycle_cost(self.inst, &self.path);
        let (leaving, value, involved) = if delta <= 0 {
            let (k, at) = self.tree.max_increase(&self.path);
            let out = self.tree.edge_of(self.path.edge_slot(at));
            self.tree.apply_flow_change(&self.path, k);
            self.objective += delta as i128 * k as i128;
            let involved = self.tree.pivot_exchange(&self.path, gamma + k, at);
            (Some(out), gamma + k, involved)
        } else {
            let (t, at) = self.tree.max_decrease(&self.path);
            if gamma <= t {
                self.tree.apply_flow_change(&self.path, -gamma);
                self.objective -= delta as i128 * gamma as i128;
                (None, 0, 0)
            } else {
                let out = self.tree.edge_of(self.path.edge_slot(at));
                self.tree.apply_flow_change(&self.path, -t);
                self.objective -= delta as i128 * t as i128;
                let involved = self.tree.pivot_exchange(&self.path, gamma - t, at);
                (Some(out), gamma - t, involved)
            }
        };
        self.stats.phase2_pivots += 1;
        self.stats.phase2_path_nodes += self.path.node_count() as u64;
        self.stats.phase2_involved += involved as u64;
        let objective = self.objective;
        self.record(|| TraceEvent::Phase2Pivot {
            entering: (h, l),
            cycle_cost: delta,
            leaving,
            value,
            objective,
        });
    }

    /// One macro-iteration, followed by Bland-rule simplex pivots if it
    /// left the objective and the basis unchanged.
    pub fn step(&mut self) -> MacroStep {
        let before_objective = self.objective;
        let before_parents = self.tree.parents().to_vec();
        let step = self.macro_iteration();
        if step != MacroStep::Optimal
            && self.objective == before_objective
            && self.tree.parents() == before_parents.as_slice()
            && self.anticycle()
        {
            return MacroStep::Optimal;
        }
        step
    }

    /// Runs macro-iterations until optimality (or the iteration cap).
    pub fn run(mut self, max_macro_iterations: Option<u64>) -> SolveOutcome {
        let start = Instant::now();
        let optimal = loop {
            if max_macro_iterations.is_some_and(|cap| self.stats.macro_iterations >= cap) {
                self.price();
                break certify::negative_reduced_cost(self.inst, &self.mult).is_none();
            }
            if self.step() == MacroStep::Optimal {
                break true;
            }
        };
        self.finish(optimal, start.elapsed())
    }

    /// Network simplex pivots run by the anti-cycling fallback so far.
    pub fn simplex_pivots(&self) -> u64 {
        self.stats.simplex_pivots
    }

    /// Bland-rule simplex pivots until the objective strictly drops.
    /// Returns true if optimality was proven instead.
    fn anticycle(&mut self) -> bool {
        let out = netsimplex::bland_until_improvement(
            self.inst,
            &mut self.tree,
            &mut self.mult,
            &mut self.path,
            &mut self.objective,
            self.trace.as_mut(),
            true,
        );
        self.stats.simplex_pivots += out.pivots;
        self.stats.simplex_path_nodes += out.path_nodes;
        if let Some(forest) = self.forest.as_mut() {
            forest.rebuild(&self.tree);
        }
        out.end == netsimplex::BlandEnd::Optimal
    }

    pub fn finish(self, optimal: bool, wall_time: Duration) -> SolveOutcome {
        debug_assert_eq!(self.objective, self.tree.objective(self.inst));
        SolveOutcome {
            solution: self.tree.solution(),
            report: self.stats.report(self.objective, optimal, wall_time),
            trace: self.trace.unwrap_or_default(),
            basis: self.tree,
        }
    }
}

/// Solves with IIO from the heuristic basis chosen in `options`.
pub fn solve(inst: &Instance, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    inst.validate()?;
    let start = Instant::now();
    let tree = options.init.build(inst);
    let mut out = solve_from(inst, tree, options)?;
    out.report.wall_time = start.elapsed();
    Ok(out)
}

/// Solves with IIO from a given feasible basis.
pub fn solve_from(inst: &Instance, tree: BasisTree, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    IioSolver::new(inst, tree, options).map(|s| s.run(options.max_macro_iterations))
}

/// Convenience: the default heuristic basis for a variant's options.
pub fn initial_basis(inst: &Instance, options: &SolveOptions) -> BasisTree {
    init::InitMethod::build(options.init, inst)
}
