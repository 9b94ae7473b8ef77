//! Balanced transportation problem solvers.
//!
//! [`iio`] implements the Iterated Inside Out algorithm (with and without
//! the colored spanning tree of [`coloring`]); [`netsimplex`] is a network
//! simplex baseline. Both share the basis tree of [`basis`] and the starting
//! heuristics of [`init`].

pub mod basis;
pub mod certify;
pub mod coloring;
pub mod gen;
pub mod iio;
pub mod init;
pub mod instance;
pub mod netsimplex;

pub use basis::BasisTree;
pub use iio::{SolveError, SolveOptions, SolveOutcome, SolveReport, Variant};
pub use init::InitMethod;
pub use instance::{FlowSolution, Instance};

/// Solves `inst` with the variant selected in `options`.
pub fn solve(inst: &Instance, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    match options.variant {
        Variant::IioPlus | Variant::IioMinus => iio::solve(inst, options),
        Variant::NetworkSimplex => netsimplex::solve(inst, options),
    }
}

/// Solves `inst` from a given feasible basis.
pub fn solve_from(inst: &Instance, tree: BasisTree, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    match options.variant {
        Variant::IioPlus | Variant::IioMinus => iio::solve_from(inst, tree, options),
        Variant::NetworkSimplex => netsimplex::solve_from(inst, tree, options),
    }
}
