//! Workflow satisfiability with user-independent counting constraints.
//!
//! * [`model`]: instances, plans, validity and the instance text format.
//! * [`pattern`]: plan equivalence classes and their min-vector encoding.
//! * [`solver`]: the pattern-based FPT search and its heuristics.
//! * [`pb`]: pseudo-Boolean encoding, OPB output and solution decoding.
//! * [`gen`]: seeded random instances and experiment grids.
//! * [`oracle`]: exhaustive reference solvers for testing.
//! * [`bench`]: grid runs with CSV reporting.

pub mod bench;
pub mod cli;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod pattern;
pub mod pb;
pub mod solver;

#[doc(hidden)]
pub mod testing;

pub use model::{Constraint, Plan, StepId, StepSet, UserId, WorkflowInstance};
pub use pattern::{encode, Pattern, PatternSet};
pub use solver::{solve, Outcome, SolveReport, SolverConfig};
