//! Mild-solution time stepping and the fixed-point machinery for nonlocal problems.

mod diagnostics;
mod picard;
mod stepping;

pub use diagnostics::{benilan_gap, transversality_check, BenilanReport, Shell};
pub use picard::{
    approximation_family, constant_guess, continuation_sweep, solve_nonlocal, uniqueness_probe, BranchPoint,
    FamilyMember, FamilyReport, GapRow, NonlocalSolution, Problem, SolveReport, SolverConfig, SweepReport,
    UniquenessReport,
};
pub use stepping::{cauchy_solve, sigma_apply, CauchySolution, Stepper};
