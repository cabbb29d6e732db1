//! Independent reference implementations used to validate the spectral solver.
//!
//! Wherever possible these use finite differences in space, a different
//! discretization from the solver, so agreement between the two is evidence
//! rather than a tautology.

mod closed_form;
mod fd;
mod manufactured;
mod mol;

pub use closed_form::{linear_periodic_closed_form, CLOSED_FORM_REFINEMENT};
pub use fd::{expm_apply, expm_pade13, FdOperator, MAX_ORACLE_N};
pub use manufactured::{manufacture, ManufacturedProfile};
pub use mol::mol_solve;
