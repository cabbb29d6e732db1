//! Mild solutions of semilinear heat equations `u_t = u_xx + h(t, x, u)` on an
//! interval with homogeneous Dirichlet data and a nonlocal-in-time initial
//! condition `u(0) = g(u)`, together with the verification machinery around them.
//!
//! The spatial operator is diagonalized exactly by a discrete sine transform, so
//! the semigroup and the exponential integrators act mode by mode. Nonlocal
//! problems are solved by Picard iteration on the map that sends a trajectory
//! `u` to the mild solution started from `g(u)`.

pub mod checks;
pub mod error;
pub mod halfline;
pub mod lp_space;
pub mod nemytskii;
pub mod nonlocal;
pub mod oracle;
pub mod sampling;
pub mod semigroup;
pub mod solver;
pub mod trajectory;

pub use checks::{CheckReport, Witness};
pub use error::{Error, Result};
pub use halfline::{extend_periodic, verify_mild_extension, ExtendedTrajectory, ExtensionReport};
pub use lp_space::{duality_pairing, lp_norm, upper_semi_inner, Domain1D, GridFunction};
pub use nemytskii::{Claims, Exponents, Forcing, Growth, Nonlinearity};
pub use nonlocal::{NonlocalCondition, ScalarMap, TimeProfile};
pub use sampling::SampleSpec;
pub use semigroup::{smoothing_constant, SpectralOperator};
pub use solver::{
    approximation_family, cauchy_solve, continuation_sweep, sigma_apply, solve_nonlocal, uniqueness_probe, Problem,
    SolverConfig, Stepper,
};
pub use trajectory::{TimeGrid, Trajectory};
