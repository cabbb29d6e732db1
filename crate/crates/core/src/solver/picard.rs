//! Damped Picard iteration on the fixed-point operator `Sigma_n`, the smoothed
//! approximation family `P_n`, and the homotopy sweep in `lambda`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stepping::{sigma_apply, Stepper};
use crate::error::{Error, Result};
use crate::lp_space::GridFunction;
use crate::nemytskii::Nonlinearity;
use crate::nonlocal::NonlocalCondition;
use crate::semigroup::SpectralOperator;
use crate::trajectory::{TimeGrid, Trajectory};

/// Everything that defines one nonlocal problem on a fixed discretization.
#[derive(Debug, Clone)]
pub struct Problem {
    pub nonlinearity: Nonlinearity,
    pub condition: NonlocalCondition,
    pub operator: SpectralOperator,
    pub grid: TimeGrid,
    /// Exponent of the state space `L^p`; all norms in reports use it.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Working radius `R`, with `r_inner < r_ball < r_outer`.
    pub r_ball: f64,
    pub r_inner: f64,
    /// Barrier `R_0`; an iterate reaching it aborts the solve.
    pub r_outer: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Damping `omega` in `(0, 1]`.
    pub relaxation: f64,
    /// `n` of `P_n`; `None` solves the limit problem.
    pub smoothing_n: Option<u32>,
    pub stepper: Stepper,
    /// Homotopy parameter in `[0, 1]`.
    pub lambda: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            r_ball: 10.0,
            r_inner: 0.0,
            r_outer: 100.0,
            picard_tol: 1e-10,
            picard_max_iter: 500,
            relaxation: 1.0,
            smoothing_n: None,
            stepper: Stepper::ExponentialEuler,
            lambda: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.r_inner >= 0.0 && self.r_inner < self.r_ball && self.r_ball < self.r_outer) {
            return bad("radii must satisfy 0 <= r_inner < r_ball < r_outer");
        }
        if !(self.picard_tol > 0.0) {
            return bad("picard_tol must be positive");
        }
        if self.picard_max_iter == 0 {
            return bad("picard_max_iter must be positive");
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return bad("relaxation must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda must lie in [0, 1]");
        }
        if self.smoothing_n == Some(0) {
            return bad("smoothing_n must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// `sup_j ||Sigma(u^k)(t_j) - u^k(t_j)||_p` per iteration.
    pub residual_history: Vec<f64>,
    /// `sup_j ||u^k(t_j)||_p` per iteration.
    pub occupancy_history: Vec<f64>,
    pub sup_norm: f64,
    pub r_ball: f64,
    pub r_outer: f64,
    pub within_ball: bool,
}

impl SolveReport {
    /// Largest ratio of consecutive residuals from the second iteration on,
    /// ignoring residuals at roundoff level.
    pub fn contraction_factor(&self) -> Option<f64> {
        let floor = 1e-13 * self.sup_norm.max(1e-300);
        self.residual_history
            .windows(2)
            .skip(1)
            .filter(|w| w[0] > floor && w[1] > floor)
            .map(|w| w[1] / w[0])
            .reduce(f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct NonlocalSolution {
    pub trajectory: Trajectory,
    pub report: SolveReport,
}

/// Solves `u = Sigma_n(u, lambda)` by `u^{k+1} = (1 - omega) u^k + omega Sigma_n(u^k)`.
///
/// The accepted trajectory is the last iterate `u^k` whose fixed-point
/// residual is at most `picard_tol`.
pub fn solve_nonlocal(
    problem: &Problem,
    config: &SolverConfig,
    initial_guess: Option<&Trajectory>,
) -> Result<NonlocalSolution> {
    config.validate()?;
    let op = &problem.operator;
    let p = problem.p;
    let mut u = match initial_guess {
        Some(g) => {
            if g.domain() != op.domain() || *g.grid() != problem.grid {
                return Err(Error::InvalidConfig("initial guess does not match the problem grid".into()));
            }
            g.clone()
        }
        None => Trajectory::zeros(*op.domain(), problem.grid),
    };
    let mut residuals = Vec::new();
    let mut occupancy = Vec::new();
    let mut norm = u.sup_norm(p);
    if norm >= config.r_outer {
        return Err(Error::BallExit { iteration: 0, norm, r_outer: config.r_outer, residual_history: residuals });
    }

    for k in 0..config.picard_max_iter {
        occupancy.push(norm);
        let s = sigma_apply(
            &u,
            config.lambda,
            config.smoothing_n,
            &problem.nonlinearity,
            &problem.condition,
            op,
            config.stepper,
        )?;
        let res = s.sup_distance(&u, p)?;
        if !res.is_finite() {
            return Err(Error::NonFiniteValue { context: "Picard residual", value: res });
        }
        residuals.push(res);
        if res <= config.picard_tol {
            let report = SolveReport {
                iterations: k,
                converged: true,
                residual_history: residuals,
                occupancy_history: occupancy,
                sup_norm: norm,
                r_ball: config.r_ball,
                r_outer: config.r_outer,
                within_ball: norm <= config.r_ball,
            };
            return Ok(NonlocalSolution { trajectory: u, report });
        }
        u = if config.relaxation == 1.0 { s } else { u.combine(1.0 - config.relaxation, &s, config.relaxation)? };
        norm = u.sup_norm(p);
        if !norm.is_finite() {
            return Err(Error::NonFiniteValue { context: "Picard iterate", value: norm });
        }
        if norm >= config.r_outer {
            return Err(Error::BallExit {
                iteration: k + 1,
                norm,
                r_outer: config.r_outer,
                residual_history: residuals,
            });
        }
    }
    let last_residual = residuals.last().copied().unwrap_or(f64::NAN);
    Err(Error::MaxIterExceeded {
        iterations: config.picard_max_iter,
        last_residual,
        residual_history: residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyMember {
    pub n: u32,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub sup_norm: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub n: u32,
    pub n_next: u32,
    /// `sup_t ||u_n(t) - u_{n_next}(t)||_p`; `None` when either member failed.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub members: Vec<FamilyMember>,
    pub cauchy_table: Vec<GapRow>,
    /// Gaps below this level are indistinguishable from Picard tolerance.
    pub gap_slack: f64,
    pub nonincreasing: bool,
    /// Row indices whose gap exceeds the previous row's by more than `gap_slack`.
    pub violations: Vec<usize>,
    #[serde(skip)]
    pub trajectories: Vec<Option<Trajectory>>,
}

/// Solves `P_n` for every `n` in `n_list` (independently, in parallel) and
/// tabulates the gaps between consecutive members.
pub fn approximation_family(problem: &Problem, config: &SolverConfig, n_list: &[u32]) -> Result<FamilyReport> {
    config.validate()?;
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n_list must be strictly increasing positive integers".into()));
    }
    let results: Vec<Result<NonlocalSolution>> = n_list
        .par_iter()
        .map(|&n| {
            let cfg = SolverConfig { smoothing_n: Some(n), ..config.clone() };
            solve_nonlocal(problem, &cfg, None)
        })
        .collect();

    let mut members = Vec::with_capacity(n_list.len());
    let mut trajectories = Vec::with_capacity(n_list.len());
    for (&n, r) in n_list.iter().zip(results) {
        match r {
            Ok(sol) => {
                members.push(FamilyMember {
                    n,
                    converged: true,
                    iterations: Some(sol.report.iterations),
                    sup_norm: Some(sol.report.sup_norm),
                    error: None,
                });
                trajectories.push(Some(sol.trajectory));
            }
            Err(e) => {
                members.push(FamilyMember { n, converged: false, iterations: None, sup_norm: None, error: Some(e.to_string()) });
                trajectories.push(None);
            }
        }
    }

    let mut table = Vec::new();
    for i in 0..n_list.len().saturating_sub(1) {
        let gap = match (&trajectories[i], &trajectories[i + 1]) {
            (Some(a), Some(b)) => Some(a.sup_distance(b, problem.p)?),
            _ => None,
        };
        table.push(GapRow { n: n_list[i], n_next: n_list[i + 1], gap });
    }
    let gap_slack = 10.0 * config.picard_tol / config.relaxation;
    let violations: Vec<usize> = (1..table.len())
        .filter(|&i| match (table[i - 1].gap, table[i].gap) {
            (Some(a), Some(b)) => b > a + gap_slack,
            _ => false,
        })
        .collect();
    Ok(FamilyReport {
        members,
        cauchy_table: table,
        gap_slack,
        nonincreasing: violations.is_empty(),
        violations,
        trajectories,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub sup_norm: Option<f64>,
    pub below_outer: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub branch: Vec<BranchPoint>,
    pub max_occupancy: f64,
    pub r_outer: f64,
    /// Every point converged strictly inside `r_outer`.
    pub pass: bool,
    /// Sup norms are nondecreasing along the branch (up to Picard tolerance).
    pub monotone_growth: bool,
}

/// Tracks fixed points of `Sigma_n(., lambda)` along `lambda_grid`, warm-starting
/// each solve from the previous point.
pub fn continuation_sweep(problem: &Problem, config: &SolverConfig, lambda_grid: &[f64]) -> Result<SweepReport> {
    config.validate()?;
    if lambda_grid.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(Error::InvalidConfig("lambda grid values must lie in [0, 1]".into()));
    }
    let mut branch: Vec<BranchPoint> = Vec::with_capacity(lambda_grid.len());
    let mut warm: Option<Trajectory> = None;
    for &lambda in lambda_grid {
        let cfg = SolverConfig { lambda, ..config.clone() };
        match solve_nonlocal(problem, &cfg, warm.as_ref()) {
            Ok(sol) => {
                let sup = sol.report.sup_norm;
                branch.push(BranchPoint {
                    lambda,
                    converged: true,
                    iterations: Some(sol.report.iterations),
                    sup_norm: Some(sup),
                    below_outer: sup < config.r_outer,
                    error: None,
                    trajectory: Some(sol.trajectory.clone()),
                });
                warm = Some(sol.trajectory);
            }
            Err(e) => branch.push(BranchPoint {
                lambda,
                converged: false,
                iterations: None,
                sup_norm: None,
                below_outer: false,
                error: Some(e.to_string()),
                trajectory: None,
            }),
        }
    }
    let norms: Vec<f64> = branch.iter().filter_map(|b| b.sup_norm).collect();
    let slack = 10.0 * config.picard_tol / config.relaxation;
    Ok(SweepReport {
        max_occupancy: norms.iter().copied().fold(0.0, f64::max),
        r_outer: config.r_outer,
        pass: branch.iter().all(|b| b.converged && b.below_outer),
        monotone_growth: norms.windows(2).all(|w| w[1] + slack >= w[0]),
        branch,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    /// `sup_t ||u(t) - v(t)||_p` between the two converged trajectories.
    pub gap: f64,
    pub threshold: f64,
    pub pass: bool,
    pub iterations: (usize, usize),
    /// Whether the nonlinearity claims monotonicity, without which a nonzero
    /// gap is not a failure of the solver.
    pub monotone_claimed: bool,
    #[serde(skip)]
    pub solutions: (Trajectory, Trajectory),
}

/// Runs [`solve_nonlocal`] from two initial guesses and compares the results.
pub fn uniqueness_probe(
    problem: &Problem,
    config: &SolverConfig,
    guess1: &Trajectory,
    guess2: &Trajectory,
) -> Result<UniquenessReport> {
    let a = solve_nonlocal(problem, config, Some(guess1))?;
    let b = solve_nonlocal(problem, config, Some(guess2))?;
    let gap = a.trajectory.sup_distance(&b.trajectory, problem.p)?;
    let threshold = 10.0 * config.picard_tol;
    Ok(UniquenessReport {
        gap,
        threshold,
        pass: gap <= threshold,
        iterations: (a.report.iterations, b.report.iterations),
        monotone_claimed: problem.nonlinearity.claims().monotone,
        solutions: (a.trajectory, b.trajectory),
    })
}

/// The trajectory `t -> amplitude * profile`, a convenient nonzero initial guess.
pub fn constant_guess(profile: &GridFunction, grid: TimeGrid) -> Trajectory {
    Trajectory::constant(profile, grid)
}
