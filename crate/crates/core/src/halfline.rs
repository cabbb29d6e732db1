//! Periodic extension of a `[0, T]` solution to the half line.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp_space::{lp_norm_unchecked, GridFunction};
use crate::nemytskii::Nonlinearity;
use crate::semigroup::SpectralOperator;
use crate::solver::{cauchy_solve, Stepper};
use crate::trajectory::TimeGrid;
use crate::trajectory::Trajectory;

/// Logical view `u_ext(t) = base(t - (m - 1) T)` for `t` in `[(m - 1) T, m T)`.
///
/// Grid index `j` resolves to base index `j mod M`, so `u_ext(t + T) = u_ext(t)`
/// holds bit-for-bit on every grid point; `u_ext(m T)` is `base(0)`.
#[derive(Debug, Clone)]
pub struct ExtendedTrajectory {
    base: Trajectory,
    n_periods: usize,
    gluing_residual: f64,
    tolerance: f64,
}

impl ExtendedTrajectory {
    pub fn base(&self) -> &Trajectory {
        &self.base
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn period(&self) -> f64 {
        self.base.horizon()
    }

    pub fn gluing_residual(&self) -> f64 {
        self.gluing_residual
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Number of grid intervals covered, `n_periods * M`.
    pub fn n_steps(&self) -> usize {
        self.n_periods * self.base.n_steps()
    }

    pub fn time(&self, j: usize) -> f64 {
        let m = self.base.n_steps();
        (j / m) as f64 * self.period() + self.base.time(j % m)
    }

    /// Snapshot at global grid index `j`; indices beyond `n_periods * M` keep wrapping.
    pub fn at(&self, j: usize) -> &GridFunction {
        self.base.snapshot(j % self.base.n_steps())
    }
}

/// Wraps `base` as a `T`-periodic trajectory on `n_periods` periods, provided
/// `||base(0) - base(T)||_p <= tol_glue`.
pub fn extend_periodic(base: &Trajectory, n_periods: usize, tol_glue: f64, p: f64) -> Result<ExtendedTrajectory> {
    if n_periods == 0 {
        return Err(Error::InvalidConfig("n_periods must be positive".into()));
    }
    let diff = base.first().axpy(-1.0, base.last())?;
    let residual = lp_norm_unchecked(diff.values(), base.domain().dx(), p);
    if !(residual <= tol_glue) {
        return Err(Error::NotPeriodic { residual, tolerance: tol_glue });
    }
    Ok(ExtendedTrajectory { base: base.clone(), n_periods, gluing_residual: residual, tolerance: tol_glue })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionReport {
    /// `sup ||resolve(t) - u_ext(t)||_p` over `[0, T]` and `[T, 2T]`.
    pub deviation_by_period: [f64; 2],
    pub deviation: f64,
    /// Step-doubling estimate of the base discretization error on `[0, T]`.
    pub error_estimate: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// `max_j ||u_ext(t_j + T) - u_ext(t_j)||_p` over the extension; zero by construction.
    pub periodicity_defect: f64,
}

/// Re-solves the Cauchy problem from `u_ext(0)` over `[0, 2T]` with `2M` steps and
/// compares with the wrapped view.
///
/// Passes when the deviation is at most five times the step-doubling error
/// estimate of the base discretization, plus `1e-12 (1 + sup ||u||_p)` for roundoff.
pub fn verify_mild_extension(
    ext: &ExtendedTrajectory,
    h: &Nonlinearity,
    op: &SpectralOperator,
    stepper: Stepper,
    p: f64,
) -> Result<ExtensionReport> {
    let period = ext.period();
    if !h.claims().is_periodic_with(period) {
        return Err(Error::InvalidConfig(format!(
            "nonlinearity {} is not declared {period}-periodic in t",
            h.name()
        )));
    }
    let base = ext.base();
    let m = base.n_steps();
    let dx = base.domain().dx();
    let dist = |a: &GridFunction, b: &GridFunction| {
        let d: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
        lp_norm_unchecked(&d, dx, p)
    };

    let two = TimeGrid::new(2.0 * period, 2 * m)?;
    let resolve = cauchy_solve(ext.at(0), h, op, two, stepper, None)?.trajectory;
    let mut by_period = [0.0_f64; 2];
    for j in 0..=2 * m {
        let k = if j == 0 { 0 } else { (j - 1) / m };
        by_period[k] = by_period[k].max(dist(resolve.snapshot(j), ext.at(j)));
    }

    let coarse = cauchy_solve(ext.at(0), h, op, *base.grid(), stepper, None)?.trajectory;
    let fine = cauchy_solve(ext.at(0), h, op, TimeGrid::new(period, 2 * m)?, stepper, None)?.trajectory;
    let diff = (0..=m).map(|j| dist(coarse.snapshot(j), fine.snapshot(2 * j))).fold(0.0, f64::max);
    let r = 2f64.powi(stepper.order() as i32);
    let error_estimate = diff * r / (r - 1.0);

    let mut periodicity_defect = 0.0_f64;
    for j in 0..ext.n_steps().saturating_sub(m) {
        periodicity_defect = periodicity_defect.max(dist(ext.at(j + m), ext.at(j)));
    }

    let deviation = by_period[0].max(by_period[1]);
    let tolerance = 5.0 * error_estimate + 1e-12 * (1.0 + base.sup_norm(p));
    Ok(ExtensionReport {
        deviation_by_period: by_period,
        deviation,
        error_estimate,
        tolerance,
        pass: deviation <= tolerance,
        periodicity_defect,
    })
}
