//! Exponential time stepping for the mild formulation, in sine-coefficient space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_space::GridFunction;
use crate::nemytskii::{superpose, Nonlinearity};
use crate::nonlocal::{evaluate_g, NonlocalCondition};
use crate::semigroup::{phi1_weight, phi2_weight, SpectralOperator};
use crate::trajectory::{TimeGrid, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// `u_{j+1} = S(dt) u_j + phi1(dt) F_j`; first order.
    #[default]
    ExponentialEuler,
    /// Cox–Matthews ETD2RK; second order.
    Etd2,
}

impl Stepper {
    pub fn order(self) -> u32 {
        match self {
            Stepper::ExponentialEuler => 1,
            Stepper::Etd2 => 2,
        }
    }
}

/// Per-mode multipliers for one step size.
pub(crate) struct StepWeights {
    decay: Vec<f64>,
    w1: Vec<f64>,
    w2: Vec<f64>,
    smooth: Option<Vec<f64>>,
}

impl StepWeights {
    pub(crate) fn new(op: &SpectralOperator, dt: f64, smoothing_n: Option<u32>) -> Self {
        let lam = op.eigenvalues();
        Self {
            decay: lam.iter().map(|l| (-l * dt).exp()).collect(),
            w1: lam.iter().map(|&l| phi1_weight(l, dt)).collect(),
            w2: lam.iter().map(|&l| phi2_weight(l, dt)).collect(),
            smooth: smoothing_n.map(|n| lam.iter().map(|l| (-l / n as f64).exp()).collect()),
        }
    }

    fn smooth(&self, c: &mut [f64]) {
        if let Some(s) = &self.smooth {
            for (ck, sk) in c.iter_mut().zip(s) {
                *ck *= sk;
            }
        }
    }
}

/// Coefficients of `S(1/n) f(t, u)` (or `f(t, u)` without smoothing).
fn forcing_coeffs(
    op: &SpectralOperator,
    h: &Nonlinearity,
    weights: &StepWeights,
    t: f64,
    u: &GridFunction,
) -> Result<Vec<f64>> {
    if h.is_zero() {
        return Ok(vec![0.0; u.len()]);
    }
    let f = superpose(h, t, u)?;
    let mut c = op.forward(f.values());
    weights.smooth(&mut c);
    Ok(c)
}

fn snapshot(op: &SpectralOperator, coeffs: &[f64], step: usize) -> Result<GridFunction> {
    let values = op.inverse(coeffs);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { step });
    }
    Ok(GridFunction::from_raw(*op.domain(), values))
}

/// Output of [`cauchy_solve`]: the trajectory and the (smoothed) forcing
/// `beta(t_j) = S(1/n) f(t_j, u(t_j))` recorded at every snapshot.
#[derive(Debug, Clone)]
pub struct CauchySolution {
    pub trajectory: Trajectory,
    pub forcing: Trajectory,
}

/// Integrates `u' = A u + S(1/n) f(t, u)`, `u(0) = xi` on `grid`.
pub fn cauchy_solve(
    xi: &GridFunction,
    h: &Nonlinearity,
    op: &SpectralOperator,
    grid: TimeGrid,
    stepper: Stepper,
    smoothing_n: Option<u32>,
) -> Result<CauchySolution> {
    if xi.domain() != op.domain() {
        return Err(Error::DomainMismatch);
    }
    let dt = grid.dt();
    let weights = StepWeights::new(op, dt, smoothing_n);
    let mut coeffs = op.forward(xi.values());
    let mut snaps = Vec::with_capacity(grid.n_steps + 1);
    let mut forcing = Vec::with_capacity(grid.n_steps + 1);
    snaps.push(xi.clone());

    for j in 0..grid.n_steps {
        let t = grid.time(j);
        let fc = forcing_coeffs(op, h, &weights, t, &snaps[j])?;
        forcing.push(GridFunction::from_raw(*op.domain(), op.inverse(&fc)));
        let mut a: Vec<f64> = coeffs
            .iter()
            .zip(&fc)
            .enumerate()
            .map(|(k, (c, f))| weights.decay[k] * c + weights.w1[k] * f)
            .collect();
        if stepper == Stepper::Etd2 && !h.is_zero() {
            let ua = snapshot(op, &a, j + 1)?;
            let fa = forcing_coeffs(op, h, &weights, grid.time(j + 1), &ua)?;
            for k in 0..a.len() {
                a[k] += weights.w2[k] * (fa[k] - fc[k]);
            }
        }
        coeffs = a;
        snaps.push(snapshot(op, &coeffs, j + 1)?);
    }
    let fc = forcing_coeffs(op, h, &weights, grid.horizon, &snaps[grid.n_steps])?;
    forcing.push(GridFunction::from_raw(*op.domain(), op.inverse(&fc)));

    Ok(CauchySolution {
        trajectory: Trajectory::from_raw(grid, snaps),
        forcing: Trajectory::from_raw(grid, forcing),
    })
}

/// One application of the fixed-point operator
/// `Sigma(q, lambda)(t) = lambda S(t) S(1/n) g(q) + lambda int_0^t S(t - s) S(1/n) f(s, q(s)) ds`.
///
/// The forcing is frozen along the input trajectory. The convolution uses the
/// stepper's quadrature: piecewise-constant forcing for exponential Euler,
/// piecewise-linear for ETD2. A fixed point of the exponential-Euler operator
/// is therefore exactly an exponential-Euler trajectory.
pub fn sigma_apply(
    traj: &Trajectory,
    lambda: f64,
    smoothing_n: Option<u32>,
    h: &Nonlinearity,
    cond: &NonlocalCondition,
    op: &SpectralOperator,
    stepper: Stepper,
) -> Result<Trajectory> {
    if traj.domain() != op.domain() {
        return Err(Error::DomainMismatch);
    }
    let grid = *traj.grid();
    if lambda == 0.0 {
        return Ok(Trajectory::zeros(*op.domain(), grid));
    }
    let weights = StepWeights::new(op, grid.dt(), smoothing_n);
    let g = evaluate_g(cond, traj)?;
    let mut coeffs = op.forward(g.values());
    weights.smooth(&mut coeffs);
    for c in coeffs.iter_mut() {
        *c *= lambda;
    }

    let forcing: Vec<Vec<f64>> = (0..=grid.n_steps)
        .map(|j| {
            forcing_coeffs(op, h, &weights, grid.time(j), traj.snapshot(j))
                .map(|c| c.into_iter().map(|v| lambda * v).collect())
        })
        .collect::<Result<_>>()?;

    let mut snaps = Vec::with_capacity(grid.n_steps + 1);
    snaps.push(snapshot(op, &coeffs, 0)?);
    for j in 0..grid.n_steps {
        let (f0, f1) = (&forcing[j], &forcing[j + 1]);
        for k in 0..coeffs.len() {
            let mut next = weights.decay[k] * coeffs[k] + weights.w1[k] * f0[k];
            if stepper == Stepper::Etd2 {
                next += weights.w2[k] * (f1[k] - f0[k]);
            }
            coeffs[k] = next;
        }
        snaps.push(snapshot(op, &coeffs, j + 1)?);
    }
    Ok(Trajectory::from_raw(grid, snaps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_space::Domain1D;
    use crate::nemytskii::{Exponents, Forcing};
    use std::f64::consts::PI;

    fn ex() -> Exponents {
        Exponents::new(4.0, 2.0, 1).unwrap()
    }

    #[test]
    fn zero_reaction_is_pure_semigroup() {
        let op = SpectralOperator::new(Domain1D::new(1.0, 31).unwrap());
        let xi = GridFunction::from_fn(*op.domain(), |x| x * (1.0 - x) * (4.0 * x).exp()).unwrap();
        let grid = TimeGrid::new(0.2, 10).unwrap();
        let sol = cauchy_solve(&xi, &Nonlinearity::zero(ex()), &op, grid, Stepper::Etd2, None).unwrap();
        for j in 0..=10 {
            let exact = op.apply_semigroup(grid.time(j), &xi).unwrap();
            let d = sol.trajectory.snapshot(j).axpy(-1.0, &exact).unwrap();
            assert!(d.max_abs() < 1e-13);
        }
        let z = cauchy_solve(
            &GridFunction::zeros(*op.domain()),
            &Nonlinearity::zero(ex()),
            &op,
            grid,
            Stepper::ExponentialEuler,
            None,
        )
        .unwrap();
        assert_eq!(z.trajectory.sup_norm(2.0), 0.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let op = SpectralOperator::new(Domain1D::new(1.0, 15).unwrap());
        let xi = GridFunction::from_fn(*op.domain(), |x| 50.0 * (PI * x).sin()).unwrap();
        let h = Nonlinearity::odd_power(3, 1.0, Exponents::new(6.0, 2.0, 1).unwrap()).unwrap();
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let err = cauchy_solve(&xi, &h, &op, grid, Stepper::ExponentialEuler, None).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. } | Error::NonlinearityEvaluation { .. }));
    }

    #[test]
    fn sigma_at_zero_lambda_vanishes() {
        let op = SpectralOperator::new(Domain1D::new(1.0, 15).unwrap());
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let traj = Trajectory::from_fn(*op.domain(), grid, |t, x| t + x).unwrap();
        let h = Nonlinearity::forced_linear(0.0, Forcing::steady("one", |_| 1.0), ex());
        let s = sigma_apply(&traj, 0.0, Some(4), &h, &NonlocalCondition::Periodic, &op, Stepper::Etd2)
            .unwrap();
        assert_eq!(s.sup_norm(2.0), 0.0);
    }

    #[test]
    fn sigma_fixed_condition_without_reaction() {
        let op = SpectralOperator::new(Domain1D::new(1.0, 15).unwrap());
        let grid = TimeGrid::new(0.5, 8).unwrap();
        let u0 = GridFunction::from_fn(*op.domain(), |x| (PI * x).sin() + 0.2 * (3.0 * PI * x).sin()).unwrap();
        let cond = NonlocalCondition::Fixed { u0: u0.clone() };
        let traj = Trajectory::from_fn(*op.domain(), grid, |t, x| t * x).unwrap();
        let s = sigma_apply(&traj, 1.0, None, &Nonlinearity::zero(ex()), &cond, &op, Stepper::ExponentialEuler)
            .unwrap();
        for j in 0..=8 {
            let exact = op.apply_semigroup(grid.time(j), &u0).unwrap();
            assert!(s.snapshot(j).axpy(-1.0, &exact).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn euler_fixed_point_matches_cauchy_solve() {
        // With Fixed{u0}, iterating Sigma converges to the exponential-Euler trajectory.
        let op = SpectralOperator::new(Domain1D::new(1.0, 15).unwrap());
        let grid = TimeGrid::new(1.0, 40).unwrap();
        let u0 = GridFunction::from_fn(*op.domain(), |x| 0.5 * (PI * x).sin()).unwrap();
        let h = Nonlinearity::odd_power(3, -1.0, Exponents::new(6.0, 2.0, 1).unwrap()).unwrap();
        let cond = NonlocalCondition::Fixed { u0: u0.clone() };
        let direct = cauchy_solve(&u0, &h, &op, grid, Stepper::ExponentialEuler, None).unwrap();
        let mut it = Trajectory::zeros(*op.domain(), grid);
        for _ in 0..60 {
            it = sigma_apply(&it, 1.0, None, &h, &cond, &op, Stepper::ExponentialEuler).unwrap();
        }
        assert!(it.sup_distance(&direct.trajectory, 2.0).unwrap() < 1e-14);
    }
}
