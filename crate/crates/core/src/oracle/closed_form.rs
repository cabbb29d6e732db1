use crate::error::{Error, Result};
use crate::lp_space::GridFunction;
use crate::nemytskii::Forcing;
use crate::semigroup::SpectralOperator;
use crate::trajectory::{TimeGrid, Trajectory};

/// Time-quadrature refinement of the closed-form oracle relative to the output grid.
pub const CLOSED_FORM_REFINEMENT: usize = 64;

/// The `T`-periodic solution of `u' = A u - c u + s(t)`, mode by mode:
/// `u_k(0) = (1 - e^{-mu_k T})^{-1} int_0^T e^{-mu_k (T - s)} s_k(s) ds` with
/// `mu_k = lambda_k + c`, and `u_k(t) = e^{-mu_k t} u_k(0) + int_0^t e^{-mu_k (t - s)} s_k(s) ds`.
///
/// The convolution integrals use composite Simpson with
/// [`CLOSED_FORM_REFINEMENT`] panels per output step, evaluating the
/// exponential kernel directly.
pub fn linear_periodic_closed_form(
    op: &SpectralOperator,
    damping: f64,
    forcing: &Forcing,
    grid: TimeGrid,
) -> Result<Trajectory> {
    let mu: Vec<f64> = op.eigenvalues().iter().map(|l| l + damping).collect();
    if mu[0] <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "no unique periodic solution: lambda_1 + c = {} <= 0",
            mu[0]
        )));
    }
    let d = *op.domain();
    let n = d.n_interior();
    let dt = grid.dt();
    let panels = CLOSED_FORM_REFINEMENT;
    let hq = dt / panels as f64;
    let coeffs_at = |t: f64| -> Vec<f64> {
        let vals: Vec<f64> = d.nodes().map(|x| forcing.eval(t, x)).collect();
        op.forward(&vals)
    };

    // v_k(t_j) = int_0^{t_j} e^{-mu_k (t_j - s)} s_k(s) ds.
    let mut v = vec![vec![0.0; n]; grid.n_steps + 1];
    let mut left = coeffs_at(0.0);
    for j in 0..grid.n_steps {
        let t0 = grid.time(j);
        let t1 = grid.time(j + 1);
        let mut integral = vec![0.0; n];
        let mut add = |coeffs: &[f64], tau: f64, w: f64| {
            for k in 0..n {
                integral[k] += w * (-mu[k] * (t1 - tau)).exp() * coeffs[k];
            }
        };
        add(&left, t0, 1.0);
        for m in 1..panels {
            let tau = t0 + m as f64 * hq;
            add(&coeffs_at(tau), tau, if m % 2 == 1 { 4.0 } else { 2.0 });
        }
        let right = coeffs_at(t1);
        add(&right, t1, 1.0);
        for k in 0..n {
            v[j + 1][k] = (-mu[k] * dt).exp() * v[j][k] + integral[k] * hq / 3.0;
        }
        left = right;
    }

    let u0: Vec<f64> = (0..n).map(|k| v[grid.n_steps][k] / -(-mu[k] * grid.horizon).exp_m1()).collect();
    let snaps = (0..=grid.n_steps)
        .map(|j| {
            let t = grid.time(j);
            let c: Vec<f64> = (0..n).map(|k| (-mu[k] * t).exp() * u0[k] + v[j][k]).collect();
            GridFunction::new(d, op.inverse(&c))
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(grid, snaps)
}
