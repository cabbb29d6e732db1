use super::fd::FdOperator;
use crate::error::{Error, Result};
use crate::lp_space::GridFunction;
use crate::nemytskii::Nonlinearity;
use crate::trajectory::{TimeGrid, Trajectory};

const NEWTON_MAX_ITER: usize = 40;

/// Method-of-lines reference: finite differences in space, implicit midpoint
/// in time with `fine_steps` substeps, output on the nodes of `grid`.
///
/// Each step solves `(I - dt/2 A) w - dt/2 h(t_mid, w) = u_n` for the midpoint
/// `w` by Newton's method with a tridiagonal Jacobian, then sets `u_{n+1} = 2w - u_n`.
pub fn mol_solve(
    afd: &FdOperator,
    h: &Nonlinearity,
    xi: &GridFunction,
    grid: TimeGrid,
    fine_steps: usize,
) -> Result<Trajectory> {
    if xi.domain() != afd.domain() {
        return Err(Error::DomainMismatch);
    }
    if fine_steps < 8 * grid.n_steps || !fine_steps.is_multiple_of(grid.n_steps) {
        return Err(Error::InvalidConfig(format!(
            "fine_steps = {fine_steps} must be a multiple of M = {} and at least 8 M",
            grid.n_steps
        )));
    }
    let d = *afd.domain();
    let n = d.n_interior();
    let per = fine_steps / grid.n_steps;
    let dt = grid.horizon / fine_steps as f64;
    let c = afd.coupling();
    let off = -0.5 * dt * c;
    let nodes: Vec<f64> = d.nodes().collect();

    let mut u = xi.values().to_vec();
    let mut snaps = vec![xi.clone()];
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for step in 0..fine_steps {
        let t_mid = (step as f64 + 0.5) * dt;
        let mut w = u.clone();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let aw = afd.apply(&w);
            let mut max_delta = 0.0_f64;
            for i in 0..n {
                let hv = h.eval(t_mid, nodes[i], w[i]);
                rhs[i] = -(w[i] - 0.5 * dt * aw[i] - 0.5 * dt * hv - u[i]);
                let eps = 1e-6 * w[i].abs().max(1.0);
                let dh = (h.eval(t_mid, nodes[i], w[i] + eps) - h.eval(t_mid, nodes[i], w[i] - eps)) / (2.0 * eps);
                diag[i] = 1.0 + dt * c - 0.5 * dt * dh;
            }
            let delta = solve_tridiagonal(off, &diag, &rhs);
            for (wi, di) in w.iter_mut().zip(&delta) {
                *wi += di;
                max_delta = max_delta.max(di.abs());
            }
            let scale = w.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            if !max_delta.is_finite() {
                break;
            }
            if max_delta <= 1e-14 * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::OracleDivergence { step: step + 1 });
        }
        for (ui, wi) in u.iter_mut().zip(&w) {
            *ui = 2.0 * wi - *ui;
        }
        if (step + 1) % per == 0 {
            snaps.push(GridFunction::new(d, u.clone()).map_err(|_| Error::BlowUp { step: (step + 1) / per })?);
        }
    }
    Trajectory::new(grid, snaps)
}

/// Thomas algorithm for a symmetric tridiagonal system with constant off-diagonal.
fn solve_tridiagonal(off: f64, diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    c_prime[0] = off / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off * c_prime[i - 1];
        c_prime[i] = off / m;
        d_prime[i] = (rhs[i] - off * d_prime[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x
}
