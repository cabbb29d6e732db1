//! Numerical shadows of the inequalities behind existence and uniqueness:
//! inward pointing of the smoothed field on a shell, and the Benilan
//! estimate between two trajectories.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::checks::{CheckReport, Witness};
use crate::error::{Error, Result};
use crate::lp_space::{duality_pairing, lp_norm_unchecked, upper_semi_inner};
use crate::nemytskii::{superpose, Nonlinearity};
use crate::sampling::{random_smooth_profile, rescale_to_norm, uniform, SampleSpec};
use crate::semigroup::SpectralOperator;
use crate::trajectory::Trajectory;

/// Spherical shell `r0 < ||v||_p < r_outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shell {
    pub r0: f64,
    pub r_outer: f64,
}

/// Samples `<J(v), S(1/n) f(t, v)> <= 0` for `v` in the shell and `t` in `spec.t_range`.
pub fn transversality_check(
    h: &Nonlinearity,
    op: &SpectralOperator,
    n: u32,
    p: f64,
    shell: Shell,
    spec: &SampleSpec,
) -> Result<CheckReport> {
    if !(shell.r0 >= 0.0 && shell.r0 < shell.r_outer) {
        return Err(Error::InvalidConfig("shell needs 0 <= r0 < r_outer".into()));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("smoothing index n must be positive".into()));
    }
    let d = *op.domain();
    let mut report = CheckReport::new(format!("transversality(n={n})"));
    let mut rng = spec.rng();
    for _ in 0..spec.count {
        let t = uniform(&mut rng, spec.t_range);
        let radius = shell.r0 + (shell.r_outer - shell.r0) * rng.gen_range(0.01..0.99);
        let raw = random_smooth_profile(d, &mut rng, spec.modes, spec.nonnegative);
        let v = rescale_to_norm(&raw, p, radius);
        let f = superpose(h, t, &v)?;
        let sf = op.apply_semigroup(1.0 / n as f64, &f)?;
        let pairing = duality_pairing(&v, &sf, p)?;
        let scale = radius * lp_norm_unchecked(sf.values(), d.dx(), p);
        let imax = v.values().iter().enumerate().fold(0, |m, (i, x)| if x.abs() > v[m].abs() { i } else { m });
        report.record(pairing, 1e-10 * scale, |excess| Witness {
            t,
            x: d.x(imax),
            v: v[imax],
            v_other: Some(radius),
            excess,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenilanReport {
    /// Largest `||d(t)|| - ||d(s)|| - int_s^t [d, b1 - b2]_+` over grid pairs `s < t`.
    pub max_violation: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_checked: usize,
    pub tolerance: f64,
    pub pass: bool,
    /// `||u(t_j) - v(t_j)||_p`.
    pub gap_trace: Vec<f64>,
}

/// Checks `||u(t) - v(t)|| <= ||u(s) - v(s)|| + int_s^t [u - v, beta1 - beta2]_+`
/// on every pair of grid times, with the integral by the trapezoid rule.
pub fn benilan_gap(
    u: &Trajectory,
    v: &Trajectory,
    beta1: &Trajectory,
    beta2: &Trajectory,
    p: f64,
) -> Result<BenilanReport> {
    u.check_compatible(v)?;
    u.check_compatible(beta1)?;
    u.check_compatible(beta2)?;
    let m = u.n_steps();
    let dt = u.grid().dt();
    let dx = u.domain().dx();
    let mut gaps = Vec::with_capacity(m + 1);
    let mut integrand = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let d = u.snapshot(j).axpy(-1.0, v.snapshot(j))?;
        let b = beta1.snapshot(j).axpy(-1.0, beta2.snapshot(j))?;
        gaps.push(lp_norm_unchecked(d.values(), dx, p));
        integrand.push(upper_semi_inner(&d, &b, p)?);
    }
    let mut cumulative = vec![0.0; m + 1];
    for j in 1..=m {
        cumulative[j] = cumulative[j - 1] + 0.5 * dt * (integrand[j - 1] + integrand[j]);
    }
    // violation(s, t) = a_t - a_s with a_j = gap_j - I_j; maximize over s < t.
    let a: Vec<f64> = gaps.iter().zip(&cumulative).map(|(g, i)| g - i).collect();
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = None;
    let mut arg_min = 0;
    for t in 1..=m {
        let cand = a[t] - a[arg_min];
        if cand > max_violation {
            max_violation = cand;
            worst = Some((arg_min, t));
        }
        if a[t] < a[arg_min] {
            arg_min = t;
        }
    }
    let scale = gaps.iter().copied().fold(0.0, f64::max)
        + integrand.iter().map(|w| w.abs()).sum::<f64>() * dt;
    let tolerance = 1e-6 * (1.0 + scale);
    Ok(BenilanReport {
        max_violation,
        worst_pair: worst,
        pairs_checked: m * (m + 1) / 2,
        tolerance,
        pass: max_violation <= tolerance,
        gap_trace: gaps,
    })
}
