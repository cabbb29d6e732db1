//! Nonlocal initial conditions `u(0) = g(u)` and sampling checks of their
//! ball-invariance and Lipschitz hypotheses.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp_space::{lp_norm_unchecked, Domain1D, GridFunction};
use crate::nemytskii::ReactionFn;
use crate::sampling::{random_smooth_profile, rescale_to_norm, SampleSpec};
use crate::trajectory::{TimeGrid, Trajectory};

/// Scalar map `gamma: R -> R` applied pointwise by multipoint conditions.
#[derive(Clone)]
pub struct ScalarMap {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lipschitz: Option<f64>,
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarMap({})", self.name)
    }
}

impl ScalarMap {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lipschitz: Option<f64>,
    ) -> Self {
        Self { name: name.into(), f: Arc::new(f), lipschitz }
    }

    pub fn identity() -> Self {
        Self::new("identity", |v| v, Some(1.0))
    }

    pub fn tanh() -> Self {
        Self::new("tanh", f64::tanh, Some(1.0))
    }

    pub fn sin() -> Self {
        Self::new("sin", f64::sin, Some(1.0))
    }

    pub fn scaled(a: f64) -> Self {
        Self::new(format!("scaled({a})"), move |v| a * v, Some(a.abs()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn apply(&self, v: f64) -> f64 {
        (self.f)(v)
    }
}

/// Nonnegative weight `alpha(t)`.
#[derive(Clone)]
pub struct TimeProfile {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for TimeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeProfile({})", self.name)
    }
}

impl TimeProfile {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(format!("constant({value})"), move |_| value)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    /// Trapezoid `int_0^T |alpha|` on the given time grid.
    pub fn l1_norm(&self, grid: &TimeGrid) -> f64 {
        grid.trapezoid_weights()
            .iter()
            .enumerate()
            .map(|(j, w)| w * self.eval(grid.time(j)).abs())
            .sum()
    }
}

/// The operator `g` in `u(0) = g(u)`.
#[derive(Clone)]
pub enum NonlocalCondition {
    /// `u(0) = u(T)`.
    Periodic,
    /// `u(0) = -u(T)`.
    Antiperiodic,
    /// `u(0) = sum_i c_i gamma(u(t_i))`.
    Multipoint { weights: Vec<f64>, times: Vec<f64>, gamma: ScalarMap },
    /// `u(0)(x) = int_0^T eta(t, x, u(t)(x)) dt`. `alpha_bound` documents an envelope
    /// `|eta(t,x,v)| <= alpha(t) |v|` when one is known.
    Integral { eta: ReactionFn, alpha_bound: Option<TimeProfile> },
    /// `u(0) = int_0^T alpha(t) u(t) dt`, or with `|u(t)|` when `absolute`.
    MeanValue { alpha: TimeProfile, absolute: bool },
    /// `u(0) = u0`.
    Fixed { u0: GridFunction },
}

impl fmt::Debug for NonlocalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Periodic => write!(f, "Periodic"),
            Self::Antiperiodic => write!(f, "Antiperiodic"),
            Self::Multipoint { weights, times, gamma } => f
                .debug_struct("Multipoint")
                .field("weights", weights)
                .field("times", times)
                .field("gamma", gamma)
                .finish(),
            Self::Integral { alpha_bound, .. } => {
                f.debug_struct("Integral").field("alpha_bound", alpha_bound).finish()
            }
            Self::MeanValue { alpha, absolute } => f
                .debug_struct("MeanValue")
                .field("alpha", alpha)
                .field("absolute", absolute)
                .finish(),
            Self::Fixed { .. } => write!(f, "Fixed"),
        }
    }
}

/// Hypothesis status of a condition on a particular time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub variant: &'static str,
    /// `sum c_i` (multipoint) or trapezoid `||alpha||_1` (mean-value, integral).
    pub mass: Option<f64>,
    /// Theoretical Lipschitz bound when one follows from the declared data.
    pub lipschitz_bound: Option<f64>,
    pub hypotheses_hold: bool,
}

impl NonlocalCondition {
    /// Multipoint condition with `0 < t_1 < ... < t_m`. The weight bound
    /// `sum c_i <= 1` is a hypothesis, reported by [`NonlocalCondition::summary`]
    /// and [`check_g2`], not enforced here.
    pub fn multipoint(weights: Vec<f64>, times: Vec<f64>, gamma: ScalarMap) -> Result<Self> {
        if weights.is_empty() || weights.len() != times.len() {
            return Err(Error::InvalidConfig(
                "multipoint needs equally many (nonzero count) weights and times".into(),
            ));
        }
        if times[0] <= 0.0 || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "multipoint times must satisfy 0 < t_1 < ... < t_m".into(),
            ));
        }
        Ok(Self::Multipoint { weights, times, gamma })
    }

    pub fn mean_value(alpha: TimeProfile, absolute: bool) -> Self {
        Self::MeanValue { alpha, absolute }
    }

    pub fn integral(
        eta: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        alpha_bound: Option<TimeProfile>,
    ) -> Self {
        Self::Integral { eta: Arc::new(eta), alpha_bound }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::Periodic => "periodic",
            Self::Antiperiodic => "antiperiodic",
            Self::Multipoint { .. } => "multipoint",
            Self::Integral { .. } => "integral",
            Self::MeanValue { .. } => "mean_value",
            Self::Fixed { .. } => "fixed",
        }
    }

    /// Mass and Lipschitz data of the condition on `grid`.
    pub fn summary(&self, grid: &TimeGrid) -> ConditionSummary {
        let (mass, lipschitz_bound, holds) = match self {
            Self::Periodic | Self::Antiperiodic => (None, Some(1.0), true),
            Self::Multipoint { weights, times, gamma } => {
                let mass: f64 = weights.iter().map(|c| c.abs()).sum();
                let aligned = times.iter().all(|&t| t <= grid.horizon && grid.snap(t).is_ok());
                let lip = gamma.lipschitz().map(|l| l * mass);
                (Some(mass), lip, mass <= 1.0 && aligned && weights.iter().all(|&c| c >= 0.0))
            }
            Self::MeanValue { alpha, .. } => {
                let mass = alpha.l1_norm(grid);
                (Some(mass), Some(mass), mass <= 1.0)
            }
            Self::Integral { alpha_bound, .. } => match alpha_bound {
                Some(a) => {
                    let mass = a.l1_norm(grid);
                    (Some(mass), Some(mass), mass <= 1.0)
                }
                None => (None, None, false),
            },
            Self::Fixed { .. } => (None, Some(0.0), true),
        };
        ConditionSummary { variant: self.variant_name(), mass, lipschitz_bound, hypotheses_hold: holds }
    }
}

/// Evaluates `g(traj)`.
pub fn evaluate_g(cond: &NonlocalCondition, traj: &Trajectory) -> Result<GridFunction> {
    let d = *traj.domain();
    match cond {
        NonlocalCondition::Periodic => Ok(traj.last().clone()),
        NonlocalCondition::Antiperiodic => Ok(traj.last().scaled(-1.0)),
        NonlocalCondition::Multipoint { weights, times, gamma } => {
            let mut out = vec![0.0; d.n_interior()];
            for (&c, &t) in weights.iter().zip(times) {
                if t <= 0.0 {
                    return Err(Error::GridAlignment { t, dt: traj.grid().dt() });
                }
                let j = traj.grid().snap(t)?;
                for (o, &v) in out.iter_mut().zip(traj.snapshot(j).values()) {
                    *o += c * gamma.apply(v);
                }
            }
            finite(d, out)
        }
        NonlocalCondition::Integral { eta, .. } => {
            integrate(traj, |t, x, v| eta(t, x, v))
        }
        NonlocalCondition::MeanValue { alpha, absolute } => {
            let abs = *absolute;
            integrate(traj, |t, _, v| alpha.eval(t) * if abs { v.abs() } else { v })
        }
        NonlocalCondition::Fixed { u0 } => {
            if *u0.domain() != d {
                return Err(Error::DomainMismatch);
            }
            Ok(u0.clone())
        }
    }
}

fn integrate(traj: &Trajectory, kernel: impl Fn(f64, f64, f64) -> f64) -> Result<GridFunction> {
    let d = *traj.domain();
    let weights = traj.grid().trapezoid_weights();
    let mut out = vec![0.0; d.n_interior()];
    for (j, w) in weights.iter().enumerate() {
        let t = traj.time(j);
        for (i, (o, &v)) in out.iter_mut().zip(traj.snapshot(j).values()).enumerate() {
            *o += w * kernel(t, d.x(i), v);
        }
    }
    finite(d, out)
}

fn finite(d: Domain1D, values: Vec<f64>) -> Result<GridFunction> {
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { context: "nonlocal condition", value: bad });
    }
    Ok(GridFunction::from_raw(d, values))
}

/// Trajectory samples with `sup_t ||u(t)||_p = radius`.
///
/// Even-indexed samples are constant in time; odd ones carry a random smooth
/// time modulation on top of two random profiles.
fn sample_trajectories(
    domain: Domain1D,
    grid: TimeGrid,
    p: f64,
    radius: f64,
    spec: &SampleSpec,
) -> Vec<Trajectory> {
    let mut rng = spec.rng();
    (0..spec.count)
        .map(|s| {
            let a = random_smooth_profile(domain, &mut rng, spec.modes, spec.nonnegative);
            let traj = if s % 2 == 0 {
                Trajectory::constant(&a, grid)
            } else {
                let b = random_smooth_profile(domain, &mut rng, spec.modes, spec.nonnegative);
                let freq = rng.gen_range(0.5..3.0);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let snaps = (0..=grid.n_steps)
                    .map(|j| {
                        let tau = grid.time(j) / grid.horizon;
                        let wa = (std::f64::consts::TAU * freq * tau + phase).cos();
                        let wb = 1.0 - tau;
                        let vals =
                            a.values().iter().zip(b.values()).map(|(x, y)| wa * x + wb * y).collect();
                        GridFunction::from_raw(domain, vals)
                    })
                    .collect();
                Trajectory::from_raw(grid, snaps)
            };
            let sup = traj.sup_norm(p);
            if sup == 0.0 {
                traj
            } else {
                traj.combine(radius / sup, &traj, 0.0).expect("same grid")
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G2Report {
    pub radius: f64,
    pub samples: usize,
    /// `max ||g(u)||_p` over the sampled trajectories.
    pub max_norm: f64,
    pub pass: bool,
    /// Sample index attaining `max_norm` when the check fails.
    pub witness: Option<usize>,
}

/// Samples trajectories in the ball of radius `radius` and checks
/// `sup ||g(u)||_p <= radius`.
pub fn check_g2(
    cond: &NonlocalCondition,
    domain: Domain1D,
    grid: TimeGrid,
    radius: f64,
    p: f64,
    spec: &SampleSpec,
) -> Result<G2Report> {
    let samples = sample_trajectories(domain, grid, p, radius, spec);
    let mut max_norm = 0.0_f64;
    let mut arg = None;
    for (s, traj) in samples.iter().enumerate() {
        let g = evaluate_g(cond, traj)?;
        let n = lp_norm_unchecked(g.values(), domain.dx(), p);
        if n > max_norm || arg.is_none() {
            max_norm = max_norm.max(n);
            arg = Some(s);
        }
    }
    let pass = max_norm <= radius * (1.0 + 1e-10);
    Ok(G2Report { radius, samples: samples.len(), max_norm, pass, witness: if pass { None } else { arg } })
}

/// Lower bound on the Lipschitz constant of `g` with respect to the sup-in-time
/// `L^p` distance, from sampled trajectory pairs.
///
/// Pairs come in three shapes: a constant-in-time shift, a perturbation of
/// the final snapshot only, and a generic smooth perturbation.
pub fn lipschitz_estimate(
    cond: &NonlocalCondition,
    domain: Domain1D,
    grid: TimeGrid,
    p: f64,
    spec: &SampleSpec,
) -> Result<f64> {
    let bases = sample_trajectories(domain, grid, p, 1.0, spec);
    let mut rng = spec.rng();
    let mut best = 0.0_f64;
    for (s, u) in bases.iter().enumerate() {
        let w = random_smooth_profile(domain, &mut rng, spec.modes, spec.nonnegative);
        let w = rescale_to_norm(&w, p, rng.gen_range(1e-3..0.5));
        let v = match s % 3 {
            0 => {
                let shift = Trajectory::constant(&w, grid);
                u.combine(1.0, &shift, 1.0)?
            }
            1 => {
                let mut snaps = u.snapshots().to_vec();
                let last = snaps.len() - 1;
                snaps[last] = snaps[last].axpy(1.0, &w)?;
                Trajectory::from_raw(grid, snaps)
            }
            _ => {
                let other = &bases[(s + 1) % bases.len()];
                u.combine(1.0, other, rng.gen_range(0.01..0.5))?
            }
        };
        let denom = u.sup_distance(&v, p)?;
        if denom == 0.0 {
            continue;
        }
        let gu = evaluate_g(cond, u)?;
        let gv = evaluate_g(cond, &v)?;
        let diff = gu.axpy(-1.0, &gv)?;
        best = best.max(lp_norm_unchecked(diff.values(), domain.dx(), p) / denom);
    }
    Ok(best)
}
