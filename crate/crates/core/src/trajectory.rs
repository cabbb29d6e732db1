use crate::error::{Error, Result};
use crate::lp_space::{lp_norm_unchecked, Domain1D, GridFunction};

/// Uniform time grid `t_j = j T / M`, `j = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidTime { t: horizon, reason: "horizon must be positive" });
        }
        if n_steps == 0 {
            return Err(Error::InvalidConfig("at least one time step is required".into()));
        }
        Ok(Self { horizon, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.n_steps {
            self.horizon
        } else {
            j as f64 * self.dt()
        }
    }

    /// Index of the grid node at time `t`, if `t` lies within `1e-9 dt` of one.
    pub fn snap(&self, t: f64) -> Result<usize> {
        let dt = self.dt();
        let j = (t / dt).round();
        if j < 0.0 || j > self.n_steps as f64 || (t - j * dt).abs() > 1e-9 * dt {
            return Err(Error::GridAlignment { t, dt });
        }
        Ok(j as usize)
    }

    /// Trapezoid weights over the grid nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.n_steps + 1];
        w[0] = 0.5 * dt;
        w[self.n_steps] = 0.5 * dt;
        w
    }
}

/// Snapshots of a grid function at the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    snapshots: Vec<GridFunction>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, snapshots: Vec<GridFunction>) -> Result<Self> {
        if snapshots.len() != grid.n_steps + 1 {
            return Err(Error::InvalidConfig(format!(
                "expected {} snapshots, got {}",
                grid.n_steps + 1,
                snapshots.len()
            )));
        }
        let domain = *snapshots[0].domain();
        for (j, s) in snapshots.iter().enumerate() {
            if *s.domain() != domain {
                return Err(Error::DomainMismatch);
            }
            if !s.all_finite() {
                return Err(Error::BlowUp { step: j });
            }
        }
        Ok(Self { grid, snapshots })
    }

    pub fn zeros(domain: Domain1D, grid: TimeGrid) -> Self {
        Self { grid, snapshots: vec![GridFunction::zeros(domain); grid.n_steps + 1] }
    }

    /// The trajectory `t -> w`.
    pub fn constant(w: &GridFunction, grid: TimeGrid) -> Self {
        Self { grid, snapshots: vec![w.clone(); grid.n_steps + 1] }
    }

    /// Samples `f(t, x)` on the space-time grid.
    pub fn from_fn(domain: Domain1D, grid: TimeGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let snapshots = (0..=grid.n_steps)
            .map(|j| {
                let t = grid.time(j);
                GridFunction::from_fn(domain, |x| f(t, x))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, snapshots)
    }

    pub(crate) fn from_raw(grid: TimeGrid, snapshots: Vec<GridFunction>) -> Self {
        debug_assert_eq!(snapshots.len(), grid.n_steps + 1);
        Self { grid, snapshots }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn domain(&self) -> &Domain1D {
        self.snapshots[0].domain()
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps
    }

    pub fn time(&self, j: usize) -> f64 {
        self.grid.time(j)
    }

    pub fn snapshot(&self, j: usize) -> &GridFunction {
        &self.snapshots[j]
    }

    pub fn snapshots(&self) -> &[GridFunction] {
        &self.snapshots
    }

    pub fn first(&self) -> &GridFunction {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &GridFunction {
        &self.snapshots[self.grid.n_steps]
    }

    /// `||u(t_j)||_p` for every snapshot.
    pub fn norm_trace(&self, p: f64) -> Vec<f64> {
        let dx = self.domain().dx();
        self.snapshots.iter().map(|s| lp_norm_unchecked(s.values(), dx, p)).collect()
    }

    /// `sup_j ||u(t_j)||_p`.
    pub fn sup_norm(&self, p: f64) -> f64 {
        self.norm_trace(p).into_iter().fold(0.0, f64::max)
    }

    /// `sup_j ||u(t_j) - v(t_j)||_p`.
    pub fn sup_distance(&self, other: &Trajectory, p: f64) -> Result<f64> {
        self.check_compatible(other)?;
        let dx = self.domain().dx();
        Ok(self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(a, b)| {
                let d: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
                lp_norm_unchecked(&d, dx, p)
            })
            .fold(0.0, f64::max))
    }

    /// Snapshot-wise `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Trajectory, b: f64) -> Result<Trajectory> {
        self.check_compatible(other)?;
        let snapshots = self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(u, v)| {
                let vals = u.values().iter().zip(v.values()).map(|(x, y)| a * x + b * y).collect();
                GridFunction::from_raw(*u.domain(), vals)
            })
            .collect();
        Ok(Self { grid: self.grid, snapshots })
    }

    pub fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.domain() != other.domain() {
            return Err(Error::DomainMismatch);
        }
        if self.grid != other.grid {
            return Err(Error::InvalidConfig("trajectories live on different time grids".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.snapshots.iter().all(GridFunction::all_finite)
    }
}
