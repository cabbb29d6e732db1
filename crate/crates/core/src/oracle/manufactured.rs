use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::lp_space::Domain1D;
use crate::nemytskii::{Forcing, Nonlinearity, SpaceTimeFn};
use crate::trajectory::{TimeGrid, Trajectory};

/// A closed-form profile `u*(t, x)` with hand-computed `u*_t` and `u*_xx`.
#[derive(Clone)]
pub struct ManufacturedProfile {
    pub name: String,
    pub u: SpaceTimeFn,
    pub u_t: SpaceTimeFn,
    pub u_xx: SpaceTimeFn,
    pub period: Option<f64>,
}

impl std::fmt::Debug for ManufacturedProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ManufacturedProfile({})", self.name)
    }
}

impl ManufacturedProfile {
    pub fn zero() -> Self {
        let z: SpaceTimeFn = Arc::new(|_, _| 0.0);
        Self { name: "zero".into(), u: z.clone(), u_t: z.clone(), u_xx: z, period: None }
    }

    /// `u* = e^{-t} sin(pi x / L)`.
    pub fn decaying_mode(length: f64) -> Self {
        let k = PI / length;
        Self {
            name: "decaying_mode".into(),
            u: Arc::new(move |t, x| (-t).exp() * (k * x).sin()),
            u_t: Arc::new(move |t, x| -(-t).exp() * (k * x).sin()),
            u_xx: Arc::new(move |t, x| -k * k * (-t).exp() * (k * x).sin()),
            period: None,
        }
    }

    /// `u* = (2 + sin(2 pi t / T)) sin(pi x / L)`, `T`-periodic.
    pub fn periodic_mode(length: f64, period: f64) -> Self {
        let k = PI / length;
        let w = 2.0 * PI / period;
        Self {
            name: "periodic_mode".into(),
            u: Arc::new(move |t, x| (2.0 + (w * t).sin()) * (k * x).sin()),
            u_t: Arc::new(move |t, x| w * (w * t).cos() * (k * x).sin()),
            u_xx: Arc::new(move |t, x| -k * k * (2.0 + (w * t).sin()) * (k * x).sin()),
            period: Some(period),
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.u)(t, x)
    }

    pub fn sample(&self, domain: Domain1D, grid: TimeGrid) -> Result<Trajectory> {
        let u = self.u.clone();
        Trajectory::from_fn(domain, grid, move |t, x| u(t, x))
    }
}

/// The forcing `s = u*_t - u*_xx - h_base(t, x, u*)` that makes `u*` an exact solution
/// of `u_t = u_xx + h_base(t, x, u) + s`.
pub fn manufacture(profile: &ManufacturedProfile, h_base: &Nonlinearity) -> Forcing {
    let p = profile.clone();
    let h = h_base.clone();
    let autonomous_base = h_base.claims().autonomous;
    let forcing = Forcing::new(format!("manufactured({})", profile.name), move |t, x| {
        let u = (p.u)(t, x);
        (p.u_t)(t, x) - (p.u_xx)(t, x) - h.eval(t, x, u)
    });
    match profile.period {
        Some(tp) if autonomous_base || h_base.claims().is_periodic_with(tp) => forcing.with_period(tp),
        _ => forcing,
    }
}
