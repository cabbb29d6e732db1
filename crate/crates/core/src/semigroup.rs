//! Spectral realization of the Dirichlet heat semigroup.
//!
//! The grid is diagonalized by the discrete sine transform. Mode `k` carries the
//! continuous Dirichlet eigenvalue `(k pi / L)^2`, so `S(t)` and the
//! exponential-integrator weights are exact multipliers mode by mode and all
//! discretization error lives in the spatial truncation.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp_space::{Domain1D, GridFunction};

/// Below this value of `lambda * t` the phi-function multipliers use Taylor series.
const PHI1_SERIES_THRESHOLD: f64 = 1e-8;
const PHI2_SERIES_THRESHOLD: f64 = 1e-3;

/// Coefficients against `sin(k pi x / L)`, `k = 1..=N`.
///
/// Normalization: `c_k = 2/(N+1) * sum_i u_i sin(k pi i / (N+1))`, inverse
/// `u_i = sum_k c_k sin(k pi i / (N+1))`. Parseval reads
/// `dx * sum u_i^2 = (L/2) * sum c_k^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineCoefficients {
    domain: Domain1D,
    coeffs: Vec<f64>,
}

impl SineCoefficients {
    pub fn new(domain: Domain1D, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != domain.n_interior() {
            return Err(Error::InvalidDomain(format!(
                "expected {} coefficients, got {}",
                domain.n_interior(),
                coeffs.len()
            )));
        }
        Ok(Self { domain, coeffs })
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Result of [`smoothing_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingConstant {
    pub value: f64,
    /// `(k/2) (1/q - 1/p)`.
    pub exponent: f64,
    /// Whether `t -> c(t)` is integrable near zero (exponent < 1).
    pub integrable: bool,
}

/// `(4 pi t)^(-(k/2)(1/q - 1/p))`, the `L^q -> L^p` gain of the heat semigroup.
pub fn smoothing_constant(t: f64, p: f64, q: f64, k_dim: u32) -> Result<SmoothingConstant> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidTime { t, reason: "smoothing constant needs t > 0" });
    }
    if !(q >= 2.0 && q < p && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("need 2 <= q < p < inf, got q = {q}, p = {p}")));
    }
    if k_dim == 0 {
        return Err(Error::InvalidExponent("space dimension must be positive".into()));
    }
    let exponent = 0.5 * k_dim as f64 * (1.0 / q - 1.0 / p);
    Ok(SmoothingConstant {
        value: (4.0 * PI * t).powf(-exponent),
        exponent,
        integrable: exponent < 1.0,
    })
}

/// Sine-Galerkin diagonalization of the Dirichlet Laplacian on a [`Domain1D`].
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    domain: Domain1D,
    eigenvalues: Vec<f64>,
    k_dim: u32,
    // Row-major sin(k pi i / (N+1)), k, i = 1..=N.
    sines: Arc<Vec<f64>>,
}

impl SpectralOperator {
    pub fn new(domain: Domain1D) -> Self {
        let n = domain.n_interior();
        let np1 = n + 1;
        let len = domain.length();
        let eigenvalues = (1..=n).map(|k| (k as f64 * PI / len).powi(2)).collect();
        let mut sines = Vec::with_capacity(n * n);
        for k in 1..=n {
            for i in 1..=n {
                // Reduce k*i modulo the period 2(N+1) before taking the sine.
                let r = (k * i) % (2 * np1);
                sines.push((PI * r as f64 / np1 as f64).sin());
            }
        }
        Self { domain, eigenvalues, k_dim: 1, sines: Arc::new(sines) }
    }

    /// Sets the spatial dimension used for exponent validation and the smoothing constant.
    pub fn with_space_dim(mut self, k_dim: u32) -> Self {
        self.k_dim = k_dim.max(1);
        self
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn space_dim(&self) -> u32 {
        self.k_dim
    }

    /// Smallest eigenvalue, the decay rate of the slowest mode.
    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn dst(&self, u: &GridFunction) -> Result<SineCoefficients> {
        self.check_domain(u.domain())?;
        Ok(SineCoefficients { domain: self.domain, coeffs: self.forward(u.values()) })
    }

    pub fn idst(&self, c: &SineCoefficients) -> Result<GridFunction> {
        self.check_domain(c.domain())?;
        Ok(GridFunction::from_raw(self.domain, self.inverse(&c.coeffs)))
    }

    /// `S(t) u`.
    pub fn apply_semigroup(&self, t: f64, u: &GridFunction) -> Result<GridFunction> {
        check_nonnegative_time(t)?;
        self.check_domain(u.domain())?;
        if t == 0.0 {
            return Ok(u.clone());
        }
        let mut c = self.forward(u.values());
        self.scale_semigroup(t, &mut c);
        Ok(GridFunction::from_raw(self.domain, self.inverse(&c)))
    }

    /// `int_0^t S(t - s) v ds` for `v` constant in time.
    pub fn phi1_apply(&self, t: f64, v: &GridFunction) -> Result<GridFunction> {
        check_positive_time(t)?;
        self.check_domain(v.domain())?;
        let mut c = self.forward(v.values());
        for (ck, &lam) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= phi1_weight(lam, t);
        }
        Ok(GridFunction::from_raw(self.domain, self.inverse(&c)))
    }

    /// `int_0^t S(t - s) (s/t) v ds`, the weight of a forcing ramping linearly from 0 to `v`.
    pub fn phi2_apply(&self, t: f64, v: &GridFunction) -> Result<GridFunction> {
        check_positive_time(t)?;
        self.check_domain(v.domain())?;
        let mut c = self.forward(v.values());
        for (ck, &lam) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= phi2_weight(lam, t);
        }
        Ok(GridFunction::from_raw(self.domain, self.inverse(&c)))
    }

    pub fn smoothing_constant(&self, t: f64, p: f64, q: f64) -> Result<SmoothingConstant> {
        smoothing_constant(t, p, q, self.k_dim)
    }

    fn check_domain(&self, d: &Domain1D) -> Result<()> {
        if *d == self.domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub(crate) fn forward(&self, values: &[f64]) -> Vec<f64> {
        let n = self.domain.n_interior();
        let w = 2.0 / (n + 1) as f64;
        self.sines
            .chunks_exact(n)
            .map(|row| w * row.iter().zip(values).map(|(s, u)| s * u).sum::<f64>())
            .collect()
    }

    pub(crate) fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.domain.n_interior();
        let mut out = vec![0.0; n];
        for (row, &c) in self.sines.chunks_exact(n).zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            for (o, s) in out.iter_mut().zip(row) {
                *o += c * s;
            }
        }
        out
    }

    pub(crate) fn scale_semigroup(&self, t: f64, coeffs: &mut [f64]) {
        if t == 0.0 {
            return;
        }
        for (c, &lam) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= (-lam * t).exp();
        }
    }
}

fn check_nonnegative_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTime { t, reason: "semigroup time must be nonnegative" })
    }
}

fn check_positive_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTime { t, reason: "integrator step must be positive" })
    }
}

/// `(1 - e^{-lambda t}) / lambda`, tending to `t` as `lambda t -> 0`.
pub fn phi1_weight(lambda: f64, t: f64) -> f64 {
    let z = lambda * t;
    if z.abs() < PHI1_SERIES_THRESHOLD {
        t * (1.0 - z / 2.0 + z * z / 6.0)
    } else {
        -(-z).exp_m1() / lambda
    }
}

/// `t (e^{-z} - 1 + z) / z^2` with `z = lambda t`, tending to `t/2`.
pub fn phi2_weight(lambda: f64, t: f64) -> f64 {
    let z = lambda * t;
    if z.abs() < PHI2_SERIES_THRESHOLD {
        t * (0.5 - z / 6.0 + z * z / 24.0 - z.powi(3) / 120.0 + z.powi(4) / 720.0)
    } else {
        t * ((-z).exp_m1() + z) / (z * z)
    }
}
