//! Discrete `L^p` calculus on a uniform 1-D Dirichlet grid.
//!
//! Integrals are rectangle-rule sums with weight `dx` over the interior
//! nodes `x_i = i * dx`, `i = 1..=N`. At `p = 2` this is exactly the
//! Parseval-compatible inner product of the discrete sine transform.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interval `[0, L]` with `N` interior nodes and spacing `L / (N + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain1D {
    length: f64,
    n_interior: usize,
}

impl Domain1D {
    pub fn new(length: f64, n_interior: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidDomain(format!("length must be positive, got {length}")));
        }
        if n_interior < 2 {
            return Err(Error::InvalidDomain(format!(
                "at least 2 interior nodes required, got {n_interior}"
            )));
        }
        Ok(Self { length, n_interior })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n_interior + 1) as f64
    }

    /// Position of interior node `i` (0-based, so `x(0) = dx`).
    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_interior).map(move |i| self.x(i))
    }
}

/// Values of a real function on the interior nodes of a [`Domain1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Domain1D,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Domain1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.n_interior() {
            return Err(Error::InvalidDomain(format!(
                "expected {} values, got {}",
                domain.n_interior(),
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { context: "grid function", value: bad });
        }
        Ok(Self { domain, values })
    }

    pub fn zeros(domain: Domain1D) -> Self {
        Self { domain, values: vec![0.0; domain.n_interior()] }
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(domain: Domain1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(domain, domain.nodes().map(f).collect())
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_raw(domain: Domain1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), domain.n_interior());
        Self { domain, values }
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &GridFunction) -> Result<Self> {
        self.check_same_domain(other)?;
        Ok(Self::from_raw(
            self.domain,
            self.values.iter().zip(&other.values).map(|(a, b)| a + alpha * b).collect(),
        ))
    }

    pub fn check_same_domain(&self, other: &GridFunction) -> Result<()> {
        if self.domain == other.domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for GridFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl Neg for &GridFunction {
    type Output = GridFunction;

    fn neg(self) -> GridFunction {
        self.scaled(-1.0)
    }
}

impl Mul<&GridFunction> for f64 {
    type Output = GridFunction;

    fn mul(self, rhs: &GridFunction) -> GridFunction {
        rhs.scaled(self)
    }
}

// The operator forms panic on a domain mismatch; use `axpy` for the fallible form.
impl Add for &GridFunction {
    type Output = GridFunction;

    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(1.0, rhs).expect("domain mismatch in grid function addition")
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;

    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(-1.0, rhs).expect("domain mismatch in grid function subtraction")
    }
}

fn check_exponent(p: f64, min: f64) -> Result<()> {
    if p.is_finite() && p >= min {
        Ok(())
    } else {
        Err(Error::InvalidExponent(format!("p = {p} must satisfy p >= {min}")))
    }
}

/// Rectangle-rule `L^p` norm `(dx * sum |u_i|^p)^(1/p)`.
pub fn lp_norm(u: &GridFunction, p: f64) -> Result<f64> {
    check_exponent(p, 1.0)?;
    Ok(lp_norm_unchecked(u.values(), u.domain().dx(), p))
}

pub(crate) fn lp_norm_unchecked(values: &[f64], dx: f64, p: f64) -> f64 {
    // Scale by the max entry so large p does not overflow.
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        let s: f64 = values.iter().map(|v| (v / scale) * (v / scale)).sum();
        return scale * (dx * s).sqrt();
    }
    let s: f64 = values.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    scale * (dx * s).powf(1.0 / p)
}

/// `<J(u), v>` for the `L^p` duality map, `||u||^(2-p) * dx * sum |u_i|^(p-2) u_i v_i`.
pub fn duality_pairing(u: &GridFunction, v: &GridFunction, p: f64) -> Result<f64> {
    check_exponent(p, 2.0)?;
    u.check_same_domain(v)?;
    let norm = lp_norm_unchecked(u.values(), u.domain().dx(), p);
    if norm == 0.0 {
        return Err(Error::ZeroElement);
    }
    // Work with u / ||u|| so the weights stay O(1):
    // <J(u), v> = ||u|| * dx * sum |w_i|^(p-2) w_i v_i, with w = u / ||u||.
    let dx = u.domain().dx();
    let s: f64 = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(&ui, &vi)| {
            let w = ui / norm;
            if p == 2.0 {
                w * vi
            } else {
                w.abs().powf(p - 2.0) * w * vi
            }
        })
        .sum();
    Ok(norm * dx * s)
}

/// Upper semi-inner product `[u, v]_+`: the one-sided directional derivative of
/// the norm at `u` in direction `v`. Equals `||v||_p` at `u = 0`.
pub fn upper_semi_inner(u: &GridFunction, v: &GridFunction, p: f64) -> Result<f64> {
    check_exponent(p, 2.0)?;
    u.check_same_domain(v)?;
    let norm = lp_norm_unchecked(u.values(), u.domain().dx(), p);
    if norm == 0.0 {
        return Ok(lp_norm_unchecked(v.values(), v.domain().dx(), p));
    }
    Ok(duality_pairing(u, v, p)? / norm)
}
