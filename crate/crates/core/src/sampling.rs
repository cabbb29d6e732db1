//! Seeded sample generators shared by the hypothesis checkers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lp_space::{lp_norm_unchecked, Domain1D, GridFunction};

/// Ranges and counts for sampling-based checks. Every checker is a
/// deterministic function of its `SampleSpec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    pub v_range: (f64, f64),
    /// Number of sine modes in random smooth profiles.
    pub modes: usize,
    /// Restrict random profiles to nonnegative functions.
    pub nonnegative: bool,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            count: 10_000,
            seed: 0,
            t_range: (0.0, 1.0),
            x_range: (0.0, 1.0),
            v_range: (-10.0, 10.0),
            modes: 4,
            nonnegative: false,
        }
    }
}

impl SampleSpec {
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }
}

pub(crate) fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Random smooth Dirichlet-compatible profile `sum_k a_k sin(k pi x / L) / k^2`
/// with `a_k` uniform in `[-1, 1]`. With `nonnegative`, the profile is
/// `sin(pi x / L) * (1.5 + sum_k b_k cos(k pi x / L) / (k^2 sum_j 1/j^2))`, which
/// is nonnegative on `[0, L]`.
pub fn random_smooth_profile(
    domain: Domain1D,
    rng: &mut impl Rng,
    modes: usize,
    nonnegative: bool,
) -> GridFunction {
    let l = domain.length();
    let modes = modes.max(1);
    let coeffs: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let values = if nonnegative {
        let norm: f64 = (1..=modes).map(|k| 1.0 / (k * k) as f64).sum();
        domain
            .nodes()
            .map(|x| {
                let bump: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let k = (i + 1) as f64;
                        b * (k * PI * x / l).cos() / (k * k * norm)
                    })
                    .sum();
                (PI * x / l).sin() * (1.5 + bump)
            })
            .collect()
    } else {
        let mut c = coeffs;
        // Keep the profile away from zero.
        if c.iter().all(|v| v.abs() < 1e-3) {
            c[0] = 1.0;
        }
        domain
            .nodes()
            .map(|x| {
                c.iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let k = (i + 1) as f64;
                        a * (k * PI * x / l).sin() / (k * k)
                    })
                    .sum()
            })
            .collect()
    };
    GridFunction::from_raw(domain, values)
}

/// Rescales `u` to have `L^p` norm `target`. Zero input stays zero.
pub fn rescale_to_norm(u: &GridFunction, p: f64, target: f64) -> GridFunction {
    let n = lp_norm_unchecked(u.values(), u.domain().dx(), p);
    if n == 0.0 {
        return u.clone();
    }
    u.scaled(target / n)
}
