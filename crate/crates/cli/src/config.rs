//! TOML problem description and its translation into solver objects.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use nonlocal_heat::solver::Shell;
use nonlocal_heat::{
    Domain1D, Exponents, Forcing, GridFunction, NonlocalCondition, Nonlinearity, Problem, SampleSpec, ScalarMap,
    SolverConfig, SpectralOperator, TimeGrid, TimeProfile,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainSection,
    pub time: TimeSection,
    pub exponents: ExponentSection,
    pub nonlinearity: NonlinearitySpec,
    pub condition: ConditionSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial: InitialGuess,
    #[serde(default)]
    pub verification: VerificationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "one")]
    pub k_dim: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "M")]
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSection {
    pub p: f64,
    pub q: f64,
}

/// Catalogue entry by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Zero,
    /// `-c v`
    Linear { c: f64 },
    /// `coefficient v^alpha`
    OddPower {
        alpha: u32,
        #[serde(default = "minus_one")]
        coefficient: f64,
    },
    Model,
    ChafeeInfante { lambda: f64 },
    /// `-c v + s(t, x)`
    ForcedLinear {
        #[serde(default)]
        c: f64,
        #[serde(default)]
        forcing: Vec<ForcingTerm>,
    },
}

/// `amplitude (1 + oscillation cos(2 pi t / period)) sin(mode pi x / L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTerm {
    #[serde(default = "one")]
    pub mode: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub oscillation: f64,
    #[serde(default)]
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConditionSpec {
    Periodic,
    Antiperiodic,
    Multipoint {
        weights: Vec<f64>,
        times: Vec<f64>,
        #[serde(default)]
        gamma: GammaSpec,
    },
    /// `u(0)(x) = int_0^T alpha gamma(u(t)(x)) dt`.
    Integral {
        alpha: f64,
        #[serde(default)]
        gamma: GammaSpec,
    },
    /// `u(0) = int_0^T alpha u(t) dt`, with `|u(t)|` when `absolute`.
    MeanValue {
        alpha: f64,
        #[serde(default)]
        absolute: bool,
    },
    /// `u(0) = amplitude sin(mode pi x / L)`.
    Fixed {
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    #[default]
    Identity,
    Tanh,
    Sin,
}

impl GammaSpec {
    fn map(self) -> ScalarMap {
        match self {
            Self::Identity => ScalarMap::identity(),
            Self::Tanh => ScalarMap::tanh(),
            Self::Sin => ScalarMap::sin(),
        }
    }
}

/// Starting trajectory `amplitude sin(mode pi x / L)`, constant in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialGuess {
    pub amplitude: f64,
    pub mode: u32,
}

impl Default for InitialGuess {
    fn default() -> Self {
        Self { amplitude: 0.0, mode: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerificationSection {
    pub n_list: Vec<u32>,
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    /// Shell for the transversality check; defaults to `(r_ball / 10, r_outer)`.
    pub shell: Option<Shell>,
    /// Restrict transversality samples to nonnegative profiles.
    pub nonnegative_samples: bool,
    pub n_periods: usize,
}

impl Default for VerificationSection {
    fn default() -> Self {
        Self {
            n_list: vec![8, 16, 32, 64],
            lambda_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            seed: 0,
            samples: 10_000,
            shell: None,
            nonnegative_samples: false,
            n_periods: 3,
        }
    }
}

fn one<T: From<u8>>() -> T {
    T::from(1)
}

fn minus_one() -> f64 {
    -1.0
}

/// Everything a command needs, built once from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ProblemConfig,
    pub problem: Problem,
    pub exponents: Exponents,
    pub initial_guess: Option<GridFunction>,
}

impl Resolved {
    pub fn domain(&self) -> Domain1D {
        *self.problem.operator.domain()
    }

    pub fn sample_spec(&self) -> SampleSpec {
        let v = &self.config.verification;
        SampleSpec {
            count: v.samples,
            seed: v.seed,
            t_range: (0.0, self.config.time.horizon),
            x_range: (0.0, self.config.domain.length),
            nonnegative: v.nonnegative_samples,
            ..SampleSpec::default()
        }
    }

    pub fn shell(&self) -> Shell {
        self.config
            .verification
            .shell
            .unwrap_or(Shell { r0: self.config.solver.r_ball / 10.0, r_outer: self.config.solver.r_outer })
    }
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn resolve(self) -> Result<Resolved, CliError> {
        let cfg = |e: nonlocal_heat::Error| CliError::Config(e.to_string());
        let domain = Domain1D::new(self.domain.length, self.domain.n).map_err(cfg)?;
        let grid = TimeGrid::new(self.time.horizon, self.time.steps).map_err(cfg)?;
        let exponents = Exponents::new(self.exponents.p, self.exponents.q, self.domain.k_dim).map_err(|e| {
            CliError::Config(format!("{e} (need 2 <= q < p, and pq/(p-q) > k_dim/2 when k_dim > 2)"))
        })?;
        self.solver.validate().map_err(cfg)?;
        let v = &self.verification;
        if v.n_list.is_empty() || v.n_list[0] == 0 || v.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("verification.n_list must be strictly increasing positive integers".into()));
        }
        if v.lambda_grid.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(CliError::Config("verification.lambda_grid values must lie in [0, 1]".into()));
        }
        if v.n_periods == 0 {
            return Err(CliError::Config("verification.n_periods must be positive".into()));
        }
        let l = self.domain.length;
        let nonlinearity = self.nonlinearity.build(exponents, l)?;
        let condition = self.condition.build(domain, l)?;
        let initial_guess = (self.initial.amplitude != 0.0)
            .then(|| sine(domain, l, self.initial.amplitude, self.initial.mode))
            .transpose()?;
        let problem = Problem {
            nonlinearity,
            condition,
            operator: SpectralOperator::new(domain).with_space_dim(self.domain.k_dim),
            grid,
            p: self.exponents.p,
        };
        Ok(Resolved { config: self, problem, exponents, initial_guess })
    }
}

fn sine(domain: Domain1D, l: f64, amplitude: f64, mode: u32) -> Result<GridFunction, CliError> {
    GridFunction::from_fn(domain, |x| amplitude * (mode as f64 * PI * x / l).sin())
        .map_err(|e| CliError::Config(e.to_string()))
}

impl NonlinearitySpec {
    pub fn build(&self, ex: Exponents, length: f64) -> Result<Nonlinearity, CliError> {
        Ok(match *self {
            Self::Zero => Nonlinearity::zero(ex),
            Self::Linear { c } => Nonlinearity::linear(c, ex),
            Self::OddPower { alpha, coefficient } => {
                Nonlinearity::odd_power(alpha, coefficient, ex).map_err(|e| CliError::Config(e.to_string()))?
            }
            Self::Model => Nonlinearity::model(ex),
            Self::ChafeeInfante { lambda } => Nonlinearity::chafee_infante(lambda, ex),
            Self::ForcedLinear { c, ref forcing } => Nonlinearity::forced_linear(c, build_forcing(forcing, length)?, ex),
        })
    }
}

fn build_forcing(terms: &[ForcingTerm], length: f64) -> Result<Forcing, CliError> {
    if terms.is_empty() {
        return Ok(Forcing::zero());
    }
    let mut period = None;
    for term in terms {
        if term.mode == 0 {
            return Err(CliError::Config("forcing modes start at 1".into()));
        }
        if term.oscillation != 0.0 {
            let tp = term
                .period
                .filter(|t| t.is_finite() && *t > 0.0)
                .ok_or_else(|| CliError::Config("an oscillating forcing term needs a positive period".into()))?;
            match period {
                None => period = Some(tp),
                Some(prev) if prev == tp => {}
                Some(_) => return Err(CliError::Config("all oscillating forcing terms must share one period".into())),
            }
        }
    }
    let terms = terms.to_vec();
    let forcing = Forcing::new("modes", move |t, x| {
        terms
            .iter()
            .map(|term| {
                let osc = match term.period {
                    Some(tp) if term.oscillation != 0.0 => term.oscillation * (TAU * t / tp).cos(),
                    _ => 0.0,
                };
                term.amplitude * (1.0 + osc) * (term.mode as f64 * PI * x / length).sin()
            })
            .sum()
    });
    Ok(match period {
        Some(tp) => forcing.with_period(tp),
        None => Forcing::steady("modes", move |x| forcing.eval(0.0, x)),
    })
}

impl ConditionSpec {
    pub fn build(&self, domain: Domain1D, length: f64) -> Result<NonlocalCondition, CliError> {
        Ok(match self {
            Self::Periodic => NonlocalCondition::Periodic,
            Self::Antiperiodic => NonlocalCondition::Antiperiodic,
            Self::Multipoint { weights, times, gamma } => {
                NonlocalCondition::multipoint(weights.clone(), times.clone(), gamma.map())
                    .map_err(|e| CliError::Config(e.to_string()))?
            }
            &Self::Integral { alpha, gamma } => {
                let map = gamma.map();
                let g = map.clone();
                let bound = TimeProfile::constant(alpha.abs() * map.lipschitz().unwrap_or(f64::INFINITY));
                NonlocalCondition::integral(move |_, _, v| alpha * g.apply(v), Some(bound))
            }
            &Self::MeanValue { alpha, absolute } => {
                if alpha < 0.0 {
                    return Err(CliError::Config("mean_value alpha must be nonnegative".into()));
                }
                NonlocalCondition::mean_value(TimeProfile::constant(alpha), absolute)
            }
            &Self::Fixed { amplitude, mode } => NonlocalCondition::Fixed { u0: sine(domain, length, amplitude, mode)? },
        })
    }
}
