//! Reaction terms `h(t, x, v)`, their superposition operators, and sampling
//! checks of the structural hypotheses (growth, sign, monotonicity).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::checks::{CheckReport, Witness};
use crate::error::{Error, Result};
use crate::lp_space::{lp_norm_unchecked, GridFunction};
use crate::sampling::{uniform, SampleSpec};

pub type ReactionFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const SIGN_TOL: f64 = 1e-12;

/// Integrability exponents with `2 <= q < p`, and `pq/(p-q) > k/2` in dimension `k > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
}

impl Exponents {
    pub fn new(p: f64, q: f64, k_dim: u32) -> Result<Self> {
        if !(p.is_finite() && q >= 2.0 && q < p) {
            return Err(Error::InvalidExponent(format!(
                "growth condition (h3) needs 2 <= q < p < inf, got q = {q}, p = {p}"
            )));
        }
        if k_dim > 2 && p * q / (p - q) <= k_dim as f64 / 2.0 {
            return Err(Error::InvalidExponent(format!(
                "growth condition (h3) needs pq/(p-q) > k/2 for k = {k_dim}, got {}",
                p * q / (p - q)
            )));
        }
        Ok(Self { p, q })
    }

    pub fn ratio(&self) -> f64 {
        self.p / self.q
    }
}

/// A source term `s(t, x)`.
#[derive(Clone)]
pub struct Forcing {
    name: String,
    f: SpaceTimeFn,
    period: Option<f64>,
    autonomous: bool,
    is_zero: bool,
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Forcing").field("name", &self.name).field("period", &self.period).finish()
    }
}

impl Forcing {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f), period: None, autonomous: false, is_zero: false }
    }

    pub fn zero() -> Self {
        Self { is_zero: true, autonomous: true, ..Self::new("zero", |_, _| 0.0) }
    }

    /// Time-independent profile `s(x)`.
    pub fn steady(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { autonomous: true, ..Self::new(name, move |_, x| f(x)) }
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

/// Growth data `|h(t,x,v)| <= ell(t,x) + m |v|^(p/q)`.
#[derive(Clone)]
pub struct Growth {
    pub ell: SpaceTimeFn,
    pub ell_is_zero: bool,
    pub m: f64,
    pub exponents: Exponents,
}

impl fmt::Debug for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Growth")
            .field("ell_is_zero", &self.ell_is_zero)
            .field("m", &self.m)
            .field("exponents", &self.exponents)
            .finish()
    }
}

impl Growth {
    pub fn new(ell: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, m: f64, exponents: Exponents) -> Self {
        Self { ell: Arc::new(ell), ell_is_zero: false, m, exponents }
    }

    pub fn constant(ell: f64, m: f64, exponents: Exponents) -> Self {
        Self { ell_is_zero: ell == 0.0, ..Self::new(move |_, _| ell, m, exponents) }
    }

    pub fn bound(&self, t: f64, x: f64, v: f64) -> f64 {
        (self.ell)(t, x) + self.m * v.abs().powf(self.exponents.ratio())
    }
}

/// Structural properties a nonlinearity declares about itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Claims {
    /// `v h(t,x,v) <= 0`.
    pub sign_condition: bool,
    /// `(u - v)(h(t,x,u) - h(t,x,v)) <= 0`.
    pub monotone: bool,
    /// `h` does not depend on `t`.
    pub autonomous: bool,
    pub periodic_in_t: Option<f64>,
}

impl Claims {
    /// Whether `h(. , x, v)` is `period`-periodic.
    pub fn is_periodic_with(&self, period: f64) -> bool {
        if self.autonomous {
            return true;
        }
        match self.periodic_in_t {
            Some(tp) => {
                let k = (period / tp).round();
                k >= 1.0 && (period - k * tp).abs() <= 1e-12 * period.max(1.0)
            }
            None => false,
        }
    }
}

/// A Carathéodory reaction term with its growth data and claimed properties.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    eval: ReactionFn,
    growth: Growth,
    claims: Claims,
    is_zero: bool,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("growth", &self.growth)
            .field("claims", &self.claims)
            .finish()
    }
}

impl Nonlinearity {
    /// Registers an arbitrary reaction term. `eval` must be pure.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        growth: Growth,
        claims: Claims,
    ) -> Self {
        Self { name: name.into(), eval: Arc::new(eval), growth, claims, is_zero: false }
    }

    pub fn zero(exponents: Exponents) -> Self {
        let claims = Claims { sign_condition: true, monotone: true, autonomous: true, periodic_in_t: None };
        Self {
            is_zero: true,
            ..Self::custom("zero", |_, _, _| 0.0, Growth::constant(0.0, 0.0, exponents), claims)
        }
    }

    /// `h = -c v`.
    pub fn linear(c: f64, exponents: Exponents) -> Self {
        let claims = Claims {
            sign_condition: c >= 0.0,
            monotone: c >= 0.0,
            autonomous: true,
            periodic_in_t: None,
        };
        // |c v| <= |c| + |c| |v|^r for r >= 1.
        let growth = Growth::constant(c.abs(), c.abs(), exponents);
        Self::custom(format!("linear(c={c})"), move |_, _, v| -c * v, growth, claims)
    }

    /// `h = coefficient * v^alpha` for odd `alpha`; the catalogue default is `coefficient = -1`.
    pub fn odd_power(alpha: u32, coefficient: f64, exponents: Exponents) -> Result<Self> {
        if alpha.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("odd_power needs an odd exponent, got {alpha}")));
        }
        let claims = Claims {
            sign_condition: coefficient <= 0.0,
            monotone: coefficient <= 0.0,
            autonomous: true,
            periodic_in_t: None,
        };
        let growth = power_growth(coefficient.abs(), alpha as f64, exponents);
        let a = alpha as i32;
        Ok(Self::custom(
            format!("odd_power(alpha={alpha}, coefficient={coefficient})"),
            move |_, _, v| coefficient * v.powi(a),
            growth,
            claims,
        ))
    }

    /// `h = -(sin v + 2) v^3 / (1 + t^2)`.
    pub fn model(exponents: Exponents) -> Self {
        // Not monotone: dh/dv = -v^2 (v cos v + 3 sin v + 6) / (1 + t^2) changes sign near |v| = 3 pi.
        let claims = Claims { sign_condition: true, monotone: false, autonomous: false, periodic_in_t: None };
        let growth = power_growth(3.0, 3.0, exponents);
        Self::custom("model", |t, _, v| -(v.sin() + 2.0) * v.powi(3) / (1.0 + t * t), growth, claims)
    }

    /// Chafee–Infante term `lambda (v - v^3)`; violates the sign condition for `0 < |v| < 1`.
    pub fn chafee_infante(lambda: f64, exponents: Exponents) -> Self {
        let claims = Claims {
            sign_condition: lambda == 0.0,
            monotone: lambda == 0.0,
            autonomous: true,
            periodic_in_t: None,
        };
        // |lambda| (|v| + |v|^3) <= 2|lambda| (1 + |v|^r) for r >= 3.
        let a = 2.0 * lambda.abs();
        let growth = if exponents.ratio() >= 3.0 {
            Growth::constant(a, a, exponents)
        } else {
            Growth::constant(0.0, a, exponents)
        };
        Self::custom(
            format!("chafee_infante(lambda={lambda})"),
            move |_, _, v| lambda * (v - v * v * v),
            growth,
            claims,
        )
    }

    /// `h = -c v + s(t, x)`, the workhorse for manufactured solutions.
    pub fn forced_linear(c: f64, forcing: Forcing, exponents: Exponents) -> Self {
        let claims = Claims {
            sign_condition: c >= 0.0 && forcing.is_zero(),
            monotone: c >= 0.0,
            autonomous: forcing.is_autonomous(),
            periodic_in_t: forcing.period(),
        };
        let f = forcing.f.clone();
        let ell = {
            let f = f.clone();
            move |t: f64, x: f64| f(t, x).abs() + c.abs()
        };
        let growth = Growth::new(ell, c.abs(), exponents);
        Self::custom(
            format!("forced_linear(c={c}, forcing={})", forcing.name()),
            move |t, x, v| -c * v + f(t, x),
            growth,
            claims,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn growth(&self) -> &Growth {
        &self.growth
    }

    pub fn claims(&self) -> &Claims {
        &self.claims
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    pub fn eval(&self, t: f64, x: f64, v: f64) -> f64 {
        (self.eval)(t, x, v)
    }
}

/// `|v|^alpha` scaled by `coefficient` fits `ell + m |v|^r` exactly when `r = alpha`
/// and with `ell = m = coefficient` when `r > alpha`.
fn power_growth(coefficient: f64, alpha: f64, exponents: Exponents) -> Growth {
    let r = exponents.ratio();
    if (r - alpha).abs() < 1e-12 {
        Growth::constant(0.0, coefficient, exponents)
    } else if r > alpha {
        Growth::constant(coefficient, coefficient, exponents)
    } else {
        // No bound of this form exists; check_growth reports the violations.
        Growth::constant(0.0, coefficient, exponents)
    }
}

/// Pointwise superposition `f(t, u)(x_i) = h(t, x_i, u_i)`.
pub fn superpose(h: &Nonlinearity, t: f64, u: &GridFunction) -> Result<GridFunction> {
    let d = *u.domain();
    if h.is_zero {
        return Ok(GridFunction::zeros(d));
    }
    let mut out = Vec::with_capacity(u.len());
    for (i, &v) in u.values().iter().enumerate() {
        let x = d.x(i);
        let y = h.eval(t, x, v);
        if !y.is_finite() {
            return Err(Error::NonlinearityEvaluation { t, x, v });
        }
        out.push(y);
    }
    Ok(GridFunction::from_raw(d, out))
}

/// Samples `|h| <= ell + m |v|^(p/q)`.
pub fn check_growth(h: &Nonlinearity, spec: &SampleSpec) -> CheckReport {
    let mut report = CheckReport::new("growth");
    let mut rng = spec.rng();
    for _ in 0..spec.count {
        let t = uniform(&mut rng, spec.t_range);
        let x = uniform(&mut rng, spec.x_range);
        let v = uniform(&mut rng, spec.v_range);
        let bound = h.growth.bound(t, x, v);
        let margin = h.eval(t, x, v).abs() - bound;
        report.record(margin, 1e-12 * bound.max(1.0), |excess| Witness { t, x, v, v_other: None, excess });
    }
    report
}

/// Samples `v h(t,x,v) <= 0`.
pub fn check_sign(h: &Nonlinearity, spec: &SampleSpec) -> CheckReport {
    let mut report = CheckReport::new("sign");
    let mut rng = spec.rng();
    for _ in 0..spec.count {
        let t = uniform(&mut rng, spec.t_range);
        let x = uniform(&mut rng, spec.x_range);
        let v = uniform(&mut rng, spec.v_range);
        let margin = v * h.eval(t, x, v);
        report.record(margin, SIGN_TOL, |excess| Witness { t, x, v, v_other: None, excess });
    }
    report
}

/// Samples `(u - v)(h(t,x,u) - h(t,x,v)) <= 0` over pairs.
pub fn check_monotone(h: &Nonlinearity, spec: &SampleSpec) -> CheckReport {
    let mut report = CheckReport::new("monotone");
    let mut rng = spec.rng();
    for _ in 0..spec.count {
        let t = uniform(&mut rng, spec.t_range);
        let x = uniform(&mut rng, spec.x_range);
        let u = uniform(&mut rng, spec.v_range);
        let v = uniform(&mut rng, spec.v_range);
        let margin = (u - v) * (h.eval(t, x, u) - h.eval(t, x, v));
        report.record(margin, SIGN_TOL, |excess| Witness { t, x, v: u, v_other: Some(v), excess });
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VainbergReport {
    /// `||f(t, u)||_q`.
    pub lhs: f64,
    /// `||ell(t, .)||_q + m ||u||_p^(p/q)`.
    pub rhs: f64,
    pub pass: bool,
}

/// Compares `||f(t,u)||_q` against the Minkowski consequence of the growth bound.
pub fn vainberg_bound(h: &Nonlinearity, t: f64, u: &GridFunction) -> Result<VainbergReport> {
    let Exponents { p, q } = h.growth.exponents;
    let d = *u.domain();
    let f = superpose(h, t, u)?;
    let lhs = lp_norm_unchecked(f.values(), d.dx(), q);
    let ell_norm = if h.growth.ell_is_zero {
        0.0
    } else {
        let ell: Vec<f64> = d.nodes().map(|x| (h.growth.ell)(t, x)).collect();
        lp_norm_unchecked(&ell, d.dx(), q)
    };
    let rhs = ell_norm + h.growth.m * lp_norm_unchecked(u.values(), d.dx(), p).powf(p / q);
    Ok(VainbergReport { lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-10) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_space::Domain1D;
    use std::f64::consts::PI;

    fn ex(p: f64, q: f64) -> Exponents {
        Exponents::new(p, q, 1).unwrap()
    }

    fn spec() -> SampleSpec {
        SampleSpec { count: 20_000, seed: 11, ..SampleSpec::default() }
    }

    #[test]
    fn exponent_validation() {
        assert!(Exponents::new(6.0, 2.0, 1).is_ok());
        assert!(Exponents::new(2.0, 2.0, 1).is_err());
        assert!(Exponents::new(3.0, 1.5, 1).is_err());
        assert!(Exponents::new(4.0, 2.0, 3).is_ok());
        // pq/(p-q) = 2.4 <= 3 in k = 6.
        assert!(Exponents::new(12.0, 2.4 * 10.0 / 12.0, 6).is_err());
    }

    #[test]
    fn superpose_examples() {
        let d = Domain1D::new(3.0, 2).unwrap();
        let u = GridFunction::new(d, vec![1.0, -2.0]).unwrap();
        let cube = Nonlinearity::odd_power(3, -1.0, ex(6.0, 2.0)).unwrap();
        assert_eq!(superpose(&cube, 0.0, &u).unwrap().values(), &[-1.0, 8.0]);
        let z = superpose(&Nonlinearity::zero(ex(6.0, 2.0)), 0.3, &u).unwrap();
        assert!(z.is_zero());
        let m = Nonlinearity::model(ex(6.0, 2.0));
        assert!((m.eval(0.0, 0.5, 1.0) + (1f64.sin() + 2.0)).abs() < 1e-15);
        assert!((m.eval(0.0, 0.5, 1.0) + 2.84147).abs() < 1e-5);
    }

    #[test]
    fn superpose_reports_non_finite() {
        let d = Domain1D::new(1.0, 3).unwrap();
        let u = GridFunction::new(d, vec![0.0, 1e200, 0.0]).unwrap();
        let cube = Nonlinearity::odd_power(3, -1.0, ex(6.0, 2.0)).unwrap();
        assert!(matches!(
            superpose(&cube, 0.0, &u),
            Err(Error::NonlinearityEvaluation { v, .. }) if v == 1e200
        ));
    }

    #[test]
    fn superpose_is_local() {
        let d = Domain1D::new(1.0, 10).unwrap();
        let m = Nonlinearity::model(ex(6.0, 2.0));
        let u = GridFunction::from_fn(d, |x| x.sin()).unwrap();
        let mut vals = u.values().to_vec();
        vals[4] += 0.5;
        let v = GridFunction::new(d, vals).unwrap();
        let fu = superpose(&m, 0.2, &u).unwrap();
        let fv = superpose(&m, 0.2, &v).unwrap();
        for i in 0..10 {
            assert_eq!(fu[i] == fv[i], i != 4);
        }
    }

    #[test]
    fn growth_checks() {
        let cube = Nonlinearity::odd_power(3, -1.0, ex(6.0, 2.0)).unwrap();
        assert!(check_growth(&cube, &spec()).pass);
        assert!(check_growth(&Nonlinearity::model(ex(6.0, 2.0)), &spec()).pass);
        let exp = Nonlinearity::custom(
            "-exp",
            |_, _, v| -v.exp(),
            Growth::constant(0.0, 1.0, ex(4.0, 2.0)),
            Claims::default(),
        );
        let r = check_growth(&exp, &spec());
        assert!(!r.pass);
        assert!(r.witnesses.iter().any(|w| w.v > 5.0));
    }

    #[test]
    fn sign_checks() {
        assert!(check_sign(&Nonlinearity::model(ex(6.0, 2.0)), &spec()).pass);
        let lin = Nonlinearity::linear(-1.0, ex(4.0, 2.0));
        let r = check_sign(&lin, &spec());
        assert!(!r.pass);
        let w = r.first_witness().unwrap();
        assert!(w.v * lin.eval(w.t, w.x, w.v) > 0.0);
        for a in [3, 5, 7] {
            let h = Nonlinearity::odd_power(a, -1.0, ex(a as f64 * 2.0, 2.0)).unwrap();
            assert!(check_sign(&h, &spec()).pass);
        }
    }

    #[test]
    fn monotone_checks() {
        let cube = Nonlinearity::odd_power(3, -1.0, ex(6.0, 2.0)).unwrap();
        assert!(check_monotone(&cube, &spec()).pass);
        let pos = Nonlinearity::odd_power(3, 1.0, ex(6.0, 2.0)).unwrap();
        assert!(!check_monotone(&pos, &spec()).pass);
        let atan = Nonlinearity::custom(
            "-atan",
            |_, _, v| -v.atan(),
            Growth::constant(2.0, 1.0, ex(4.0, 2.0)),
            Claims { sign_condition: true, monotone: true, autonomous: true, periodic_in_t: None },
        );
        assert!(check_monotone(&atan, &spec()).pass);
    }

    #[test]
    fn claims_agree_with_checkers() {
        let e = ex(6.0, 2.0);
        let forcing = Forcing::steady("bump", |x| (PI * x).sin());
        let catalogue = vec![
            Nonlinearity::zero(e),
            Nonlinearity::linear(2.0, e),
            Nonlinearity::linear(-0.5, e),
            Nonlinearity::odd_power(3, -1.0, e).unwrap(),
            Nonlinearity::odd_power(5, -1.0, e).unwrap(),
            Nonlinearity::odd_power(7, -1.0, e).unwrap(),
            Nonlinearity::odd_power(3, 1.0, e).unwrap(),
            Nonlinearity::model(e),
            Nonlinearity::chafee_infante(4.0, e),
            Nonlinearity::forced_linear(1.0, forcing, e),
            Nonlinearity::forced_linear(0.0, Forcing::zero(), e),
        ];
        let spec = SampleSpec { count: 100_000, seed: 3, ..SampleSpec::default() };
        for h in &catalogue {
            assert_eq!(check_sign(h, &spec).pass, h.claims().sign_condition, "{}", h.name());
            assert_eq!(check_monotone(h, &spec).pass, h.claims().monotone, "{}", h.name());
        }
    }

    #[test]
    fn vainberg_examples() {
        let d = Domain1D::new(1.0, 200).unwrap();
        let cube = Nonlinearity::odd_power(3, -1.0, ex(6.0, 2.0)).unwrap();
        let z = vainberg_bound(&cube, 0.0, &GridFunction::zeros(d)).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        assert!(z.pass);
        let u = GridFunction::from_fn(d, |x| (PI * x).sin()).unwrap();
        let r = vainberg_bound(&cube, 0.0, &u).unwrap();
        assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.rhs);
        assert!(r.pass);
    }

    #[test]
    fn periodicity_claims() {
        let c = Claims { periodic_in_t: Some(0.5), ..Claims::default() };
        assert!(c.is_periodic_with(1.0));
        assert!(!c.is_periodic_with(0.75));
        let a = Claims { autonomous: true, ..Claims::default() };
        assert!(a.is_periodic_with(3.3));
    }
}
