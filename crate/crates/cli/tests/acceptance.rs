//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use nlheat_cli::{cmd_extend, cmd_family, cmd_solve, cmd_verify, RunOptions};
use nonlocal_heat::nonlocal::{check_g2, evaluate_g, lipschitz_estimate};
use nonlocal_heat::oracle::{expm_apply, linear_periodic_closed_form, manufacture, FdOperator, ManufacturedProfile};
use nonlocal_heat::sampling::random_smooth_profile;
use nonlocal_heat::solver::{benilan_gap, constant_guess};
use nonlocal_heat::*;
use rand::Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn ex(p: f64) -> Exponents {
    Exponents::new(p, 2.0, 1).unwrap()
}

fn l2(u: &GridFunction) -> f64 {
    lp_norm(u, 2.0).unwrap()
}

fn c1_semigroup() -> Outcome {
    let d = Domain1D::new(1.0, 128).unwrap();
    let op = SpectralOperator::new(d);
    let mut rng = SampleSpec::default().with_seed(1).rng();
    let (mut worst_law, mut worst_contr) = (0.0_f64, f64::NEG_INFINITY);
    for k in 0..100 {
        let u = if k % 2 == 0 {
            let vals = (0..d.n_interior()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            GridFunction::new(d, vals).unwrap()
        } else {
            random_smooth_profile(d, &mut rng, 8, false)
        };
        let (t, s) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let a = op.apply_semigroup(t + s, &u).unwrap();
        let b = op.apply_semigroup(t, &op.apply_semigroup(s, &u).unwrap()).unwrap();
        let n = l2(&u);
        worst_law = worst_law.max(l2(&a.axpy(-1.0, &b).unwrap()) / n);
        worst_contr = worst_contr.max(l2(&op.apply_semigroup(t, &u).unwrap()) - n);
    }
    ensure(worst_law <= 1e-12, format!("law defect {worst_law:e}"))?;
    ensure(worst_contr <= 1e-14, format!("norm growth {worst_contr:e}"))?;
    Ok(format!("max law defect {worst_law:.2e}, max norm growth {worst_contr:.2e}"))
}

fn c2_smoothing() -> Outcome {
    let d = Domain1D::new(1.0, 255).unwrap();
    let op = SpectralOperator::new(d);
    let mut rng = SampleSpec::default().with_seed(2).rng();
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let xi = random_smooth_profile(d, &mut rng, 8, false);
        let t = 10f64.powf(rng.gen_range(-2.0..0.0));
        let c = smoothing_constant(t, 4.0, 2.0, 1).unwrap().value;
        let lhs = lp_norm(&op.apply_semigroup(t, &xi).unwrap(), 4.0).unwrap();
        worst = worst.max(lhs / (1.05 * c * l2(&xi)));
    }
    ensure(worst <= 1.0, format!("ratio {worst}"))?;
    Ok(format!("max ||S(t)xi||_4 / (1.05 C(t) ||xi||_2) = {worst:.4}"))
}

fn c3_duality() -> Outcome {
    let d = Domain1D::new(1.0, 63).unwrap();
    let mut rng = SampleSpec::default().with_seed(3).rng();
    let (mut worst_pair, mut worst_dq) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let p = rng.gen_range(2.0..8.0);
        let u = random_smooth_profile(d, &mut rng, 5, false);
        let v = random_smooth_profile(d, &mut rng, 5, false);
        let n = lp_norm(&u, p).unwrap();
        let j = duality_pairing(&u, &u, p).unwrap();
        worst_pair = worst_pair.max((j - n * n).abs() / (n * n));
        let h = 1e-6;
        let dq = (lp_norm(&u.axpy(h, &v).unwrap(), p).unwrap() - n) / h;
        worst_dq = worst_dq.max((dq - upper_semi_inner(&u, &v, p).unwrap()).abs());
    }
    ensure(worst_pair <= 1e-12, format!("pairing rel error {worst_pair:e}"))?;
    ensure(worst_dq <= 1e-4, format!("difference quotient gap {worst_dq:e}"))?;
    Ok(format!("pairing rel error {worst_pair:.1e}, [u,v]+ vs quotient {worst_dq:.1e}"))
}

fn c4_manufactured() -> Outcome {
    let d = Domain1D::new(1.0, 128).unwrap();
    let op = SpectralOperator::new(d);
    let profile = ManufacturedProfile::decaying_mode(1.0);
    let h = Nonlinearity::forced_linear(0.0, manufacture(&profile, &Nonlinearity::zero(ex(4.0))), ex(4.0));
    let xi = GridFunction::from_fn(d, |x| profile.eval(0.0, x)).unwrap();
    let mut lines = Vec::new();
    for (stepper, band) in [(Stepper::ExponentialEuler, (1.7, 2.3)), (Stepper::Etd2, (3.4, 4.6))] {
        let err = |m: usize| {
            let grid = TimeGrid::new(1.0, m).unwrap();
            let sol = cauchy_solve(&xi, &h, &op, grid, stepper, None).unwrap();
            sol.trajectory.sup_distance(&profile.sample(d, grid).unwrap(), 2.0).unwrap()
        };
        let (e1, e2) = (err(2048), err(4096));
        let ratio = e1 / e2;
        ensure(e1 <= 5e-3, format!("{stepper:?} error {e1:e} at M=2048"))?;
        ensure(ratio >= band.0 && ratio <= band.1, format!("{stepper:?} ratio {ratio}"))?;
        lines.push(format!("{stepper:?} err {e1:.2e} ratio {ratio:.3}"));
    }
    Ok(lines.join("; "))
}

fn c5_linear_periodic() -> Outcome {
    let d = Domain1D::new(PI, 64).unwrap();
    let op = SpectralOperator::new(d);
    let grid = TimeGrid::new(1.0, 1024).unwrap();
    let s = Forcing::steady("modes", |x| 3.0 * x.sin() - 1.5 * (2.0 * x).sin() + 0.5 * (3.0 * x).sin());
    let exact = linear_periodic_closed_form(&op, 0.0, &s, grid).unwrap();
    let pb = Problem {
        nonlinearity: Nonlinearity::forced_linear(0.0, s, ex(4.0)),
        condition: NonlocalCondition::Periodic,
        operator: op.clone(),
        grid,
        p: 2.0,
    };
    let cfg = SolverConfig { picard_tol: 1e-12, ..SolverConfig::default() };
    let guess = constant_guess(&GridFunction::from_fn(d, |x| 2.0 * x.sin()).unwrap(), grid);
    let sol = solve_nonlocal(&pb, &cfg, Some(&guess)).map_err(|e| e.to_string())?;
    let err = sol.trajectory.sup_distance(&exact, 2.0).unwrap();
    let factor = sol.report.contraction_factor().ok_or("no contraction factor")?;
    let bound = (-op.spectral_gap() * grid.horizon).exp() + 0.05;
    ensure(err <= 1e-6, format!("closed-form mismatch {err:e}"))?;
    ensure(factor <= bound, format!("contraction {factor} > {bound}"))?;
    Ok(format!("mismatch {err:.2e}, contraction {factor:.4} <= {bound:.4}, {} iterations", sol.report.iterations))
}

fn c6_ex_finale() -> Outcome {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = RunOptions { out_dir: out.path().to_path_buf(), seed: None };
    let cfg = config("ex-finale.toml");
    let v = cmd_verify(&cfg, &opts).map_err(|e| e.to_string())?;
    let checks = v.report["result"]["checks"].as_array().ok_or("no checks")?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c["required"] == true && c["pass"] != true)
        .map(|c| c["name"].as_str().unwrap_or("?"))
        .collect();
    ensure(v.exit_code == 0 && failed.is_empty(), format!("verify exit {} failed {failed:?}", v.exit_code))?;
    for name in ["growth", "sign", "g2", "transversality(n=8)"] {
        ensure(checks.iter().any(|c| c["name"] == name && c["pass"] == true), format!("{name} missing"))?;
    }

    let s = cmd_solve(&cfg, &opts).map_err(|e| e.to_string())?;
    let r = &s.report["result"];
    ensure(s.exit_code == 0 && r["converged"] == true, "solve did not converge")?;
    let sup = r["sup_norm"].as_f64().unwrap();
    let outer = r["r_outer"].as_f64().unwrap();
    ensure(sup < outer, format!("sup {sup} >= R_outer {outer}"))?;

    let f = cmd_family(&cfg, &opts).map_err(|e| e.to_string())?;
    ensure(f.exit_code == 0 && f.report["result"]["nonincreasing"] == true, "family gaps not nonincreasing")?;
    let rows = f.report["result"]["cauchy_table"].as_array().map(|a| a.len()).unwrap_or(0);
    ensure(rows == 3, format!("{rows} gap rows"))?;
    Ok(format!(
        "verify {} checks ok, solve {} iterations sup {sup:.3e}, family {rows} rows nonincreasing",
        checks.len(),
        r["iterations"]
    ))
}

fn c7_uniqueness() -> Outcome {
    let d = Domain1D::new(1.0, 63).unwrap();
    let op = SpectralOperator::new(d);
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let h = Nonlinearity::odd_power(3, -1.0, ex(6.0)).unwrap();
    let u0 = GridFunction::from_fn(d, |x| 0.5 * (PI * x).sin()).unwrap();
    let pb = Problem {
        nonlinearity: h.clone(),
        condition: NonlocalCondition::Fixed { u0: u0.clone() },
        operator: op.clone(),
        grid,
        p: 2.0,
    };
    let g1 = Trajectory::zeros(d, grid);
    let g2 = constant_guess(&GridFunction::from_fn(d, |x| 3.0 * (2.0 * PI * x).sin()).unwrap(), grid);
    let rep = uniqueness_probe(&pb, &SolverConfig::default(), &g1, &g2).map_err(|e| e.to_string())?;
    ensure(rep.gap <= 1e-6, format!("solutions differ by {:e}", rep.gap))?;

    let v0 = u0.axpy(0.3, &GridFunction::from_fn(d, |x| (2.0 * PI * x).sin()).unwrap()).unwrap();
    let u = cauchy_solve(&u0, &h, &op, grid, Stepper::ExponentialEuler, None).unwrap().trajectory;
    let v = cauchy_solve(&v0, &h, &op, grid, Stepper::ExponentialEuler, None).unwrap().trajectory;
    let gaps: Vec<f64> = (0..=grid.n_steps)
        .map(|j| l2(&u.snapshot(j).axpy(-1.0, v.snapshot(j)).unwrap()))
        .collect();
    let worst_rise = gaps.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    ensure(worst_rise <= 1e-10, format!("gap rises by {worst_rise:e}"))?;
    Ok(format!("two-guess gap {:.1e}; perturbed gap {:.3} -> {:.3e}, nonincreasing", rep.gap, gaps[0], gaps[grid.n_steps]))
}

fn c8_multipoint_integral() -> Outcome {
    let d = Domain1D::new(1.0, 31).unwrap();
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let spec = SampleSpec::default().with_count(200).with_seed(8);
    let p = 4.0;
    let mut notes = Vec::new();
    for (weights, times, gamma, ell) in [
        (vec![0.3, 0.7], vec![0.25, 1.0], ScalarMap::tanh(), 1.0),
        (vec![0.5, 0.25, 0.25], vec![0.5, 0.75, 1.0], ScalarMap::sin(), 1.0),
        (vec![0.9], vec![1.0], ScalarMap::scaled(-1.0), 1.0),
    ] {
        let mass: f64 = weights.iter().sum();
        let cond = NonlocalCondition::multipoint(weights, times, gamma).unwrap();
        let g2 = check_g2(&cond, d, grid, 2.0, p, &spec).unwrap();
        ensure(g2.pass, format!("g2 fails for {cond:?}"))?;
        let lip = lipschitz_estimate(&cond, d, grid, p, &spec).unwrap();
        ensure(lip <= ell * mass + 1e-10, format!("lipschitz {lip} > {}", ell * mass))?;
        notes.push(format!("{lip:.3}<={mass:.2}"));
    }
    let bad = NonlocalCondition::multipoint(vec![2.0], vec![1.0], ScalarMap::identity()).unwrap();
    let rep = check_g2(&bad, d, grid, 2.0, p, &spec).unwrap();
    ensure(!rep.pass && rep.witness.is_some(), "c1 = 2 not rejected")?;

    for amp in [1.0, 0.6] {
        let alpha = TimeProfile::new("alpha", move |t| amp * (PI * t).sin().abs() * PI / 2.0);
        let norm = alpha.l1_norm(&grid);
        let a = alpha.clone();
        let cond = NonlocalCondition::integral(move |t, _, v| a.eval(t) * v.tanh(), Some(alpha));
        ensure(norm <= 1.0 + 1e-3, format!("alpha mass {norm}"))?;
        ensure(check_g2(&cond, d, grid, 2.0, p, &spec).unwrap().pass, "integral g2 fails")?;
        let lip = lipschitz_estimate(&cond, d, grid, p, &spec).unwrap();
        ensure(lip <= norm + 1e-10, format!("integral lipschitz {lip} > {norm}"))?;
        notes.push(format!("{lip:.3}<={norm:.3}"));
    }
    Ok(format!("g2 ok, c1=2 rejected at max ||g|| {:.2}; lipschitz {}", rep.max_norm, notes.join(" ")))
}

fn c9_mean_value_separation() -> Outcome {
    let d = Domain1D::new(1.0, 15).unwrap();
    let horizon = 2.0;
    let grid = TimeGrid::new(horizon, 4096).unwrap();
    let cond = NonlocalCondition::mean_value(TimeProfile::constant(1.0 / horizon), false);
    let mut worst = 0.0_f64;
    for delta in [0.25, 0.5, 1.0 + 1.0 / 3.0] {
        let ramp = Trajectory::from_fn(d, grid, |t, _| (t / delta).min(1.0)).unwrap();
        let one = Trajectory::from_fn(d, grid, |_, _| 1.0).unwrap();
        let diff = evaluate_g(&cond, &one).unwrap().axpy(-1.0, &evaluate_g(&cond, &ramp).unwrap()).unwrap();
        for v in diff.values() {
            worst = worst.max((v - delta / (2.0 * horizon)).abs());
        }
    }
    ensure(worst <= 1e-8, format!("deviation {worst:e}"))?;
    Ok(format!("max |g(1) - g(ramp) - delta/(2T)| = {worst:.1e}"))
}

fn c10_benilan() -> Outcome {
    let d = Domain1D::new(1.0, 63).unwrap();
    let op = SpectralOperator::new(d);
    let h = Nonlinearity::odd_power(3, -1.0, ex(6.0)).unwrap();
    let grid = TimeGrid::new(0.5, 256).unwrap();
    let mut rng = SampleSpec::default().with_seed(10).rng();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let a = random_smooth_profile(d, &mut rng, 5, false).scaled(rng.gen_range(0.5..4.0));
        let b = random_smooth_profile(d, &mut rng, 5, false).scaled(rng.gen_range(0.5..4.0));
        let u = cauchy_solve(&a, &h, &op, grid, Stepper::Etd2, None).unwrap();
        let v = cauchy_solve(&b, &h, &op, grid, Stepper::Etd2, None).unwrap();
        let rep = benilan_gap(&u.trajectory, &v.trajectory, &u.forcing, &v.forcing, 2.0).unwrap();
        worst = worst.max(rep.max_violation);
    }
    ensure(worst <= 1e-6, format!("violation {worst:e}"))?;
    Ok(format!("max violation over all s < t: {worst:.2e}"))
}

fn c11_positivity() -> Outcome {
    let d = Domain1D::new(1.0, 32).unwrap();
    let afd = FdOperator::new(d);
    let mut rng = SampleSpec::default().with_seed(11).rng();
    let mut worst = 0.0_f64;
    for k in 0..10_000 {
        let u = if k % 2 == 0 {
            random_smooth_profile(d, &mut rng, 6, true)
        } else {
            let vals = (0..d.n_interior()).map(|_| rng.gen_range(0.0..1.0) * rng.gen_range(0.0..1.0)).collect();
            GridFunction::new(d, vals).unwrap()
        };
        let t = [0.5, 1e-3, 0.05, 2.0][k % 4];
        let out = expm_apply(&afd, t, &u).unwrap();
        let min = out.values().iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.min(min / u.max_abs());
    }
    ensure(worst >= -1e-12, format!("min entry {worst:e}"))?;

    let mut errors = Vec::new();
    for n in [15, 31, 63] {
        let d = Domain1D::new(1.0, n).unwrap();
        let u = GridFunction::from_fn(d, |x| (PI * x).sin() + 0.3 * (3.0 * PI * x).sin()).unwrap();
        let a = SpectralOperator::new(d).apply_semigroup(0.37, &u).unwrap();
        let b = expm_apply(&FdOperator::new(d), 0.37, &u).unwrap();
        errors.push(l2(&a.axpy(-1.0, &b).unwrap()) / l2(&a));
    }
    let ratio = errors[0] / errors[2];
    ensure((12.0..=20.0).contains(&ratio), format!("refinement ratio {ratio} from {errors:?}"))?;
    let errs: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(format!("min relative entry {worst:.1e}; spectral-vs-FD [{}], ratio {ratio:.2}", errs.join(", ")))
}

fn c12_half_line() -> Outcome {
    let forcing = Forcing::new("wave", |t, x| 4.0 * (1.0 + (2.0 * PI * t).cos()) * (PI * x).sin()).with_period(1.0);
    let h = Nonlinearity::custom(
        "cubic+wave",
        move |t, x, v| -v * v * v + forcing.eval(t, x),
        Growth::constant(8.0, 1.0, ex(6.0)),
        Claims { sign_condition: false, monotone: true, autonomous: false, periodic_in_t: Some(1.0) },
    );
    let d = Domain1D::new(1.0, 63).unwrap();
    let pb = Problem {
        nonlinearity: h.clone(),
        condition: NonlocalCondition::Periodic,
        operator: SpectralOperator::new(d),
        grid: TimeGrid::new(1.0, 256).unwrap(),
        p: 2.0,
    };
    let mut notes = Vec::new();
    for stepper in [Stepper::ExponentialEuler, Stepper::Etd2] {
        let cfg = SolverConfig { picard_tol: 1e-12, stepper, ..SolverConfig::default() };
        let sol = solve_nonlocal(&pb, &cfg, None).map_err(|e| e.to_string())?;
        let ext = extend_periodic(&sol.trajectory, 3, 10.0 * cfg.picard_tol, 2.0).map_err(|e| e.to_string())?;
        let m = pb.grid.n_steps;
        ensure((0..2 * m).all(|j| ext.at(j + m) == ext.at(j)), "grid periodicity not exact")?;
        let rep = verify_mild_extension(&ext, &h, &pb.operator, stepper, 2.0).map_err(|e| e.to_string())?;
        ensure(rep.periodicity_defect == 0.0, "periodicity defect")?;
        ensure(rep.pass, format!("{stepper:?}: deviation {:e} > {:e}", rep.deviation, rep.tolerance))?;
        notes.push(format!("{stepper:?} dev {:.1e} <= 5 x est {:.1e}", rep.deviation, rep.error_estimate));
    }

    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = RunOptions { out_dir: out.path().to_path_buf(), seed: None };
    let e = cmd_extend(&config("periodic-forced.toml"), Some(3), &opts).map_err(|e| e.to_string())?;
    ensure(e.exit_code == 0, format!("cmd_extend exit {}", e.exit_code))?;
    notes.push("cmd_extend ok".into());
    Ok(notes.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("semigroup law and contraction", c1_semigroup),
        ("smoothing inequality", c2_smoothing),
        ("duality calculus", c3_duality),
        ("manufactured Cauchy convergence", c4_manufactured),
        ("linear periodic closed form", c5_linear_periodic),
        ("ex-finale end to end", c6_ex_finale),
        ("uniqueness for u_t = u_xx - u^3", c7_uniqueness),
        ("multipoint and integral conditions", c8_multipoint_integral),
        ("mean-value separation", c9_mean_value_separation),
        ("Benilan estimate", c10_benilan),
        ("positivity and FD consistency", c11_positivity),
        ("half-line extension", c12_half_line),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
