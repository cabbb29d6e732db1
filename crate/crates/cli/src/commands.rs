use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nonlocal_heat::nemytskii::{check_growth, check_monotone, check_sign, vainberg_bound};
use nonlocal_heat::nonlocal::{check_g2, lipschitz_estimate};
use nonlocal_heat::oracle::{expm_apply, FdOperator, MAX_ORACLE_N};
use nonlocal_heat::sampling::{random_smooth_profile, rescale_to_norm};
use nonlocal_heat::solver::{benilan_gap, constant_guess, transversality_check};
use nonlocal_heat::{
    approximation_family, cauchy_solve, continuation_sweep, extend_periodic, lp_norm, smoothing_constant,
    solve_nonlocal, verify_mild_extension, CheckReport, Error, Trajectory,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ProblemConfig, Resolved};
use crate::error::CliError;
use crate::output::{fmt_f64, Csv, Sink};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Hypothesis checks draw at most this many whole trajectories.
const TRAJECTORY_SAMPLES: usize = 200;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides `verification.seed`.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Value,
    pub files: Vec<PathBuf>,
}

pub fn load(config_path: &Path, opts: &RunOptions) -> Result<Resolved, CliError> {
    let mut cfg = ProblemConfig::load(config_path)?;
    if let Some(seed) = opts.seed {
        cfg.verification.seed = seed;
    }
    cfg.resolve()
}

fn envelope(command: &str, r: &Resolved, exit_code: i32, result: Value) -> Value {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "command": command,
        "exit_code": exit_code,
        "seed": r.config.verification.seed,
        "config": r.config,
        "result": result,
        "meta": { "timestamp_unix": timestamp, "version": env!("CARGO_PKG_VERSION") },
    })
}

fn finish(command: &str, r: &Resolved, mut sink: Sink, exit_code: i32, result: Value) -> Result<Outcome, CliError> {
    let report = envelope(command, r, exit_code, result);
    sink.json(&format!("{command}.json"), &report)?;
    Ok(Outcome { exit_code, report, files: sink.written().to_vec() })
}

fn trajectory_csv(traj: &Trajectory) -> Csv {
    let mut csv = Csv::new(&["t", "x", "u"]);
    let d = traj.domain();
    for (j, snap) in traj.snapshots().iter().enumerate() {
        let t = fmt_f64(traj.time(j));
        for (i, v) in snap.values().iter().enumerate() {
            csv.row(&[t.clone(), fmt_f64(d.x(i)), fmt_f64(*v)]);
        }
    }
    csv
}

fn norm_csv(traj: &Trajectory, p: f64) -> Csv {
    let mut csv = Csv::new(&["t", "norm"]);
    for (j, n) in traj.norm_trace(p).iter().enumerate() {
        csv.row(&[fmt_f64(traj.time(j)), fmt_f64(*n)]);
    }
    csv
}

fn residual_csv(residuals: &[f64], occupancy: &[f64]) -> Csv {
    let mut csv = Csv::new(&["iteration", "residual", "occupancy"]);
    for (k, r) in residuals.iter().enumerate() {
        let occ = occupancy.get(k).map(|o| fmt_f64(*o)).unwrap_or_default();
        csv.row(&[(k + 1).to_string(), fmt_f64(*r), occ]);
    }
    csv
}

fn initial_trajectory(r: &Resolved) -> Option<Trajectory> {
    r.initial_guess.as_ref().map(|g| constant_guess(g, r.problem.grid))
}

/// Runs the Picard solver and writes `trajectory.csv`, `norms.csv`, `residuals.csv`, `solve.json`.
pub fn cmd_solve(config_path: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let r = load(config_path, opts)?;
    let mut sink = Sink::new(&opts.out_dir)?;
    let guess = initial_trajectory(&r);
    let p = r.problem.p;
    let (exit_code, result) = match solve_nonlocal(&r.problem, &r.config.solver, guess.as_ref()) {
        Ok(sol) => {
            sink.csv("trajectory.csv", &trajectory_csv(&sol.trajectory))?;
            sink.csv("norms.csv", &norm_csv(&sol.trajectory, p))?;
            sink.csv("residuals.csv", &residual_csv(&sol.report.residual_history, &sol.report.occupancy_history))?;
            let rep = &sol.report;
            let result = json!({
                "converged": true,
                "iterations": rep.iterations,
                "residual_history": rep.residual_history,
                "occupancy_history": rep.occupancy_history,
                "contraction_factor": rep.contraction_factor(),
                "sup_norm": rep.sup_norm,
                "r_ball": rep.r_ball,
                "r_outer": rep.r_outer,
                "within_ball": rep.within_ball,
                "below_outer": rep.sup_norm < rep.r_outer,
            });
            (EXIT_OK, result)
        }
        Err(e) => {
            let history = match &e {
                Error::MaxIterExceeded { residual_history, .. } | Error::BallExit { residual_history, .. } => {
                    residual_history.clone()
                }
                _ => Vec::new(),
            };
            sink.csv("residuals.csv", &residual_csv(&history, &[]))?;
            let result = json!({
                "converged": false,
                "error": e.to_string(),
                "residual_history": history,
            });
            (EXIT_SOLVER, result)
        }
    };
    finish("solve", &r, sink, exit_code, result)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    /// Whether a failure makes the run fail.
    pub required: bool,
    pub margins: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl CheckEntry {
    fn from_report(rep: &CheckReport, required: bool) -> Self {
        Self {
            name: rep.name.clone(),
            pass: rep.pass,
            required,
            margins: json!({
                "samples": rep.samples,
                "violations": rep.violations,
                "worst_margin": finite_or_null(rep.worst_margin),
            }),
            witness: rep.first_witness().map(|w| json!(w)),
        }
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Runs every sampling check, oracle cross-check and the smoothing inequality;
/// writes `verify.json`.
pub fn cmd_verify(config_path: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let r = load(config_path, opts)?;
    let sink = Sink::new(&opts.out_dir)?;
    let checks = run_checks(&r)?;
    let all_pass = checks.iter().all(|c| c.pass || !c.required);
    let exit_code = if all_pass { EXIT_OK } else { EXIT_VERIFY };
    let summary = r.problem.condition.summary(&r.problem.grid);
    let result = json!({
        "all_pass": all_pass,
        "claims": r.problem.nonlinearity.claims(),
        "condition": summary,
        "checks": checks,
    });
    finish("verify", &r, sink, exit_code, result)
}

pub fn run_checks(r: &Resolved) -> Result<Vec<CheckEntry>, CliError> {
    let h = &r.problem.nonlinearity;
    let op = &r.problem.operator;
    let grid = r.problem.grid;
    let d = r.domain();
    let p = r.problem.p;
    let q = r.config.exponents.q;
    let spec = r.sample_spec();
    let traj_spec = spec.clone().with_count(spec.count.min(TRAJECTORY_SAMPLES));
    let claims = h.claims().clone();
    let mut checks = Vec::new();

    checks.push(CheckEntry {
        name: "exponents".into(),
        pass: true,
        required: true,
        margins: json!({ "p": p, "q": q, "k_dim": r.config.domain.k_dim, "ratio": r.exponents.ratio() }),
        witness: None,
    });
    checks.push(CheckEntry::from_report(&check_growth(h, &spec), true));
    checks.push(CheckEntry::from_report(&check_sign(h, &spec), true));
    checks.push(CheckEntry::from_report(&check_monotone(h, &spec), claims.monotone));

    // Vainberg bound on random profiles across the working ball.
    let mut rng = spec.rng();
    let mut worst = f64::NEG_INFINITY;
    let mut vainberg_pass = true;
    let mut vainberg_witness = None;
    for k in 0..32 {
        let t = grid.horizon * k as f64 / 31.0;
        let raw = random_smooth_profile(d, &mut rng, spec.modes, false);
        let u = rescale_to_norm(&raw, p, r.config.solver.r_ball * (k + 1) as f64 / 32.0);
        let rep = vainberg_bound(h, t, &u)?;
        worst = worst.max(rep.lhs - rep.rhs);
        if !rep.pass && vainberg_pass {
            vainberg_pass = false;
            vainberg_witness = Some(json!({ "t": t, "lhs": rep.lhs, "rhs": rep.rhs }));
        }
    }
    checks.push(CheckEntry {
        name: "vainberg".into(),
        pass: vainberg_pass,
        required: true,
        margins: json!({ "samples": 32, "worst_margin": worst }),
        witness: vainberg_witness,
    });

    let g2 = check_g2(&r.problem.condition, d, grid, r.config.solver.r_ball, p, &traj_spec)?;
    checks.push(CheckEntry {
        name: "g2".into(),
        pass: g2.pass,
        required: true,
        margins: json!({ "radius": g2.radius, "max_norm": g2.max_norm, "samples": g2.samples }),
        witness: g2.witness.map(|s| json!({ "sample": s })),
    });

    let summary = r.problem.condition.summary(&grid);
    let lip = lipschitz_estimate(&r.problem.condition, d, grid, p, &traj_spec)?;
    let lip_pass = summary.lipschitz_bound.is_none_or(|b| lip <= b + 1e-10);
    checks.push(CheckEntry {
        name: "lipschitz".into(),
        pass: lip_pass,
        required: summary.lipschitz_bound.is_some(),
        margins: json!({ "estimate": lip, "bound": summary.lipschitz_bound }),
        witness: None,
    });

    for &n in &r.config.verification.n_list {
        let rep = transversality_check(h, op, n, p, r.shell(), &spec)?;
        checks.push(CheckEntry::from_report(&rep, true));
    }

    checks.push(smoothing_check(r)?);
    if d.n_interior() <= MAX_ORACLE_N {
        checks.push(oracle_semigroup_check(r)?);
        checks.push(positivity_check(r)?);
    }
    checks.push(benilan_check(r)?);
    Ok(checks)
}

/// `||S(t) xi||_p <= 1.05 (4 pi t)^(-(1/2)(1/q - 1/p)) ||xi||_q` for `t` in `[1e-2, 1]`.
fn smoothing_check(r: &Resolved) -> Result<CheckEntry, CliError> {
    let op = &r.problem.operator;
    let d = r.domain();
    let (p, q) = (r.problem.p, r.config.exponents.q);
    let mut rng = r.sample_spec().rng();
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for k in 0..50 {
        let t = 1e-2 * 100f64.powf(k as f64 / 49.0);
        let xi = random_smooth_profile(d, &mut rng, 8, false);
        let c = smoothing_constant(t, p, q, 1)?;
        let lhs = lp_norm(&op.apply_semigroup(t, &xi)?, p)?;
        let rhs = 1.05 * c.value * lp_norm(&xi, q)?;
        let ratio = lhs / rhs;
        if ratio > worst {
            worst = ratio;
            if ratio > 1.0 {
                witness = Some(json!({ "t": t, "lhs": lhs, "rhs": rhs }));
            }
        }
    }
    Ok(CheckEntry {
        name: "smoothing".into(),
        pass: worst <= 1.0,
        required: true,
        margins: json!({ "samples": 50, "worst_ratio": worst }),
        witness,
    })
}

/// Spectral against finite-difference semigroup, within the `O(dx^2)` consistency error.
fn oracle_semigroup_check(r: &Resolved) -> Result<CheckEntry, CliError> {
    let op = &r.problem.operator;
    let d = r.domain();
    let afd = FdOperator::new(d);
    let mut rng = r.sample_spec().rng();
    let modes = 4;
    let h = std::f64::consts::PI * modes as f64 * d.dx() / d.length();
    let tol_factor = h * h / 12.0;
    let mut worst = 0.0_f64;
    for k in 0..8 {
        let t = 0.05 + 0.05 * k as f64;
        let u = random_smooth_profile(d, &mut rng, modes, false);
        let a = op.apply_semigroup(t, &u)?;
        let b = expm_apply(&afd, t, &u)?;
        let err = lp_norm(&a.axpy(-1.0, &b)?, 2.0)? / lp_norm(&u, 2.0)?;
        worst = worst.max(err / tol_factor);
    }
    Ok(CheckEntry {
        name: "oracle_semigroup".into(),
        pass: worst <= 1.0,
        required: true,
        margins: json!({ "samples": 8, "worst_error_over_bound": worst, "bound_factor": tol_factor }),
        witness: None,
    })
}

fn positivity_check(r: &Resolved) -> Result<CheckEntry, CliError> {
    let d = r.domain();
    let afd = FdOperator::new(d);
    let mut rng = r.sample_spec().rng();
    let mut worst = 0.0_f64;
    for k in 0..16 {
        let t = 0.5 * (k + 1) as f64 / 16.0;
        let u = random_smooth_profile(d, &mut rng, 6, true);
        let out = expm_apply(&afd, t, &u)?;
        let min = out.values().iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.min(min / u.max_abs());
    }
    Ok(CheckEntry {
        name: "oracle_positivity".into(),
        pass: worst >= -1e-12,
        required: true,
        margins: json!({ "samples": 16, "min_relative": worst }),
        witness: None,
    })
}

fn benilan_check(r: &Resolved) -> Result<CheckEntry, CliError> {
    let h = &r.problem.nonlinearity;
    let op = &r.problem.operator;
    let d = r.domain();
    let p = r.problem.p;
    let mut rng = r.sample_spec().rng();
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    let mut witness = None;
    for _ in 0..4 {
        let a = rescale_to_norm(&random_smooth_profile(d, &mut rng, 4, false), p, 1.0);
        let b = rescale_to_norm(&random_smooth_profile(d, &mut rng, 4, false), p, 1.0);
        let u = cauchy_solve(&a, h, op, r.problem.grid, r.config.solver.stepper, None)?;
        let v = cauchy_solve(&b, h, op, r.problem.grid, r.config.solver.stepper, None)?;
        let rep = benilan_gap(&u.trajectory, &v.trajectory, &u.forcing, &v.forcing, p)?;
        worst = worst.max(rep.max_violation);
        if !rep.pass && pass {
            pass = false;
            witness = rep.worst_pair.map(|(s, t)| json!({ "s_index": s, "t_index": t }));
        }
    }
    Ok(CheckEntry {
        name: "benilan".into(),
        pass,
        required: true,
        margins: json!({ "pairs": 4, "max_violation": worst }),
        witness,
    })
}

/// Solves `P_n` for every `n` in `verification.n_list`; writes `family.csv` and `family.json`.
pub fn cmd_family(config_path: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let r = load(config_path, opts)?;
    let mut sink = Sink::new(&opts.out_dir)?;
    let rep = approximation_family(&r.problem, &r.config.solver, &r.config.verification.n_list)?;
    let mut csv = Csv::new(&["n", "n_next", "gap"]);
    for row in &rep.cauchy_table {
        csv.row(&[row.n.to_string(), row.n_next.to_string(), row.gap.map(fmt_f64).unwrap_or_default()]);
    }
    sink.csv("family.csv", &csv)?;

    // Observed order of gap decay in n, where gaps stand above the Picard noise.
    let orders: Vec<Option<f64>> = rep
        .cauchy_table
        .windows(2)
        .map(|w| match (w[0].gap, w[1].gap) {
            (Some(a), Some(b)) if a > rep.gap_slack && b > rep.gap_slack => {
                Some((a / b).ln() / (w[1].n as f64 / w[0].n as f64).ln())
            }
            _ => None,
        })
        .collect();
    let trend_ok = orders.iter().flatten().all(|o| *o >= 0.8);
    let all_converged = rep.members.iter().all(|m| m.converged);
    let exit_code = if !all_converged {
        EXIT_SOLVER
    } else if !rep.nonincreasing {
        EXIT_VERIFY
    } else {
        EXIT_OK
    };
    let result = json!({
        "members": rep.members,
        "cauchy_table": rep.cauchy_table,
        "gap_slack": rep.gap_slack,
        "nonincreasing": rep.nonincreasing,
        "violations": rep.violations,
        "observed_orders": orders,
        "first_order_trend": trend_ok,
    });
    finish("family", &r, sink, exit_code, result)
}

/// Homotopy sweep over `verification.lambda_grid`; writes `sweep.csv` and `sweep.json`.
pub fn cmd_sweep(config_path: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let r = load(config_path, opts)?;
    let mut sink = Sink::new(&opts.out_dir)?;
    let rep = continuation_sweep(&r.problem, &r.config.solver, &r.config.verification.lambda_grid)?;
    let mut csv = Csv::new(&["lambda", "converged", "sup_norm", "iterations"]);
    for b in &rep.branch {
        csv.row(&[
            fmt_f64(b.lambda),
            b.converged.to_string(),
            b.sup_norm.map(fmt_f64).unwrap_or_default(),
            b.iterations.map(|i| i.to_string()).unwrap_or_default(),
        ]);
    }
    sink.csv("sweep.csv", &csv)?;
    let exit_code = if rep.pass {
        EXIT_OK
    } else if rep.branch.iter().all(|b| b.converged) {
        EXIT_VERIFY
    } else {
        EXIT_SOLVER
    };
    finish("sweep", &r, sink, exit_code, json!(rep))
}

/// Solves, extends the solution periodically and re-solves over `[0, 2T]`;
/// writes `extend.csv` and `extend.json`.
pub fn cmd_extend(config_path: &Path, n_periods: Option<usize>, opts: &RunOptions) -> Result<Outcome, CliError> {
    let r = load(config_path, opts)?;
    let n_periods = n_periods.unwrap_or(r.config.verification.n_periods);
    if n_periods == 0 {
        return Err(CliError::Config("n_periods must be positive".into()));
    }
    let h = &r.problem.nonlinearity;
    if !h.claims().is_periodic_with(r.problem.grid.horizon) {
        return Err(CliError::Config(format!(
            "nonlinearity {} is not T-periodic in t, so the extension is not a solution",
            h.name()
        )));
    }
    let mut sink = Sink::new(&opts.out_dir)?;
    let guess = initial_trajectory(&r);
    let sol = match solve_nonlocal(&r.problem, &r.config.solver, guess.as_ref()) {
        Ok(sol) => sol,
        Err(e) => {
            let result = json!({ "converged": false, "error": e.to_string() });
            return finish("extend", &r, sink, EXIT_SOLVER, result);
        }
    };
    let tol_glue = 10.0 * r.config.solver.picard_tol;
    let ext = match extend_periodic(&sol.trajectory, n_periods, tol_glue, r.problem.p) {
        Ok(ext) => ext,
        Err(e) => {
            let result = json!({ "converged": true, "periodic": false, "error": e.to_string() });
            return finish("extend", &r, sink, EXIT_SOLVER, result);
        }
    };
    let rep = verify_mild_extension(&ext, h, &r.problem.operator, r.config.solver.stepper, r.problem.p)?;
    let mut csv = Csv::new(&["period", "deviation"]);
    for (k, dev) in rep.deviation_by_period.iter().enumerate() {
        csv.row(&[(k + 1).to_string(), fmt_f64(*dev)]);
    }
    sink.csv("extend.csv", &csv)?;
    let exit_code = if rep.pass && rep.periodicity_defect == 0.0 { EXIT_OK } else { EXIT_VERIFY };
    let result = json!({
        "converged": true,
        "periodic": true,
        "n_periods": n_periods,
        "gluing_residual": ext.gluing_residual(),
        "gluing_tolerance": ext.tolerance(),
        "extension": rep,
    });
    finish("extend", &r, sink, exit_code, result)
}

/// Human-readable rendering of a JSON report.
pub fn report(json_path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(json_path).map_err(|e| CliError::io(json_path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Report(e.to_string()))?;
    let mut out = String::new();
    render(&value, 0, &mut out);
    Ok(out)
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(val, indent + 1, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for (i, item) in items.iter().enumerate() {
                            out.push_str(&format!("{pad}  [{i}]\n"));
                            render(item, indent + 2, out);
                        }
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(val))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) if items.len() > 8 => {
            let head: Vec<String> = items[..4].iter().map(scalar).collect();
            format!("[{}, ... ({} values)]", head.join(", "), items.len())
        }
        Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}
