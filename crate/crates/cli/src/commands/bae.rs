use std::f64::consts::PI;

use clap::{Args, Subcommand};
use num_complex::Complex;
use qqsys::bethe::{gl1_bae_residual, gl1_single_root_t, gl1_solve, q_pow, solve_newton, Roots};
use qqsys::{parse_algebra, BetheSystem, Gl1Params, NewtonOptions, SolveStatus, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{cx, max_norm, Cx};
use crate::report::{num, Report, Table};
use crate::{parse, CliError, Ctx};

#[derive(Debug, Subcommand)]
pub enum BaeCmd {
    /// Damped Newton on the log-form Bethe equations.
    Solve(SolveArgs),
    /// Residuals of the Bethe equations at given roots.
    Residual(ResidualArgs),
}

#[derive(Debug, Subcommand)]
pub enum Gl1Cmd {
    /// Residual of the toroidal equation, optionally after a Newton solve.
    Check(Gl1Args),
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    #[arg(long)]
    pub algebra: String,
    /// `q = exp(iπβ²)`.
    #[arg(long)]
    pub beta2: f64,
    /// One `v_i` per node: `q`, `q^N`, `-q^N` or a complex literal.
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
    /// Branch integers grouped like the roots, or `auto` to fit them.
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub branch: String,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Number of roots per node, e.g. `1,0`.
    #[arg(long)]
    pub degrees: String,
    /// Initial roots grouped with `;` per node, or `random` (needs --seed).
    #[arg(long, allow_hyphen_values = true)]
    pub init: String,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub collision_tol: f64,
    /// Record root trajectories for the CSV view.
    #[arg(long)]
    pub trajectory: bool,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Roots grouped with `;` per node.
    #[arg(long, allow_hyphen_values = true)]
    pub roots: String,
    /// Largest accepted product-form residual.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct Gl1Args {
    /// `q = exp(iπβ²)` and `q2 = q²`.
    #[arg(long)]
    pub beta2: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: String,
    /// Value of `[α]`, or `closed` for the one-root solution.
    #[arg(long, default_value = "closed", allow_hyphen_values = true)]
    pub t: String,
    /// Roots, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub roots: String,
    /// Treat the roots as a Newton starting point.
    #[arg(long)]
    pub solve: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

pub fn run(cmd: &BaeCmd, ctx: &Ctx) -> Result<Report, CliError> {
    match cmd {
        BaeCmd::Solve(a) => solve(a, ctx),
        BaeCmd::Residual(a) => residual(a),
    }
}

fn check_tol(name: &str, t: f64) -> Result<(), CliError> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!("--{name} must be positive")))
    }
}

fn nested(r: &Roots) -> Vec<Vec<Cx>> {
    r.iter().map(|x| cx(x)).collect()
}

fn build_system(a: &SystemArgs, degrees: Vec<usize>, roots: &Roots) -> Result<BetheSystem, CliError> {
    let alg = parse_algebra(&a.algebra)?;
    let q = q_pow(a.beta2, 1.0);
    let v = parse::v_list(&a.v, q)?;
    let sys = BetheSystem::new(alg, a.beta2, v, degrees)?;
    let branch = if a.branch.trim() == "auto" {
        sys.fit_branches(roots)?
    } else {
        parse::grouped(&a.branch, sys.algebra.rank, |s| {
            s.parse::<i64>()
                .map_err(|_| CliError::usage(format!("bad branch integer {s:?}")))
        })?
    };
    Ok(sys.with_branches(branch)?)
}

fn random_roots(degrees: &[usize], seed: u64) -> Roots {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    degrees
        .iter()
        .map(|&d| {
            (0..d)
                .map(|_| Complex::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..2.0 * PI)))
                .collect()
        })
        .collect()
}

fn solve(a: &SolveArgs, ctx: &Ctx) -> Result<Report, CliError> {
    check_tol("tol", a.tol)?;
    check_tol("collision-tol", a.collision_tol)?;
    let degrees: Vec<usize> = parse::int_list(&a.degrees)?;
    let init = if a.init.trim() == "random" {
        let seed = ctx
            .seed
            .ok_or_else(|| CliError::usage("--init random needs an explicit --seed"))?;
        random_roots(&degrees, seed)
    } else {
        parse::grouped(&a.init, degrees.len(), parse::complex)?
    };
    if init.iter().map(Vec::len).ne(degrees.iter().copied()) {
        return Err(CliError::usage("initial roots do not match --degrees"));
    }
    let sys = build_system(&a.system, degrees.clone(), &init)?;
    let opts = NewtonOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        collision_tol: a.collision_tol,
        record_trajectory: a.trajectory,
    };
    let sol = solve_newton(&sys, &init, &opts)?;
    let mut table = Table::new(&["iteration", "node", "index", "re", "im", "residual_max"]);
    for t in &sol.trajectory {
        table.push(vec![
            t.iteration.to_string(),
            t.node.to_string(),
            t.index.to_string(),
            num(t.re),
            num(t.im),
            num(t.residual_max),
        ]);
    }
    let result = json!({
        "algebra": sys.algebra.name(),
        "beta2": sys.beta2,
        "v": cx(&sys.v),
        "degrees": degrees,
        "branch": sys.branch,
        "seed": ctx.seed,
        "init": nested(&init),
        "roots": nested(&sol.roots),
        "residuals": cx(&sol.residuals),
        "residual_max": sol.residual_max,
        "log_residual_max": sol.log_residual_max,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "status": sol.status,
        "null_dim": sol.null_dim,
        "condition": sol.condition,
        "message": sol.message,
    });
    let mut rep = Report::new("bae solve", true, result).with_table(table);
    if !matches!(sol.status, SolveStatus::Converged | SolveStatus::Underdetermined) {
        rep.fail(format!("bae solve: {}", sol.message));
    }
    Ok(rep)
}

fn residual(a: &ResidualArgs) -> Result<Report, CliError> {
    check_tol("tol", a.tol)?;
    let alg = parse_algebra(&a.system.algebra)?;
    let roots = parse::grouped(&a.roots, alg.rank, parse::complex)?;
    let degrees: Vec<usize> = roots.iter().map(Vec::len).collect();
    let sys = build_system(&a.system, degrees.clone(), &roots)?;
    sys.check_roots(&roots, 1e-8)?;
    let product = sys.product_residual(&roots)?;
    let log = sys.log_residual(&roots)?;
    let residual_max = max_norm(&product);
    let result = json!({
        "algebra": sys.algebra.name(),
        "beta2": sys.beta2,
        "v": cx(&sys.v),
        "degrees": degrees,
        "branch": sys.branch,
        "roots": nested(&roots),
        "residuals": cx(&product),
        "log_residuals": cx(&log),
        "residual_max": residual_max,
        "log_residual_max": max_norm(&log),
        "tol": a.tol,
    });
    let mut rep = Report::new("bae residual", true, result);
    if !(residual_max < a.tol) {
        rep.fail(format!("bae residual {residual_max:.3e} above {:.1e}", a.tol));
    }
    Ok(rep)
}

#[derive(Serialize)]
struct Gl1Out {
    q1: Cx,
    q2: Cx,
    q3: Cx,
    t: Cx,
    init: Vec<Cx>,
    roots: Vec<Cx>,
    residuals: Vec<Cx>,
    residual_max: f64,
    solved: bool,
    converged: Option<bool>,
    iterations: Option<usize>,
    tol: f64,
}

pub fn run_gl1(cmd: &Gl1Cmd, _ctx: &Ctx) -> Result<Report, CliError> {
    let Gl1Cmd::Check(a) = cmd;
    check_tol("tol", a.tol)?;
    let q1 = parse::complex(&a.q1)?;
    let p = Gl1Params::from_q(q_pow(a.beta2, 1.0), q1)?;
    let t: C64 = if a.t.trim() == "closed" {
        gl1_single_root_t(&p)
    } else {
        parse::complex(&a.t)?
    };
    let init = parse::complex_list(&a.roots)?;
    let (roots, converged, iterations) = if a.solve {
        let s = gl1_solve(&init, &p, t, &NewtonOptions::default())?;
        (s.roots, Some(s.converged), Some(s.iterations))
    } else {
        (init.clone(), None, None)
    };
    let residuals = gl1_bae_residual(&roots, &p, t)?;
    let residual_max = max_norm(&residuals);
    let out = Gl1Out {
        q1: p.q1.into(),
        q2: p.q2.into(),
        q3: p.q3.into(),
        t: t.into(),
        init: cx(&init),
        roots: cx(&roots),
        residuals: cx(&residuals),
        residual_max,
        solved: a.solve,
        converged,
        iterations,
        tol: a.tol,
    };
    let mut rep = Report::new("gl1 check", true, out);
    if !(residual_max < a.tol) {
        rep.fail(format!("gl1 residual {residual_max:.3e} above {:.1e}", a.tol));
    }
    if converged == Some(false) {
        rep.fail("gl1 Newton did not converge");
    }
    Ok(rep)
}
