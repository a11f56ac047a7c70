use clap::{Args, Subcommand};
use num_complex::Complex;
use qqsys::operkit::ode::OdeOptions;
use qqsys::operkit::{
    accessory_m1_closed_form, constants, general_constants, monodromy_matrix, solve_accessory,
    AccessoryOptions, AccessorySolution, MonodromyReport,
};
use qqsys::{parse_algebra, KdvOper, C64};
use serde_json::{json, Value};

use super::{cx, Cx};
use crate::{parse, CliError, Ctx, Report};

#[derive(Debug, Subcommand)]
pub enum OperCmd {
    /// Solve the no-monodromy conditions for the points `w_j`.
    Accessory(AccessoryArgs),
    /// Monodromy of `y″ = (v + λ z^k) y` around each `w_j`.
    Monodromy(MonodromyArgs),
    /// Level-dependent constants, exact over the rationals.
    Constants(ConstantsArgs),
}

#[derive(Debug, Args)]
pub struct OperArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    /// Coefficient of the `1/z` term at the irregular point.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub s: f64,
}

#[derive(Debug, Args)]
pub struct AccessoryArgs {
    #[command(flatten)]
    pub oper: OperArgs,
    /// Number of points.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Starting points, comma separated [default for m = 1: the closed form].
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct MonodromyArgs {
    #[command(flatten)]
    pub oper: OperArgs,
    /// Points `w_j`; when absent they are solved for as in `oper accessory`.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    /// Spectral values, comma separated.
    #[arg(long, default_value = "1,-2.5,0.5+2i", allow_hyphen_values = true)]
    pub lambda: String,
    /// Contour radius [default: half the distance to the nearest other singular point].
    #[arg(long)]
    pub radius: Option<f64>,
    /// Only this point (1-based).
    #[arg(long)]
    pub point: Option<usize>,
    /// Offset added to `w_1` before integrating.
    #[arg(long, allow_hyphen_values = true)]
    pub perturb: Option<String>,
    /// Largest accepted `‖M − 1‖`.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub det_tol: f64,
    #[arg(long, default_value_t = 1e-11)]
    pub rtol: f64,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Level, e.g. `-1/3` or `0.25`.
    #[arg(long, allow_hyphen_values = true)]
    pub k: String,
    /// sl2 weight parameter.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub r: String,
    /// Report general-algebra data instead of sl2.
    #[arg(long)]
    pub algebra: Option<String>,
}

pub fn run(cmd: &OperCmd, _ctx: &Ctx) -> Result<Report, CliError> {
    match cmd {
        OperCmd::Accessory(a) => accessory(a),
        OperCmd::Monodromy(a) => monodromy(a),
        OperCmd::Constants(a) => consts(a),
    }
}

fn base_oper(o: &OperArgs, w: Vec<C64>) -> Result<KdvOper, CliError> {
    Ok(KdvOper::new(o.r, o.k, w)?.with_irregular(o.s)?)
}

fn solve_points(
    o: &OperArgs,
    m: usize,
    init: Option<&str>,
    tol: f64,
    max_iter: usize,
) -> Result<(AccessorySolution, Option<C64>), CliError> {
    let closed = if m == 1 {
        Some(accessory_m1_closed_form(o.r, o.k, o.s)?)
    } else {
        None
    };
    let init = match (init, closed) {
        (Some(s), _) => parse::complex_list(s)?,
        (None, Some(w)) => vec![w],
        (None, None) => return Err(CliError::usage("--init is required for m > 1")),
    };
    if init.len() != m {
        return Err(CliError::usage(format!(
            "--init has {} points, --m is {m}",
            init.len()
        )));
    }
    let sol = solve_accessory(
        &base_oper(o, Vec::new())?,
        &init,
        &AccessoryOptions { tol, max_iter },
    )?;
    Ok((sol, closed))
}

fn solution_json(s: &AccessorySolution) -> Value {
    json!({
        "w": cx(&s.w),
        "residuals": cx(&s.residuals),
        "residual_max": s.residual_max,
        "iterations": s.iterations,
        "converged": s.converged,
        "message": s.message,
    })
}

fn accessory(a: &AccessoryArgs) -> Result<Report, CliError> {
    if !(a.tol > 0.0) {
        return Err(CliError::usage("--tol must be positive"));
    }
    let (sol, closed) = solve_points(&a.oper, a.m, a.init.as_deref(), a.tol, a.max_iter)?;
    let closed_gap = closed.map(|c| (sol.w[0] - c).norm());
    let result = json!({
        "r": a.oper.r,
        "k": a.oper.k,
        "s": a.oper.s,
        "m": a.m,
        "solution": solution_json(&sol),
        "closed_form": closed.map(Cx::from),
        "closed_form_gap": closed_gap,
    });
    let mut rep = Report::new("oper accessory", true, result);
    if !sol.converged {
        rep.fail(format!("accessory solve: {}", sol.message));
    }
    Ok(rep)
}

fn monodromy_json(r: &MonodromyReport) -> Value {
    json!({
        "point": r.center + 1,
        "radius": r.radius,
        "lambda": Cx::from(r.lambda),
        "matrix": r.matrix.iter().map(|row| cx(row)).collect::<Vec<_>>(),
        "deviation": r.deviation,
        "det": Cx::from(r.det),
        "steps": r.steps,
    })
}

fn monodromy(a: &MonodromyArgs) -> Result<Report, CliError> {
    for (name, v) in [("tol", a.tol), ("det-tol", a.det_tol), ("rtol", a.rtol)] {
        if !(v > 0.0) {
            return Err(CliError::usage(format!("--{name} must be positive")));
        }
    }
    let (mut w, solved) = match &a.w {
        Some(s) => (parse::complex_list(s)?, None),
        None => {
            let (sol, _) = solve_points(&a.oper, a.m, a.init.as_deref(), 1e-12, 100)?;
            if !sol.converged {
                return Err(CliError::failure(format!("accessory solve: {}", sol.message)));
            }
            (sol.w.clone(), Some(sol))
        }
    };
    if w.is_empty() {
        return Err(CliError::usage("no finite singular points to encircle"));
    }
    if let Some(p) = &a.perturb {
        w[0] += parse::complex(p)?;
    }
    let op = base_oper(&a.oper, w.clone())?;
    let lambdas = parse::complex_list(&a.lambda)?;
    if lambdas.is_empty() {
        return Err(CliError::usage("--lambda is empty"));
    }
    let points: Vec<usize> = match a.point {
        Some(j) if j == 0 || j > w.len() => {
            return Err(CliError::usage(format!("--point outside 1..={}", w.len())))
        }
        Some(j) => vec![j - 1],
        None => (0..w.len()).collect(),
    };
    let opts = OdeOptions {
        rtol: a.rtol,
        ..OdeOptions::default()
    };
    let mut runs = Vec::new();
    for &j in &points {
        let radius = match a.radius {
            Some(r) => r,
            None => {
                let nearest = w
                    .iter()
                    .enumerate()
                    .filter(|(l, _)| *l != j)
                    .map(|(_, wl)| (w[j] - wl).norm())
                    .fold(w[j].norm(), f64::min);
                0.5 * nearest
            }
        };
        for &lam in &lambdas {
            runs.push(monodromy_matrix(&op, j, radius, lam, &opts)?);
        }
    }
    let worst = runs.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let det_err = runs
        .iter()
        .map(|r| (r.det - Complex::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let result = json!({
        "r": a.oper.r,
        "k": a.oper.k,
        "s": a.oper.s,
        "w": cx(&w),
        "accessory": solved.as_ref().map(solution_json),
        "perturbed": a.perturb.is_some(),
        "runs": runs.iter().map(monodromy_json).collect::<Vec<_>>(),
        "deviation_max": worst,
        "det_error_max": det_err,
        "trivial": worst < a.tol,
    });
    let mut rep = Report::new("oper monodromy", true, result);
    if !(worst < a.tol) {
        rep.fail(format!("monodromy deviation {worst:.3e} above {:.1e}", a.tol));
    }
    if !(det_err < a.det_tol) {
        rep.fail(format!("|det M - 1| = {det_err:.3e} above {:.1e}", a.det_tol));
    }
    Ok(rep)
}

fn consts(a: &ConstantsArgs) -> Result<Report, CliError> {
    let k = parse::rational(&a.k)?;
    let rep = match &a.algebra {
        Some(name) => {
            let alg = parse_algebra(name)?;
            let g = general_constants(&alg, k)?;
            let ok = g.spectral_term_is_constant();
            let mut rep = Report::new(
                "oper constants",
                true,
                json!({"general": g, "spectral_term_is_constant": ok}),
            );
            if !ok {
                rep.fail("spectral term of the x-form depends on x");
            }
            rep
        }
        None => {
            let r = parse::rational(&a.r)?;
            let c = constants(r, k)?;
            let ok = c.identities_hold();
            let mut rep = Report::new(
                "oper constants",
                true,
                json!({"sl2": c, "identities_hold": ok, "resonant": c.resonant()}),
            );
            if !ok {
                rep.fail("constant identities do not hold");
            }
            rep
        }
    };
    Ok(rep)
}
