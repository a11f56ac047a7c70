use clap::{Args, Subcommand};
use serde_json::json;

use crate::{parse, CliError, Ctx, Report};

#[derive(Debug, Subcommand)]
pub enum LieCmd {
    /// Cartan matrix, symmetrizer, B = DC, exponents and Coxeter numbers.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long, default_value = "all")]
    pub algebra: Vec<String>,
}

pub fn run(cmd: &LieCmd, _ctx: &Ctx) -> Result<Report, CliError> {
    let LieCmd::Info(a) = cmd;
    let algs = parse::algebras(&a.algebra)?;
    let rows: Vec<_> = algs
        .iter()
        .map(|g| {
            json!({
                "name": g.name(),
                "rank": g.rank,
                "cartan": g.cartan,
                "sym": g.sym,
                "bmatrix": g.bmatrix,
                "exponents": g.exponents,
                "coxeter": g.coxeter,
                "dual_coxeter": g.dual_coxeter,
                "kac_labels": g.kac_labels,
                "simply_laced": g.is_simply_laced(),
            })
        })
        .collect();
    Ok(Report::new("lie info", true, json!({ "algebras": rows })))
}
