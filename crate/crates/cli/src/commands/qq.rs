use clap::{Args, Subcommand};
use qqsys::qqverify::{qq_star_shift_data, verify_qq_system_at, verify_recursion_at};
use qqsys::{AlgebraData, VerificationReport};
use rayon::prelude::*;
use serde_json::json;

use crate::report::{ms, Report, Table};
use crate::{parse, CliError, Ctx};

#[derive(Debug, Subcommand)]
pub enum QqCmd {
    /// QQ̃-relation at every selected node, exact after truncation.
    Verify(VerifyArgs),
    /// Recursion identity of the truncated series.
    Recursion(VerifyArgs),
    /// Shift multisets implied by the QQ*- and QQ̃-relations.
    Star(StarArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Algebra names such as G2, comma lists, or `all`.
    #[arg(long, default_value = "all")]
    pub algebra: Vec<String>,
    /// Truncation depths: `6`, `1-6` or `1,3,5`.
    #[arg(long, default_value = "6")]
    pub depth: String,
    /// Spectral base point `a = q^base`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub base: i64,
    /// Restrict to one node (1-based).
    #[arg(long)]
    pub node: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StarArgs {
    #[arg(long, default_value = "all")]
    pub algebra: Vec<String>,
}

pub fn run(cmd: &QqCmd, ctx: &Ctx) -> Result<Report, CliError> {
    match cmd {
        QqCmd::Verify(a) => verify("qq verify", a, ctx, false),
        QqCmd::Recursion(a) => verify("qq recursion", a, ctx, true),
        QqCmd::Star(a) => star(a),
    }
}

fn verify(name: &str, a: &VerifyArgs, ctx: &Ctx, recursion: bool) -> Result<Report, CliError> {
    let algs = parse::algebras(&a.algebra)?;
    let depths = parse::depths(&a.depth)?;
    for &d in &depths {
        ctx.check_depth(d)?;
    }
    let mut jobs: Vec<(&AlgebraData, usize, usize)> = Vec::new();
    for alg in &algs {
        let nodes: Vec<usize> = match a.node {
            Some(n) if n == 0 || n > alg.rank => {
                return Err(CliError::usage(format!(
                    "node {n} outside 1..={} for {}",
                    alg.rank,
                    alg.name()
                )))
            }
            Some(n) => vec![n - 1],
            None => (0..alg.rank).collect(),
        };
        for i in nodes {
            jobs.extend(depths.iter().map(|&d| (alg, i, d)));
        }
    }
    let reports: Vec<VerificationReport> = jobs
        .par_iter()
        .map(|&(alg, i, d)| {
            if recursion {
                verify_recursion_at(alg, i, a.base, d)
            } else {
                verify_qq_system_at(alg, i, a.base, d)
            }
        })
        .collect::<qqsys::Result<_>>()?;
    let mut table = Table::new(&[
        "identity",
        "algebra",
        "node",
        "depth",
        "base",
        "status",
        "residual_terms",
    ]);
    for r in &reports {
        table.push(vec![
            r.identity.clone(),
            r.algebra.clone(),
            r.node.to_string(),
            r.depth.to_string(),
            r.base.to_string(),
            json!(r.status).as_str().unwrap_or_default().to_string(),
            r.residual_terms.len().to_string(),
        ]);
    }
    let passed = reports.iter().filter(|r| r.is_exact_zero()).count();
    let mut rep = Report::new(
        name,
        true,
        json!({
            "checked": reports.len(),
            "exact_zero": passed,
            "reports": reports,
        }),
    )
    .with_table(table);
    rep.timing.push((
        "reports_ms".into(),
        json!(reports.iter().map(|r| ms(r.elapsed)).collect::<Vec<_>>()),
    ));
    for r in reports.iter().filter(|r| !r.is_exact_zero()) {
        let dump: Vec<&str> = r.residual_terms.iter().take(8).map(String::as_str).collect();
        rep.fail(format!(
            "{} {} node {} depth {}: {:?} [{}]",
            r.identity,
            r.algebra,
            r.node,
            r.depth,
            r.status,
            dump.join(" ")
        ));
    }
    Ok(rep)
}

fn star(a: &StarArgs) -> Result<Report, CliError> {
    let algs = parse::algebras(&a.algebra)?;
    let mut data = Vec::new();
    for alg in &algs {
        for i in 0..alg.rank {
            data.push(qq_star_shift_data(alg, i)?);
        }
    }
    let mut rep = Report::new(
        "qq star",
        true,
        json!({
            "checked": data.len(),
            "consistent": data.iter().filter(|d| d.consistent).count(),
            "nodes": data,
        }),
    );
    for d in data.iter().filter(|d| !d.consistent) {
        rep.fail(format!(
            "{} node {}: QQ* {:?} vs QQ̃ {:?}, expected {:?}",
            d.algebra, d.node, d.bae_from_qq_star, d.bae_from_qq_tilde, d.bae_expected
        ));
    }
    Ok(rep)
}
