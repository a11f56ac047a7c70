//! Batch runs from a flat `key = value` config.
//!
//! ```text
//! # comments and blank lines are ignored
//! threads = 4
//! seed = 7
//! job = qq verify --algebra G2 --depth 1-6
//! job = lie info --algebra A2
//! ```
//!
//! `threads` and `seed` may appear once each; `job` any number of times. Each
//! job is a subcommand line without the program name, split on whitespace.
//! The batch seed is passed to every job, and a `--seed` inside the job wins.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::ms;
use crate::{dispatch, Cli, CliError, Command, Ctx, Report, EXIT_FAIL, EXIT_OK};

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// Config file.
    pub config: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchConfig {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Vec<String>,
}

impl BatchConfig {
    pub fn parse(text: &str) -> Result<BatchConfig, CliError> {
        let mut cfg = BatchConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| CliError::usage(format!("config line {}: {m}", n + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
            let value = value.trim();
            match key.trim() {
                "threads" if cfg.threads.is_none() => {
                    let t: usize = value.parse().map_err(|_| err("bad thread count"))?;
                    if t == 0 {
                        return Err(err("threads must be at least 1"));
                    }
                    cfg.threads = Some(t);
                }
                "seed" if cfg.seed.is_none() => {
                    cfg.seed = Some(value.parse().map_err(|_| err("bad seed"))?);
                }
                "threads" | "seed" => return Err(err("duplicate key")),
                "job" if !value.is_empty() => cfg.jobs.push(value.to_string()),
                "job" => return Err(err("empty job")),
                k => return Err(err(&format!("unknown key {k:?}"))),
            }
        }
        Ok(cfg)
    }
}

struct JobOutcome {
    exit: i32,
    entry: Value,
    elapsed_ms: f64,
}

fn run_job(index: usize, line: &str, seed: Option<u64>, parent: &Ctx) -> JobOutcome {
    let start = Instant::now();
    let mut argv = vec!["qqsys".to_string()];
    if let Some(s) = seed {
        argv.extend(["--seed".to_string(), s.to_string()]);
    }
    argv.extend(line.split_whitespace().map(str::to_string));
    let outcome: Result<Report, CliError> = Cli::try_parse_from(&argv)
        .map_err(|e| CliError::usage(e.render().to_string().trim().to_string()))
        .and_then(|cli| match cli.cmd {
            Command::Batch(_) => Err(CliError::usage("batch jobs cannot nest")),
            cmd => {
                if cli.out.is_some() || cli.csv.is_some() {
                    return Err(CliError::usage("--out and --csv are not allowed in jobs"));
                }
                let ctx = Ctx {
                    seed: cli.seed,
                    max_depth: cli.max_depth,
                    threads: parent.threads,
                };
                dispatch(&cmd, &ctx)
            }
        });
    let elapsed_ms = ms(start.elapsed());
    match outcome {
        Ok(r) => JobOutcome {
            exit: if r.ok { EXIT_OK } else { r.exit_code() },
            entry: json!({
                "index": index + 1,
                "job": line,
                "command": r.command,
                "ok": r.ok,
                "exit": if r.ok { EXIT_OK } else { r.exit_code() },
                "result": r.result,
                "failures": r.failures,
            }),
            elapsed_ms,
        },
        Err(e) => JobOutcome {
            exit: e.code,
            entry: json!({
                "index": index + 1,
                "job": line,
                "ok": false,
                "exit": e.code,
                "error": e.msg,
            }),
            elapsed_ms,
        },
    }
}

pub fn run(a: &BatchArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg = BatchConfig::parse(&text)?;
    let seed = ctx.seed.or(cfg.seed);
    let work = || -> Vec<JobOutcome> {
        cfg.jobs
            .par_iter()
            .enumerate()
            .map(|(i, line)| run_job(i, line, seed, ctx))
            .collect()
    };
    // Explicit --threads on the command line wins over the config.
    let outcomes = match cfg.threads.filter(|_| ctx.threads.is_none()) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::failure(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let worst = outcomes.iter().map(|o| o.exit).max().unwrap_or(EXIT_OK);
    let failed = outcomes.iter().filter(|o| o.exit != EXIT_OK).count();
    let mut rep = Report::new(
        "batch",
        true,
        json!({
            "config": a.config.display().to_string(),
            "seed": seed,
            "jobs_total": outcomes.len(),
            "jobs_failed": failed,
            "worst_exit": worst,
            "jobs": outcomes.iter().map(|o| o.entry.clone()).collect::<Vec<_>>(),
        }),
    );
    rep.timing.push((
        "jobs_ms".into(),
        json!(outcomes.iter().map(|o| o.elapsed_ms).collect::<Vec<_>>()),
    ));
    if worst != EXIT_OK {
        rep.fail(format!("{failed} of {} jobs failed", outcomes.len()));
        rep.exit = worst.max(EXIT_FAIL);
    }
    Ok(rep)
}
