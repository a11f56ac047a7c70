//! Command-line front end for `qqsys`.
//!
//! Every subcommand produces one JSON envelope
//! `{schema, command, ok, result, timing}`; `--format text` and `--format csv`
//! are alternative views of the same report. Exit codes: 0 when every
//! assertion passes, 1 on an assertion or numerical failure, 2 on bad flags or
//! invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

pub mod batch;
pub mod commands;
pub mod parse;
pub mod report;

pub use report::{Report, Table, SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// An error that ends a command before it produces a report.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_USAGE,
            msg: msg.into(),
        }
    }

    pub fn failure(msg: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_FAIL,
            msg: msg.into(),
        }
    }
}

impl From<qqsys::Error> for CliError {
    fn from(e: qqsys::Error) -> CliError {
        use qqsys::Error as E;
        match e {
            E::Singular(_) | E::Numerical(_) => CliError::failure(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "qqsys",
    version,
    about = "QQ-system verification, Bethe roots and oper numerics",
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads [default: all cores].
    #[arg(long, global = true, env = "QQSYS_THREADS")]
    pub threads: Option<usize>,
    /// Seed for random initial data; echoed in the report.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write the CSV table of the report to this file.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Largest truncation depth accepted.
    #[arg(long, global = true, default_value_t = 10)]
    pub max_depth: usize,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact identities in the truncated ℓ-weight algebra.
    #[command(subcommand)]
    Qq(commands::qq::QqCmd),
    /// Bethe equations.
    #[command(subcommand)]
    Bae(commands::bae::BaeCmd),
    /// Toroidal gl1 Bethe equation.
    #[command(subcommand)]
    Gl1(commands::bae::Gl1Cmd),
    /// Spectral determinant of the radial Schrödinger operator.
    #[command(subcommand)]
    Odeim(commands::odeim::OdeimCmd),
    /// Opers: accessory parameters, monodromy, constants.
    #[command(subcommand)]
    Oper(commands::oper::OperCmd),
    /// Cartan data tables.
    #[command(subcommand)]
    Lie(commands::lie::LieCmd),
    /// Run the jobs listed in a config file.
    Batch(batch::BatchArgs),
}

/// Settings shared by all subcommands.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub seed: Option<u64>,
    pub max_depth: usize,
    pub threads: Option<usize>,
}

impl Ctx {
    pub fn check_depth(&self, d: usize) -> Result<(), CliError> {
        if d == 0 || d > self.max_depth {
            return Err(CliError::usage(format!(
                "depth {d} outside 1..={} (raise --max-depth)",
                self.max_depth
            )));
        }
        Ok(())
    }
}

/// Runs the subcommand and returns its report.
pub fn dispatch(cmd: &Command, ctx: &Ctx) -> Result<Report, CliError> {
    match cmd {
        Command::Qq(c) => commands::qq::run(c, ctx),
        Command::Bae(c) => commands::bae::run(c, ctx),
        Command::Gl1(c) => commands::bae::run_gl1(c, ctx),
        Command::Odeim(c) => commands::odeim::run(c, ctx),
        Command::Oper(c) => commands::oper::run(c, ctx),
        Command::Lie(c) => commands::lie::run(c, ctx),
        Command::Batch(b) => batch::run(b, ctx),
    }
}

/// Parses `argv`, runs, renders. Returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let ctx = Ctx {
        seed: cli.seed,
        max_depth: cli.max_depth,
        threads: cli.threads,
    };
    let pool = match cli.threads {
        Some(0) => {
            let _ = writeln!(err, "error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return EXIT_FAIL;
        }
    };
    let start = Instant::now();
    let report = match pool.install(|| dispatch(&cli.cmd, &ctx)) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.msg);
            return e.code;
        }
    };
    let elapsed = start.elapsed();
    match emit(&cli, &report, elapsed, out) {
        Ok(()) => {}
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.msg);
            return e.code;
        }
    }
    for f in &report.failures {
        let _ = writeln!(err, "FAIL {f}");
    }
    report.exit_code()
}

fn emit(
    cli: &Cli,
    report: &Report,
    elapsed: std::time::Duration,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::failure(format!("write failed: {e}"));
    if let Some(path) = &cli.csv {
        let t = report
            .table
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("{} has no CSV view", report.command)))?;
        std::fs::write(path, t.to_csv()).map_err(io)?;
    }
    let body = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.envelope(elapsed))
                .map_err(|e| CliError::failure(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Text => {
            let status = if report.ok { "ok" } else { "FAILED" };
            format!(
                "{} [{status}] {:.1} ms\n{}",
                report.command,
                report::ms(elapsed),
                report::to_text(&report.result)
            )
        }
        Format::Csv => report
            .table
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("{} has no CSV view", report.command)))?
            .to_csv(),
    };
    match &cli.out {
        Some(p) => std::fs::write(p, body).map_err(io),
        None => out.write_all(body.as_bytes()).map_err(io),
    }
}

/// Entry point used by the binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
