//! The `cartan` command line tool.
//!
//! Exit codes: 0 pass, 1 failure with a witness, 2 input error,
//! 3 inconclusive isomorphism search.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::algebra::Context;
use crate::error::{Error, Result};
use crate::io::{describe, parse_tables, read_basis, read_context, validate_tables};
use crate::iso::{IsoOutcome, DEFAULT_BUDGET};
use crate::reconstruction::{reconstruct, twisted_isomorphism, ReconstructionReport};
use crate::report::RunConfig;
use crate::semigroup::SemigroupSpec;
use crate::suites::{run_suites, Suite};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cartan",
    version,
    about = "Reconstruct twisted groupoids from Cartan semigroups of their C*-algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the groupoid axioms and the cocycle identity.
    Validate { path: PathBuf },
    /// Rebuild the twisted groupoid from the semigroup and compare with the input.
    Reconstruct {
        path: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare the reconstructed twisted groupoids of two reports.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        iso_budget: u64,
    },
    /// Run property suites: cartan, relations, states, masa or all.
    Suite {
        path: PathBuf,
        #[arg(default_value = "all")]
        suite: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    iso_budget: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `monomial` or `basis:<file>`.
    #[arg(long, default_value = "monomial")]
    semigroup: String,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Format(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(RunConfig { tolerance: self.tol, seed: self.seed, iso_budget: self.iso_budget })
    }

    fn spec(&self, ctx: &Context) -> Result<SemigroupSpec> {
        match self.semigroup.as_str() {
            "monomial" => Ok(SemigroupSpec::monomial(ctx)),
            s => match s.strip_prefix("basis:") {
                Some(file) => {
                    let path = Path::new(file);
                    let basis = read_basis(ctx.groupoid(), path).map_err(|e| Error::Format(describe(path, &e)))?;
                    Ok(SemigroupSpec::basis_restricted(ctx, basis))
                }
                None => Err(Error::Format(format!("unknown semigroup `{s}` (expected monomial or basis:<file>)"))),
            },
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn load(path: &Path) -> Result<Context> {
    read_context(path).map_err(|e| Error::Format(describe(path, &e)))
}

fn emit(text: &str, target: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match target {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Validate { path } => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Format(describe(&path, &e.into())))?;
            let tables = parse_tables(&text).map_err(|e| Error::Format(describe(&path, &e)))?;
            let report = validate_tables(&tables);
            if report.is_valid() {
                writeln!(out, "valid: {} elements, {} units", tables.elements.len(), tables.units.len())?;
                Ok(EXIT_PASS)
            } else {
                writeln!(out, "invalid:\n{report}")?;
                Ok(EXIT_FAIL)
            }
        }
        Command::Reconstruct { path, run } => {
            let config = run.config()?;
            let ctx = load(&path)?;
            let spec = run.spec(&ctx)?;
            let report = match reconstruct(&spec, &config) {
                Ok(r) => r,
                Err(e @ Error::NotCartan(_)) => {
                    writeln!(err, "{e}")?;
                    return Ok(EXIT_FAIL);
                }
                Err(e) => return Err(e),
            };
            emit(&report.to_json(), run.out.as_deref(), out)?;
            for c in report.checks.iter().filter(|c| !c.passed) {
                writeln!(err, "{}", c.line())?;
            }
            Ok(if report.passed {
                EXIT_PASS
            } else if report.isomorphism.is_inconclusive() {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_FAIL
            })
        }
        Command::Compare { first, second, iso_budget } => {
            let a = load_report(&first)?;
            let b = load_report(&second)?;
            Ok(match twisted_isomorphism(&a, &b, iso_budget) {
                IsoOutcome::Isomorphic(_) => {
                    writeln!(out, "isomorphic")?;
                    EXIT_PASS
                }
                IsoOutcome::NotIsomorphic => {
                    writeln!(out, "not isomorphic")?;
                    EXIT_FAIL
                }
                IsoOutcome::Inconclusive { visited } => {
                    writeln!(out, "inconclusive after {visited} nodes")?;
                    EXIT_INCONCLUSIVE
                }
            })
        }
        Command::Suite { path, suite, run } => {
            let suites = Suite::parse_selection(&suite)?;
            let config = run.config()?;
            let ctx = load(&path)?;
            let spec = run.spec(&ctx)?;
            let report = run_suites(&spec, &suites, &config)?;
            emit(&report.to_json(), run.out.as_deref(), out)?;
            for (name, r) in &report.suites {
                for note in &r.notes {
                    writeln!(err, "{name}: {note}")?;
                }
                for c in r.checks.iter().filter(|c| !c.passed) {
                    writeln!(err, "{name}: {}", c.line())?;
                }
            }
            Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

fn load_report(path: &Path) -> Result<Context> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(describe(path, &e.into())))?;
    let report = ReconstructionReport::from_json(&text).map_err(|e| Error::Format(describe(path, &e)))?;
    report.context().map_err(|e| Error::Format(describe(path, &e)))
}
