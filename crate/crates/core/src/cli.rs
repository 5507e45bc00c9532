//! Command-line front end.
//!
//! Each subcommand reads an instance JSON file, calls into the library and
//! writes canonical JSON (or CSV for `sweep`) to `--out` or stdout. Errors go
//! to stderr as one JSON object per line.
//!
//! Exit codes: 0 success, 1 verification failed, 2 invalid input,
//! 3 resource budget exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::certificate::{emit_certificate, write_atomically, Certificate};
use crate::error::{Error, Result};
use crate::group::Limits;
use crate::instances::{family_sweep, generate_in, generate_with, InstanceSpec, SetSpec, SweepGrid};
use crate::json::to_canonical_string;
use crate::neighbourhood::{almost_invariant, lemma_step, theorem_for_instance, LemmaCase};
use crate::oracle::verify_certificate;
use crate::rational::Rational;
use crate::set::{doubling_stats, GSet};
use crate::symmetry::sym_set;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNVERIFIED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "symgrowth",
    version,
    about = "Symmetric neighbourhoods in sets of small doubling"
)]
struct Cli {
    /// Pair budget for products and convolutions (overrides SYMGROWTH_BUDGET_PAIRS).
    #[arg(long, global = true)]
    budget_pairs: Option<u64>,

    /// Print per-step progress to stderr.
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    instance: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Doubling statistics of the instance set.
    Stats {
        #[command(flatten)]
        common: Common,
    },
    /// Symmetry set at threshold eta.
    Sym {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eta: Rational,
    },
    /// One step of the shrink/terminate dichotomy.
    Lemma {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: Rational,
        /// JSON set spec for A' (defaults to A itself).
        #[arg(long)]
        subset: Option<PathBuf>,
    },
    /// Build and self-check a certificate.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: u32,
    },
    /// Almost-invariant pair by pigeonhole.
    Invariant {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: u32,
    },
    /// Doubling statistics across one parameter of the instance, as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted field path, e.g. set.length.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
    },
    /// Recompute a certificate from scratch.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInstance(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path, limits: Limits) -> Result<(InstanceSpec, GSet)> {
    let spec = InstanceSpec::from_json(&read(path)?)?;
    let set = generate_with(&spec, limits)?;
    Ok((spec, set))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomically(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &to_canonical_string(value)?)
}

fn encode(set: &GSet) -> Vec<Vec<u64>> {
    set.iter().map(|x| set.ctx().components(x)).collect()
}

fn progress(enabled: bool, value: serde_json::Value) {
    if enabled {
        eprintln!("{value}");
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let mut limits = Limits::from_env()?;
    if let Some(b) = cli.budget_pairs {
        if b == 0 {
            return Err(Error::ParameterRange("--budget-pairs must be positive".into()));
        }
        limits.pair_budget = b;
    }
    let trace = cli.trace;

    match cli.command {
        Command::Stats { common } => {
            let (_, a) = load_instance(&common.instance, limits)?;
            emit_json(common.out.as_deref(), &doubling_stats(&a)?)?;
        }
        Command::Sym { common, eta } => {
            let (_, a) = load_instance(&common.instance, limits)?;
            let sym = sym_set(&a, &eta)?;
            let members = sym.members();
            emit_json(
                common.out.as_deref(),
                &json!({
                    "eta": eta,
                    "size": members.len().to_string(),
                    "members": encode(members),
                    "symmetric_neighbourhood": sym.is_symmetric_neighbourhood(),
                }),
            )?;
        }
        Command::Lemma {
            common,
            epsilon,
            subset,
        } => {
            let (_, a) = load_instance(&common.instance, limits)?;
            let aprime = match subset {
                Some(path) => {
                    let spec: SetSpec = serde_json::from_str(&read(&path)?)
                        .map_err(|e| Error::InvalidInstance(e.to_string()))?;
                    generate_in(a.ctx(), &spec)?
                }
                None => a.clone(),
            };
            let out = lemma_step(&aprime, &a, &epsilon)?;
            let mut doc = json!({
                "epsilon": epsilon,
                "aprime_size": out.aprime_size.to_string(),
                "a_size": out.a_size.to_string(),
                "aprime_a_size": out.aprime_a_size.to_string(),
                "level_set_size": out.level_set_size.to_string(),
                "overlap_threshold": out.overlap_threshold,
                "ledger": out.ledger,
            });
            match &out.case {
                LemmaCase::Shrink { shrunk, witness } => {
                    doc["case"] = json!("shrink");
                    doc["witness"] = json!(a.ctx().components(*witness));
                    doc["shrunk"] = json!(encode(shrunk));
                }
                LemmaCase::Terminate { level_set, sym } => {
                    doc["case"] = json!("terminate");
                    doc["level_set"] = json!(encode(level_set));
                    doc["sym"] = json!(encode(sym.members()));
                }
            }
            emit_json(common.out.as_deref(), &doc)?;
        }
        Command::Run { common, k } => {
            let (spec, a) = load_instance(&common.instance, limits)?;
            let cert = theorem_for_instance(&spec, &a, k)?;
            for step in &cert.trace.steps {
                progress(
                    trace,
                    json!({
                        "step": step.index.to_string(),
                        "case": step.case,
                        "aprime_size": step.aprime_size.to_string(),
                        "aprime_a_size": step.aprime_a_size.to_string(),
                    }),
                );
            }
            match &common.out {
                Some(path) => emit_certificate(&cert, path)?,
                None => emit(None, &cert.to_canonical_json()?)?,
            }
            return Ok(if cert.verified { EXIT_OK } else { EXIT_UNVERIFIED });
        }
        Command::Invariant { common, k } => {
            let (_, a) = load_instance(&common.instance, limits)?;
            let inv = almost_invariant(&a, k)?;
            let holds = inv.ledger.iter().all(|e| e.holds);
            emit_json(
                common.out.as_deref(),
                &json!({
                    "k": k.to_string(),
                    "s": encode(&inv.s),
                    "level": inv.level.to_string(),
                    "astar": encode(&inv.astar),
                    "ratio": inv.ratio,
                    "chain": inv.chain.iter().map(u64::to_string).collect::<Vec<_>>(),
                    "ledger": inv.ledger,
                }),
            )?;
            return Ok(if holds { EXIT_OK } else { EXIT_UNVERIFIED });
        }
        Command::Sweep {
            common,
            param,
            values,
        } => {
            let spec = InstanceSpec::from_json(&read(&common.instance)?)?;
            let grid = SweepGrid {
                parameter: param,
                values,
            };
            let points = family_sweep(&spec, &grid, limits)?;
            let mut csv = String::from("value,size,square,difference,square_difference,K\n");
            for p in points {
                let s = &p.stats;
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.value, s.size, s.square, s.difference, s.square_difference, s.doubling
                ));
            }
            emit(common.out.as_deref(), &csv)?;
        }
        Command::Verify {
            certificate,
            instance,
            out,
        } => {
            let cert = Certificate::from_json_with(&read(&certificate)?, limits)?;
            let (spec, a) = load_instance(&instance, limits)?;
            if spec.group != cert.instance.group {
                return Err(Error::InvalidInstance(
                    "certificate and instance name different groups".into(),
                ));
            }
            let report = verify_certificate(&cert, &a)?;
            for check in report.failures() {
                progress(trace, json!({ "failed": check.name }));
            }
            emit_json(out.as_deref(), &report)?;
            return Ok(if report.overall { EXIT_OK } else { EXIT_UNVERIFIED });
        }
    }
    Ok(EXIT_OK)
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceExceeded { .. } => EXIT_BUDGET,
        Error::InvariantViolated(_) => EXIT_UNVERIFIED,
        _ => EXIT_INVALID,
    }
}

fn report_error(err: &Error) {
    let line = json!({ "error": err.kind(), "message": err.to_string() });
    eprintln!("{line}");
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let line = json!({ "error": "usage", "message": e.to_string().trim_end() });
            eprintln!("{line}");
            return EXIT_INVALID;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            report_error(&err);
            exit_code(&err)
        }
    }
}
