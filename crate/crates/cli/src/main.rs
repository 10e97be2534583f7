//! `losssense`: evaluate risk and utility functionals on finite positions, estimate recession
//! functionals, and audit sensitivity to large losses.
//!
//! Exit codes: 0 sensitive / pass, 1 insensitive / counterexample, 2 invalid input,
//! 3 inconclusive.

mod input;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use losssense::fixtures;
use losssense::functionals::axioms::axiom_check;
use losssense::recession::{recession_with, RecessionMode};
use losssense::sensitivity::{localized_battery, sll_certify, sll_position, CertifyConfig, PositionVerdict, Status};
use losssense::{io, DomainSpec, Error};
use report::{Outcome, Report};
use serde_json::{json, Value};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "losssense", version, about = "Sensitivity of risk and utility functionals to large losses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Sampling seed.
    #[arg(long, global = true, env = "LOSSSENSE_SEED", default_value_t = 42)]
    seed: u64,
    /// Sampled positions per decision (axiom checks: random cases per axiom).
    #[arg(long, global = true, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    trials: u64,
    /// Rays are followed up to λ = 2^k.
    #[arg(long, global = true, default_value_t = 40, value_parser = clap::value_parser!(i32).range(10..=60))]
    lambda_max_exp: i32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,
    /// Worker threads for independent trials (0: one per core). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a functional at a position.
    Eval(SpecPosition),
    /// Estimate the recession functional at a position.
    Recession(SpecPosition),
    /// Decide sensitivity to large losses on a domain, or along the ray through one position.
    Sll {
        #[arg(long)]
        spec: String,
        /// full | sure | pure | expected.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        position: Option<String>,
    },
    /// Sensitivity on sure, pure and expected losses and on all positions.
    Battery {
        #[arg(long)]
        spec: String,
    },
    /// Run registered fixtures.
    Fixture {
        #[arg(long, conflicts_with_all = ["all", "list"])]
        id: Option<String>,
        /// JSON object of parameter overrides, inline or as a path.
        #[arg(long, requires = "id")]
        params: Option<String>,
        #[arg(long)]
        all: bool,
        /// Print the fixture index.
        #[arg(long, conflicts_with = "all")]
        list: bool,
    },
    /// Randomized falsification of the axioms.
    Axioms {
        #[arg(long)]
        spec: String,
    },
}

#[derive(Args)]
struct SpecPosition {
    /// Preset (`es:0.1`, `eu:power-s:0.3,0.5`, ...), inline JSON, or a JSON file.
    #[arg(long)]
    spec: String,
    /// Position file (.json / .csv), inline JSON, `p:x,p:x,...`, or `loss:p` for −1_A.
    #[arg(long)]
    position: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.opts.jobs > 0 {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.opts.jobs).build_global();
    }
    match run(&cli) {
        Ok((report, exit)) => {
            let rendered = match cli.opts.format {
                Format::Json => report.json(),
                Format::Text => report.text(),
            };
            let written = match &cli.opts.output {
                Some(path) => std::fs::write(path, rendered).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{rendered}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(exit as u8),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(Outcome::Invalid as u8)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e) as u8)
        }
    }
}

/// Numerical searches that ran off their window leave the question open; everything else
/// is a problem with the input.
fn error_code(e: &Error) -> Outcome {
    match e {
        Error::Diverged { .. } | Error::UnboundedSearch { .. } => Outcome::Inconclusive,
        _ => Outcome::Invalid,
    }
}

fn certify_config(o: &Opts) -> CertifyConfig {
    CertifyConfig { seed: o.seed, trials: o.trials as usize, max_exp: o.lambda_max_exp }
}

fn domain(arg: &str) -> losssense::Result<DomainSpec> {
    DomainSpec::parse(arg).ok_or_else(|| Error::Parameter(format!("unknown domain `{arg}` (expected full, sure, pure or expected)")))
}

fn status_outcome(s: Status) -> Outcome {
    match s {
        Status::Sensitive => Outcome::Pass,
        Status::Insensitive => Outcome::Fail,
        Status::Inconclusive => Outcome::Inconclusive,
    }
}

fn run(cli: &Cli) -> losssense::Result<(Report, Outcome)> {
    let o = &cli.opts;
    match &cli.command {
        Command::Eval(a) => {
            let spec = input::spec(&a.spec)?;
            let x = input::position(&a.position)?;
            let ev = spec.evaluate(&x)?;
            let risk = spec.risk(&x)?;
            let result = json!({ "position": io::position_json(&x), "value": ev.value, "overflow": ev.overflow, "risk": risk });
            Ok((Report::new("eval", Some(&spec), json!({}), result), Outcome::Pass))
        }
        Command::Recession(a) => {
            let spec = input::spec(&a.spec)?;
            let x = input::position(&a.position)?;
            let est = recession_with(&spec, &x, o.lambda_max_exp)?;
            // Exit on the sign of R^∞ in the risk view; a non-positive lower bound decides nothing.
            let risk = est.risk_value(spec.kind());
            let positive = risk.to_f64() > 0.0;
            let exit = match (positive, est.mode) {
                (true, _) => Outcome::Pass,
                (false, RecessionMode::NumericLowerBound) => Outcome::Inconclusive,
                (false, _) => Outcome::Fail,
            };
            let mut result = serde_json::to_value(&est).expect("estimate serializes");
            result["risk_value"] = serde_json::to_value(risk).expect("extended real serializes");
            result["position"] = io::position_json(&x);
            Ok((Report::new("recession", Some(&spec), json!({ "lambda_max_exp": o.lambda_max_exp }), result), exit))
        }
        Command::Sll { spec, domain: d, position } => {
            let spec = input::spec(spec)?;
            let d = domain(d.as_deref().unwrap_or("full"))?;
            match position {
                Some(p) => {
                    let x = input::position(p)?;
                    if !d.contains(&x) {
                        return Err(Error::Domain(format!("the position does not lie in the `{}` domain", d.name())));
                    }
                    let v = sll_position(&spec, &x, o.lambda_max_exp)?;
                    let exit = match v {
                        PositionVerdict::CertifiedSensitive { .. } => Outcome::Pass,
                        PositionVerdict::CertifiedInsensitive { .. } => Outcome::Fail,
                        PositionVerdict::Undecided { .. } => Outcome::Inconclusive,
                    };
                    let result = json!({ "position": io::position_json(&x), "verdict": v });
                    Ok((Report::new("sll", Some(&spec), json!({ "lambda_max_exp": o.lambda_max_exp }), result), exit))
                }
                None => {
                    let cfg = certify_config(o);
                    let v = sll_certify(&spec, &d, &cfg)?;
                    let exit = status_outcome(v.status);
                    let config = json!({ "seed": cfg.seed, "trials": cfg.trials, "lambda_max_exp": cfg.max_exp });
                    Ok((Report::new("sll", Some(&spec), config, serde_json::to_value(&v).expect("verdict serializes")), exit))
                }
            }
        }
        Command::Battery { spec } => {
            let spec = input::spec(spec)?;
            let cfg = certify_config(o);
            let b = localized_battery(&spec, &cfg)?;
            let statuses: Vec<Status> = b.verdicts.iter().map(|v| v.status).collect();
            let exit = if statuses.contains(&Status::Insensitive) {
                Outcome::Fail
            } else if statuses.contains(&Status::Inconclusive) {
                Outcome::Inconclusive
            } else {
                Outcome::Pass
            };
            let config = json!({ "seed": cfg.seed, "trials": cfg.trials, "lambda_max_exp": cfg.max_exp });
            Ok((Report::new("battery", Some(&spec), config, serde_json::to_value(&b).expect("battery serializes")), exit))
        }
        Command::Fixture { id, params, all, list } => {
            if *list {
                let result = serde_json::to_value(fixtures::index()).expect("index serializes");
                return Ok((Report::new("fixture", None, json!({}), json!({ "fixtures": result })), Outcome::Pass));
            }
            let reports = match (id, all) {
                (Some(id), false) => {
                    let overrides = params.as_deref().map(input::params).transpose()?.unwrap_or(Value::Null);
                    vec![fixtures::run_fixture(id, &overrides)?]
                }
                (None, true) => fixtures::run_all()?,
                _ => return Err(Error::Parameter("give --id <fixture>, --all or --list".into())),
            };
            let failed = reports.iter().filter(|r| !r.passed).count();
            let result = json!({ "passed": reports.len() - failed, "failed": failed, "reports": reports });
            let exit = if failed == 0 { Outcome::Pass } else { Outcome::Fail };
            Ok((Report::new("fixture", None, json!({ "index_sha256": report::sha256(fixtures::INDEX_JSON) }), result), exit))
        }
        Command::Axioms { spec } => {
            let spec = input::spec(spec)?;
            let r = axiom_check(&spec, o.trials as usize, o.seed);
            let exit = if r.violations().is_empty() { Outcome::Pass } else { Outcome::Fail };
            let config = json!({ "seed": o.seed, "trials": o.trials });
            Ok((Report::new("axioms", Some(&spec), config, serde_json::to_value(&r).expect("axiom report serializes")), exit))
        }
    }
}

