use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use mvgamma::sweep::Claim;

mod eval;
mod table;
mod verify;

use table::Axis;

#[derive(Parser)]
#[command(
    name = "mvg",
    version,
    about = "Multivariate gamma functions and seeded verification sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a function at JSON arguments and print {"value": v}
    Eval {
        /// Function name, or `list` to print the registry
        function: String,
        /// JSON object of arguments
        #[arg(default_value = "{}")]
        args: String,
    },
    /// Run a seeded verification sweep and emit its JSON report
    Verify {
        /// lemma, decomposition, lcm, thm2, minkowski, limit, h-convexity, phi, g, m1-reduction
        claim: Claim,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, env = "MVG_SEED", default_value_t = 0)]
        seed: u64,
        /// Highest derivative order for lcm
        #[arg(long, default_value_t = 8)]
        max_order: u32,
        /// Tolerance override, repeatable: --tolerance slack=1e-9
        #[arg(long = "tolerance", value_parser = verify::parse_tolerance)]
        tolerances: Vec<(String, f64)>,
        /// Report path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON instance file for lcm, thm2 and limit
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Worker threads; all cores when omitted
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Tabulate a function over one or two axes as CSV
    Table(TableArgs),
}

#[derive(Args)]
struct TableArgs {
    function: String,
    /// Axis values: a single number or lo:hi:points
    #[arg(long)]
    x: Option<Axis>,
    #[arg(long)]
    y: Option<Axis>,
    #[arg(long)]
    z: Option<Axis>,
    #[arg(long)]
    u: Option<Axis>,
    #[arg(long)]
    beta: Option<Axis>,
    #[arg(long)]
    s: Option<Axis>,
    /// Derivative or polygamma order
    #[arg(long)]
    order: Option<u32>,
    /// Matrix dimension for ln_gamma_m and psi_m
    #[arg(long)]
    m: Option<usize>,
    /// JSON instance file for the ratio functions
    #[arg(long)]
    instance: Option<PathBuf>,
    /// CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.context("writing to stdout"),
    }
}

fn cmd_eval(function: &str, args: &str) -> Result<ExitCode> {
    if function == "list" {
        let listing: String = eval::FUNCTIONS
            .iter()
            .map(|(name, fields)| format!("{name}: {fields}\n"))
            .collect();
        emit(&listing)?;
        return Ok(ExitCode::SUCCESS);
    }
    let args: Value = serde_json::from_str(args).context("arguments are not valid JSON")?;
    let value = eval::evaluate(function, args)?;
    emit(&format!("{}\n", json!({ "value": value })))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(t: TableArgs) -> Result<ExitCode> {
    let mut fixed = Map::new();
    if let Some(path) = &t.instance {
        let inst = verify::load_instance(path)?;
        match serde_json::to_value(inst).context("serializing instance")? {
            Value::Object(map) => fixed.extend(map),
            _ => unreachable!("instances serialize to objects"),
        }
    }
    if let Some(k) = t.order {
        fixed.insert("order".into(), k.into());
    }
    if let Some(m) = t.m {
        fixed.insert("m".into(), m.into());
    }
    let axes: Vec<(&str, Axis)> = [
        ("x", t.x),
        ("y", t.y),
        ("z", t.z),
        ("u", t.u),
        ("beta", t.beta),
        ("s", t.s),
    ]
    .into_iter()
    .filter_map(|(n, a)| a.map(|a| (n, a)))
    .collect();
    let csv = table::tabulate(&t.function, &axes, fixed)?;
    match &t.out {
        Some(path) => fs::write(path, csv)
            .with_context(|| format!("cannot write table to {}", path.display()))?,
        None => emit(&csv)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval { function, args } => cmd_eval(&function, &args),
        Command::Verify {
            claim,
            trials,
            seed,
            max_order,
            tolerances,
            out,
            instance,
            workers,
        } => {
            let (report, stdout) = verify::verify(verify::VerifyArgs {
                claim,
                trials,
                seed,
                max_order,
                tolerances,
                out,
                instance,
                workers,
            })?;
            if let Some(text) = stdout {
                emit(&text)?;
            }
            eprintln!(
                "{}: {} trials, {} violations, worst margin {:e}: {}",
                report.claim,
                report.trials,
                report.violations,
                report.worst_margin,
                if report.passed() { "pass" } else { "FAIL" }
            );
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Table(t) => cmd_table(t),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mvg: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
