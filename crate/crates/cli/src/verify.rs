//! The `verify` subcommand.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use mvgamma::lab::QInstance;
use mvgamma::report::VerificationReport;
use mvgamma::sweep::{run, Claim, SweepConfig};

pub struct VerifyArgs {
    pub claim: Claim,
    pub trials: u64,
    pub seed: u64,
    pub max_order: u32,
    pub tolerances: Vec<(String, f64)>,
    pub out: Option<PathBuf>,
    pub instance: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Parses `key=value`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .with_context(|| format!("tolerance {s:?} must look like key=value"))?;
    let v: f64 = v
        .trim()
        .parse()
        .with_context(|| format!("tolerance value {v:?} is not a number"))?;
    Ok((k.trim().to_string(), v))
}

pub fn load_instance(path: &Path) -> Result<QInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read instance file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid instance in {}", path.display()))
}

/// Runs the sweep; the report is written to `out` or returned for stdout.
pub fn verify(args: VerifyArgs) -> Result<(VerificationReport, Option<String>)> {
    let mut config = SweepConfig::new(args.claim, args.trials, args.seed);
    config.max_order = args.max_order;
    config.tolerances = args.tolerances.into_iter().collect::<BTreeMap<_, _>>();
    if let Some(path) = &args.instance {
        if !matches!(args.claim, Claim::Lcm | Claim::Thm2 | Claim::Limit) {
            bail!("--instance applies only to lcm, thm2 and limit");
        }
        config.instance = Some(load_instance(path)?);
    }
    config.effective_tolerances()?;

    // open the output before the sweep so a bad path fails fast
    let mut sink = match &args.out {
        Some(path) => Some(
            File::create(path)
                .with_context(|| format!("cannot write report to {}", path.display()))?,
        ),
        None => None,
    };

    let report = match args.workers {
        Some(0) => bail!("--workers must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot start worker pool")?
            .install(|| run(&config))?,
        None => run(&config)?,
    };

    let mut text = serde_json::to_string_pretty(&report).context("serializing report")?;
    text.push('\n');
    match (&mut sink, &args.out) {
        (Some(file), Some(path)) => {
            file.write_all(text.as_bytes())
                .with_context(|| format!("cannot write report to {}", path.display()))?;
            Ok((report, None))
        }
        _ => Ok((report, Some(text))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_syntax() {
        assert_eq!(
            parse_tolerance("slack=1e-9").unwrap(),
            ("slack".into(), 1e-9)
        );
        assert!(parse_tolerance("slack").is_err());
        assert!(parse_tolerance("slack=x").is_err());
    }
}
