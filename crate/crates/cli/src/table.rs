//! Grids of function values as CSV.

use std::fmt::Write as _;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{Map, Value};

use crate::eval::{canonical, evaluate};

/// `a:b:n` (n evenly spaced points from a to b inclusive) or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(Vec<f64>);

impl FromStr for Axis {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64> {
            let v: f64 = t
                .trim()
                .parse()
                .with_context(|| format!("bad number {t:?}"))?;
            if !v.is_finite() {
                bail!("axis bound {t:?} is not finite");
            }
            Ok(v)
        };
        match parts.as_slice() {
            [v] => Ok(Axis(vec![num(v)?])),
            [a, b, n] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .with_context(|| format!("bad point count {n:?}"))?;
                match n {
                    0 => bail!("axis needs at least one point"),
                    1 if a != b => bail!("a single-point axis needs equal bounds"),
                    1 => Ok(Axis(vec![a])),
                    _ => {
                        let step = (b - a) / (n - 1) as f64;
                        let mut v: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
                        v[n - 1] = b;
                        Ok(Axis(v))
                    }
                }
            }
            _ => bail!("axis {s:?} must be a number or lo:hi:points"),
        }
    }
}

impl Axis {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Builds the table for `function` over the named axes.
///
/// `fixed` holds non-axis arguments (instance fields, order, m). Every axis
/// becomes a column; at most two axes may vary.
pub fn tabulate(
    function: &str,
    axes: &[(&str, Axis)],
    fixed: Map<String, Value>,
) -> Result<String> {
    let name = canonical(function)?;
    let varying = axes.iter().filter(|(_, a)| a.values().len() > 1).count();
    if varying > 2 {
        bail!("tables vary at most two axes, got {varying}");
    }
    let mut out = String::new();
    let header: Vec<&str> = axes.iter().map(|(n, _)| *n).chain([name]).collect();
    writeln!(out, "{}", header.join(",")).expect("writing to a string");

    let mut index = vec![0usize; axes.len()];
    loop {
        let mut args = fixed.clone();
        let mut row = Vec::with_capacity(axes.len() + 1);
        for ((axis, values), &i) in axes.iter().zip(&index) {
            let v = values.values()[i];
            // lemma_J takes the simplex point as a list of explicit coordinates
            let arg = if name == "lemma_J" && *axis == "u" {
                Value::from(vec![v])
            } else {
                Value::from(v)
            };
            args.insert(axis.to_string(), arg);
            row.push(v);
        }
        let point = || {
            axes.iter()
                .zip(&row)
                .map(|((a, _), v)| format!("{a}={v}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let value =
            evaluate(name, Value::Object(args)).with_context(|| format!("at {}", point()))?;
        let value = value
            .as_f64()
            .ok_or_else(|| anyhow!("{name} does not return a number and cannot be tabulated"))?;
        row.push(value);
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(",")).expect("writing to a string");

        // odometer over the axes, last axis fastest
        let mut d = axes.len();
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            index[d] += 1;
            if index[d] < axes[d].1.values().len() {
                break;
            }
            index[d] = 0;
        }
    }
}
