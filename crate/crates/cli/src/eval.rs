//! Named function registry shared by `eval` and `table`.

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use mvgamma::distributions::{
    generalized_multinomial_logpmf, matrix_dirichlet_logpdf, multinomial_logpmf_reference,
    DirichletParams, MultinomialParams,
};
use mvgamma::lab::{lemma_j, proof_g, proof_h, proof_phi, LemmaArgs, QInstance};
use mvgamma::matrix::{minkowski_det_check, MatrixInput};
use mvgamma::mvgamma::{ln_gamma_m, psi_m};
use mvgamma::special::{digamma, ln_gamma, polygamma};
use mvgamma::{MatrixPartition, PolyOrder, SimplexPoint, SymMatrix};

/// Registered functions with the JSON fields each one takes.
pub const FUNCTIONS: &[(&str, &str)] = &[
    ("ln_gamma", "x"),
    ("digamma", "x"),
    ("polygamma", "order, x"),
    ("ln_gamma_m", "m, z"),
    ("psi_m", "order, m, z"),
    ("logdet", "matrix"),
    ("minkowski", "a, b"),
    ("lemma_J", "beta, u, y"),
    ("H", "y, beta, u"),
    ("phi", "y, beta, u"),
    ("g", "s, y, beta"),
    ("q", "instance fields, x"),
    ("ln_q", "instance fields, x"),
    ("ln_q_derivative", "instance fields, x, order"),
    ("limit", "instance fields"),
    ("R", "instance fields, x (log value)"),
    ("dirichlet_logpdf", "params {m, a}, partition"),
    ("multinomial_logpmf", "params {m, n, k}, partition"),
    ("multinomial_reference", "n, k, p"),
];

/// Alternative spellings accepted on the command line.
const ALIASES: &[(&str, &str)] = &[
    ("lnQ", "ln_q"),
    ("ln_Q", "ln_q"),
    ("Q", "q"),
    ("ln_R", "R"),
    ("ln_r", "R"),
    ("lnQ_derivative", "ln_q_derivative"),
    ("ln_Q_derivative", "ln_q_derivative"),
    ("lemma_j", "lemma_J"),
    ("h", "H"),
];

/// Error raised for a name missing from [`FUNCTIONS`].
#[derive(Debug)]
pub struct UnknownFunction(pub String);

impl std::fmt::Display for UnknownFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = FUNCTIONS.iter().map(|(n, _)| *n).collect();
        write!(
            f,
            "unknown function {:?}; available: {}",
            self.0,
            names.join(", ")
        )
    }
}

impl std::error::Error for UnknownFunction {}

pub fn canonical(name: &str) -> Result<&'static str> {
    if let Some((n, _)) = FUNCTIONS.iter().find(|(n, _)| *n == name) {
        return Ok(n);
    }
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map(|(_, n)| *n)
        .ok_or_else(|| UnknownFunction(name.to_string()).into())
}

/// Fields of a JSON object consumed one at a time; leftovers are rejected.
struct Args(Map<String, Value>);

impl Args {
    fn new(value: Value) -> Result<Self> {
        match value {
            Value::Object(map) => Ok(Args(map)),
            other => bail!("arguments must be a JSON object, got {other}"),
        }
    }

    fn take<T: DeserializeOwned>(&mut self, key: &str) -> Result<T> {
        let v = self
            .0
            .remove(key)
            .ok_or_else(|| anyhow!("missing argument {key:?}"))?;
        serde_json::from_value(v).with_context(|| format!("invalid argument {key:?}"))
    }

    fn order(&mut self) -> Result<PolyOrder> {
        Ok(PolyOrder::new(self.take("order")?)?)
    }

    fn matrix(&mut self, key: &str) -> Result<SymMatrix> {
        let input: MatrixInput = self.take(key)?;
        Ok(SymMatrix::try_from(input)?)
    }

    /// Consumes every remaining field as a Q instance.
    fn instance(&mut self) -> Result<QInstance> {
        let rest = std::mem::take(&mut self.0);
        serde_json::from_value(Value::Object(rest)).context("invalid instance")
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.0.keys().next() {
            bail!("unexpected argument {key:?}");
        }
        Ok(())
    }
}

/// Evaluates `name` at the JSON object `args`.
pub fn evaluate(name: &str, args: Value) -> Result<Value> {
    let name = canonical(name)?;
    let mut a = Args::new(args)?;
    let value = match name {
        "ln_gamma" => json!(ln_gamma(a.take("x")?)?),
        "digamma" => json!(digamma(a.take("x")?)?),
        "polygamma" => {
            let k = a.order()?;
            json!(polygamma(k, a.take("x")?)?)
        }
        "ln_gamma_m" => json!(ln_gamma_m(a.take("m")?, a.take("z")?)?),
        "psi_m" => {
            let k = a.order()?;
            json!(psi_m(k, a.take("m")?, a.take("z")?)?)
        }
        "logdet" => json!(a.matrix("matrix")?.logdet_pd()?),
        "minkowski" => {
            let (x, y) = (a.matrix("a")?, a.matrix("b")?);
            serde_json::to_value(minkowski_det_check(&x, &y)?)?
        }
        "lemma_J" => {
            let beta = a.take("beta")?;
            let u: SimplexPoint = a.take("u")?;
            json!(lemma_j(&LemmaArgs::new(beta, u, a.take("y")?)?))
        }
        "H" => json!(proof_h(a.take("y")?, a.take("beta")?, a.take("u")?)?),
        "phi" => json!(proof_phi(a.take("y")?, a.take("beta")?, a.take("u")?)?),
        "g" => json!(proof_g(a.take("s")?, a.take("y")?, a.take("beta")?)?),
        "q" | "ln_q" | "R" => {
            let x: f64 = a.take("x")?;
            let inst = a.instance()?;
            match name {
                "q" => json!(inst.ln_q(x)?.exp()),
                "ln_q" => json!(inst.ln_q(x)?),
                _ => json!(inst.ln_r(x)?),
            }
        }
        "ln_q_derivative" => {
            let x: f64 = a.take("x")?;
            let order: u32 = a.take("order")?;
            json!(a.instance()?.ln_q_derivative(x, order)?)
        }
        "limit" => json!(a.instance()?.limit_neg_lnq_prime()),
        "dirichlet_logpdf" => {
            let params: DirichletParams = a.take("params")?;
            let part: MatrixPartition = a.take("partition")?;
            json!(matrix_dirichlet_logpdf(&params, &part)?)
        }
        "multinomial_logpmf" => {
            let params: MultinomialParams = a.take("params")?;
            let part: MatrixPartition = a.take("partition")?;
            json!(generalized_multinomial_logpmf(&params, &part)?)
        }
        "multinomial_reference" => {
            let n = a.take("n")?;
            let k: Vec<u64> = a.take("k")?;
            let p: Vec<f64> = a.take("p")?;
            json!(multinomial_logpmf_reference(n, &k, &p)?)
        }
        _ => unreachable!("registry and dispatch disagree on {name}"),
    };
    a.finish()?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(name: &str, args: &str) -> Value {
        evaluate(name, serde_json::from_str(args).unwrap()).unwrap()
    }

    #[test]
    fn registry_is_dispatched() {
        for (name, _) in FUNCTIONS {
            let err = evaluate(name, json!({})).unwrap_err();
            assert!(err.downcast_ref::<UnknownFunction>().is_none(), "{name}");
        }
    }

    #[test]
    fn documented_examples() {
        assert_eq!(eval("ln_gamma_m", r#"{"m":1,"z":2}"#), json!(0.0));
        let j = eval("lemma_J", r#"{"beta":0,"u":[0.5],"y":2}"#)
            .as_f64()
            .unwrap();
        assert!((j - 1.0 / 3.0).abs() < 1e-15);
        let q = eval(
            "q",
            r#"{"m":1,"n":2,"alpha":[1],"partition":[[0.5]],"x":1}"#,
        );
        assert!((q.as_f64().unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn aliases_resolve() {
        assert_eq!(canonical("lnQ").unwrap(), "ln_q");
        assert!(canonical("nope")
            .unwrap_err()
            .downcast_ref::<UnknownFunction>()
            .is_some());
    }

    #[test]
    fn leftover_fields_are_rejected() {
        assert!(evaluate("ln_gamma", json!({"x": 2.0, "y": 1.0})).is_err());
    }
}
