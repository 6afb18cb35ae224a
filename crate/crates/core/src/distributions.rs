//! Log-densities of the type-I matrix-variate Dirichlet distribution and of the
//! matrix-parametrized multinomial analogue.
//!
//! Determinant powers use the `0 · ln 0 = 0` convention: a singular matrix
//! raised to the power zero contributes nothing, a singular matrix raised to a
//! positive power sends the log-density to `-∞`, and a negative power of a
//! singular matrix is a domain error.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::matrix::{MatrixPartition, SymMatrix};
use crate::mvgamma::ln_gamma_m;
use crate::special::ln_gamma;

/// Tolerance on Σp = 1 accepted by [`multinomial_logpmf_reference`].
const PROBABILITY_SUM_TOL: f64 = 1e-12;

#[derive(Deserialize)]
struct DirichletRepr {
    m: usize,
    a: Vec<f64>,
}

impl TryFrom<DirichletRepr> for DirichletParams {
    type Error = Error;

    fn try_from(r: DirichletRepr) -> Result<Self> {
        DirichletParams::new(r.m, r.a)
    }
}

#[derive(Deserialize)]
struct MultinomialRepr {
    m: usize,
    n: u64,
    k: Vec<u64>,
}

impl TryFrom<MultinomialRepr> for MultinomialParams {
    type Error = Error;

    fn try_from(r: MultinomialRepr) -> Result<Self> {
        MultinomialParams::new(r.m, r.n, r.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DirichletRepr")]
pub struct DirichletParams {
    m: usize,
    a: Vec<f64>,
}

impl DirichletParams {
    /// `a` holds all `r + 1` shape parameters, each greater than `(m-1)/2`.
    pub fn new(m: usize, a: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(domain("Dirichlet dimension m must be at least 1"));
        }
        if a.len() < 2 {
            return Err(domain("Dirichlet needs at least two shape parameters"));
        }
        let bound = (m as f64 - 1.0) / 2.0;
        if let Some(bad) = a
            .iter()
            .find(|v| !(v.is_finite() && **v > 0.0 && **v > bound))
        {
            return Err(domain(format!(
                "Dirichlet shape {bad} must be positive and exceed (m-1)/2 = {bound}"
            )));
        }
        Ok(DirichletParams { m, a })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shapes(&self) -> &[f64] {
        &self.a
    }

    /// Number of explicit matrices `r`.
    pub fn r(&self) -> usize {
        self.a.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultinomialRepr")]
pub struct MultinomialParams {
    m: usize,
    n: u64,
    k: Vec<u64>,
}

impl MultinomialParams {
    /// `k` holds the `r` explicit counts; the last count is `n - Σk`.
    pub fn new(m: usize, n: u64, k: Vec<u64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(domain("multinomial analogue needs m >= 1 and n >= 1"));
        }
        if k.is_empty() {
            return Err(domain(
                "multinomial analogue needs at least one explicit count",
            ));
        }
        let total: u64 = k.iter().sum();
        if total > n {
            return Err(domain(format!(
                "counts sum to {total}, which exceeds n = {n}"
            )));
        }
        Ok(MultinomialParams { m, n, k })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.k
    }

    pub fn last_count(&self) -> u64 {
        self.n - self.k.iter().sum::<u64>()
    }

    /// All `r + 1` counts.
    pub fn all_counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.k
            .iter()
            .copied()
            .chain(std::iter::once(self.last_count()))
    }
}

/// `exponent · ln|M|` under the 0 · ln 0 convention.
fn det_power_term(exponent: f64, m: &SymMatrix, label: &str) -> Result<f64> {
    if exponent == 0.0 {
        return Ok(0.0);
    }
    match m.logdet_pd() {
        Ok(ld) => Ok(exponent * ld),
        Err(Error::NotPositiveDefinite { .. }) if exponent > 0.0 => Ok(f64::NEG_INFINITY),
        Err(Error::NotPositiveDefinite { pivot }) => Err(domain(format!(
            "{label} is singular (pivot {pivot}) but carries negative exponent {exponent}"
        ))),
        Err(e) => Err(e),
    }
}

fn check_partition(m: usize, r: usize, partition: &MatrixPartition) -> Result<()> {
    if partition.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: partition.dim(),
        });
    }
    if partition.r() != r {
        return Err(domain(format!(
            "parameters describe {r} explicit matrices but the partition has {}",
            partition.r()
        )));
    }
    Ok(())
}

fn label(i: usize, r: usize) -> String {
    if i == r {
        "complement I - ΣM_i".to_string()
    } else {
        format!("M_{}", i + 1)
    }
}

/// Log-density of the type-I matrix-variate Dirichlet distribution.
pub fn matrix_dirichlet_logpdf(
    params: &DirichletParams,
    partition: &MatrixPartition,
) -> Result<f64> {
    let m = params.m;
    check_partition(m, params.r(), partition)?;
    let half = (m as f64 + 1.0) / 2.0;
    let total: f64 = params.a.iter().sum();
    let mut value = ln_gamma_m(m, total)?;
    for a in &params.a {
        value -= ln_gamma_m(m, *a)?;
    }
    for (i, (a, mat)) in params.a.iter().zip(partition.all()).enumerate() {
        value += det_power_term(a - half, mat, &label(i, params.r()))?;
    }
    Ok(value)
}

/// Log of the matrix-parametrized multinomial analogue
/// `Γ_m(n + (m+1)/2) / Π Γ_m(k_i + (m+1)/2) · Π |M_i|^{k_i}`.
pub fn generalized_multinomial_logpmf(
    params: &MultinomialParams,
    partition: &MatrixPartition,
) -> Result<f64> {
    let m = params.m;
    let r = params.k.len();
    check_partition(m, r, partition)?;
    let half = (m as f64 + 1.0) / 2.0;
    let mut value = ln_gamma_m(m, params.n as f64 + half)?;
    for k in params.all_counts() {
        value -= ln_gamma_m(m, k as f64 + half)?;
    }
    for (i, (k, mat)) in params.all_counts().zip(partition.all()).enumerate() {
        value += det_power_term(k as f64, mat, &label(i, r))?;
    }
    Ok(value)
}

/// Classical multinomial log-PMF from factorials, with `p` listing all `r + 1`
/// cell probabilities and `k` the first `r` counts.
pub fn multinomial_logpmf_reference(n: u64, k: &[u64], p: &[f64]) -> Result<f64> {
    if p.len() != k.len() + 1 {
        return Err(Error::DimensionMismatch {
            expected: k.len() + 1,
            found: p.len(),
        });
    }
    if let Some(bad) = p.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(domain(format!("cell probability {bad} is not positive")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(domain(format!("cell probabilities sum to {sum}, not 1")));
    }
    let explicit: u64 = k.iter().sum();
    if explicit > n {
        return Err(domain(format!(
            "counts sum to {explicit}, which exceeds n = {n}"
        )));
    }
    let counts = k.iter().copied().chain(std::iter::once(n - explicit));
    let mut value = ln_gamma(n as f64 + 1.0)?;
    for (c, prob) in counts.zip(p) {
        value -= ln_gamma(c as f64 + 1.0)?;
        if c > 0 {
            value += c as f64 * prob.ln();
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dirichlet_examples() {
        let uniform = DirichletParams::new(1, vec![1.0, 1.0]).unwrap();
        let part = MatrixPartition::from_probabilities(&[0.3]).unwrap();
        assert!(close(
            matrix_dirichlet_logpdf(&uniform, &part).unwrap(),
            0.0,
            1e-14
        ));

        let beta22 = DirichletParams::new(1, vec![2.0, 2.0]).unwrap();
        let part = MatrixPartition::from_probabilities(&[0.5]).unwrap();
        let v = matrix_dirichlet_logpdf(&beta22, &part).unwrap();
        assert!(close(v, 0.405_465_108_108_164_4, 1e-14));

        let p = DirichletParams::new(2, vec![1.5, 1.5]).unwrap();
        let part = MatrixPartition::from_parts(vec![SymMatrix::diag(&[0.2, 0.7])]).unwrap();
        let v = matrix_dirichlet_logpdf(&p, &part).unwrap();
        assert!(close(v, 0.647_029_583_378_654_8, 1e-14));
    }

    #[test]
    fn dirichlet_boundary_convention() {
        // Beta(2, 1) at the edge x = 1: density 2x = 2, complement exponent is 0
        let p = DirichletParams::new(1, vec![2.0, 1.0]).unwrap();
        let part = MatrixPartition::from_probabilities(&[1.0]).unwrap();
        assert!(close(
            matrix_dirichlet_logpdf(&p, &part).unwrap(),
            2f64.ln(),
            1e-14
        ));
        // Beta(2, 2) at x = 1: positive exponent on a singular complement
        let p = DirichletParams::new(1, vec![2.0, 2.0]).unwrap();
        assert_eq!(
            matrix_dirichlet_logpdf(&p, &part).unwrap(),
            f64::NEG_INFINITY
        );
        // Beta(2, 0.5) at x = 1: negative exponent on a singular complement
        let p = DirichletParams::new(1, vec![2.0, 0.5]).unwrap();
        assert!(matches!(
            matrix_dirichlet_logpdf(&p, &part),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dirichlet_param_validation() {
        assert!(DirichletParams::new(1, vec![1.0]).is_err());
        assert!(DirichletParams::new(3, vec![1.0, 2.0]).is_err());
        assert!(DirichletParams::new(3, vec![1.01, 2.0]).is_ok());
        let p = DirichletParams::new(2, vec![1.5, 1.5, 1.5]).unwrap();
        let part = MatrixPartition::from_parts(vec![SymMatrix::diag(&[0.2, 0.7])]).unwrap();
        assert!(matrix_dirichlet_logpdf(&p, &part).is_err());
    }

    #[test]
    fn multinomial_examples() {
        let p = MultinomialParams::new(1, 2, vec![1]).unwrap();
        let part = MatrixPartition::from_probabilities(&[0.5]).unwrap();
        let v = generalized_multinomial_logpmf(&p, &part).unwrap();
        assert!(close(v, -std::f64::consts::LN_2, 1e-14));

        let p = MultinomialParams::new(1, 3, vec![3]).unwrap();
        let part = MatrixPartition::from_probabilities(&[1.0]).unwrap();
        assert!(close(
            generalized_multinomial_logpmf(&p, &part).unwrap(),
            0.0,
            1e-14
        ));

        let p = MultinomialParams::new(1, 3, vec![1, 1]).unwrap();
        let part = MatrixPartition::from_probabilities(&[0.2, 0.3]).unwrap();
        let v = generalized_multinomial_logpmf(&p, &part).unwrap();
        assert!(close(v, -1.714_798_428_091_926_6, 1e-14));
    }

    #[test]
    fn multinomial_param_validation() {
        assert!(MultinomialParams::new(1, 2, vec![2, 1]).is_err());
        assert!(MultinomialParams::new(1, 0, vec![0]).is_err());
        assert!(MultinomialParams::new(1, 2, vec![]).is_err());
        assert_eq!(
            MultinomialParams::new(2, 5, vec![1, 3])
                .unwrap()
                .last_count(),
            1
        );
    }

    #[test]
    fn reference_examples() {
        let v = multinomial_logpmf_reference(1, &[1], &[0.7, 0.3]).unwrap();
        assert!(close(v, 0.7f64.ln(), 1e-14));
        let v = multinomial_logpmf_reference(2, &[1], &[0.5, 0.5]).unwrap();
        assert!(close(v, 0.5f64.ln(), 1e-14));
        let v = multinomial_logpmf_reference(4, &[2, 2], &[0.25, 0.25, 0.5]).unwrap();
        assert!(close(v, -3.753_417_975_251_507_3, 1e-14));
        assert!(multinomial_logpmf_reference(2, &[1], &[0.5, 0.4]).is_err());
        assert!(multinomial_logpmf_reference(2, &[3], &[0.5, 0.5]).is_err());
        assert!(multinomial_logpmf_reference(2, &[1], &[1.0]).is_err());
    }

    #[test]
    fn deserialization_validates() {
        let ok: DirichletParams = serde_json::from_str(r#"{"m":2,"a":[1.0,2.0]}"#).unwrap();
        assert_eq!(ok.shapes(), &[1.0, 2.0]);
        assert!(serde_json::from_str::<DirichletParams>(r#"{"m":3,"a":[0.9,2.0]}"#).is_err());
        assert!(serde_json::from_str::<MultinomialParams>(r#"{"m":1,"n":2,"k":[3]}"#).is_err());
    }
}
