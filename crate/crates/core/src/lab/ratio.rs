//! The ratio
//!
//! Q(x) = Γ_m(xn + (m+1)/2) / Π_{i=1}^{r+1} Γ_m(xα_i + (m+1)/2) · Π |M_i|^{xα_i}
//!
//! its determinant-free part R(x), exact derivatives of ln Q, the large-x limit
//! of -(ln Q)', and checkers for the sign pattern and the R inequalities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LOG_SLACK, SIGN_SLACK};
use crate::error::{domain, Error, Result};
use crate::matrix::{sample_partition, sample_simplex_interior, MatrixPartition};
use crate::mvgamma::{ln_gamma_m, psi_m};
use crate::report::VerificationReport;
use crate::special::PolyOrder;

/// Highest derivative order of ln Q that may be requested.
pub const MAX_DERIVATIVE_ORDER: u32 = 10;

/// Margins below this magnitude are reported as equality.
pub const EQUALITY_TOL: f64 = 1e-12;

/// Parameters `(m, n, α, M)` of Q with the log-determinants cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct QInstance {
    m: usize,
    n: u32,
    alpha: Vec<f64>,
    alpha_last: f64,
    partition: MatrixPartition,
    logdets: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRepr {
    m: usize,
    n: u32,
    alpha: Vec<f64>,
    partition: MatrixPartition,
}

impl TryFrom<InstanceRepr> for QInstance {
    type Error = Error;

    fn try_from(r: InstanceRepr) -> Result<Self> {
        QInstance::new(r.m, r.n, r.alpha, r.partition)
    }
}

impl From<QInstance> for InstanceRepr {
    fn from(q: QInstance) -> Self {
        InstanceRepr {
            m: q.m,
            n: q.n,
            alpha: q.alpha,
            partition: q.partition,
        }
    }
}

impl QInstance {
    /// `alpha` holds the `r` explicit weights; `α_{r+1} = n - Σα` must be
    /// positive and every matrix of the partition positive definite.
    pub fn new(m: usize, n: u32, alpha: Vec<f64>, partition: MatrixPartition) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(domain("Q needs m >= 1 and n >= 1"));
        }
        if partition.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: partition.dim(),
            });
        }
        if alpha.len() != partition.r() {
            return Err(domain(format!(
                "{} weights given for a partition with {} explicit parts",
                alpha.len(),
                partition.r()
            )));
        }
        if let Some(bad) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(domain(format!("weight {bad} is not positive")));
        }
        let alpha_last = n as f64 - alpha.iter().sum::<f64>();
        if alpha_last.is_nan() || alpha_last <= 0.0 {
            return Err(domain(format!(
                "weights must sum to less than n = {n} (last weight {alpha_last})"
            )));
        }
        let logdets = partition
            .all()
            .map(|mat| mat.logdet_pd())
            .collect::<Result<Vec<_>>>()?;
        Ok(QInstance {
            m,
            n,
            alpha,
            alpha_last,
            partition,
            logdets,
        })
    }

    /// Random instance with `m ≤ max_m`, `r ≤ max_r`, `n ≤ max_n`,
    /// `α = n·u` for an interior simplex point `u`, and a sampled partition.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        max_m: usize,
        max_r: usize,
        max_n: u32,
    ) -> Result<Self> {
        let m = rng.gen_range(1..=max_m);
        let r = rng.gen_range(1..=max_r);
        let n = rng.gen_range(1..=max_n);
        let u = sample_simplex_interior(r, rng)?;
        let alpha = u.explicit().iter().map(|v| v * n as f64).collect();
        let partition = sample_partition(m, r, rng)?;
        Self::new(m, n, alpha, partition)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// All `r + 1` weights.
    pub fn alpha_all(&self) -> impl Iterator<Item = f64> + '_ {
        self.alpha
            .iter()
            .copied()
            .chain(std::iter::once(self.alpha_last))
    }

    pub fn partition(&self) -> &MatrixPartition {
        &self.partition
    }

    /// ln|M_i| for all `r + 1` matrices.
    pub fn logdets(&self) -> &[f64] {
        &self.logdets
    }

    fn half(&self) -> f64 {
        (self.m as f64 + 1.0) / 2.0
    }

    fn check_x(x: f64) -> Result<()> {
        if !(x.is_finite() && x > 0.0) {
            return Err(domain(format!("x must be finite and > 0, got {x}")));
        }
        Ok(())
    }

    /// Slope of the determinant factor: Σ α_i ln|M_i|.
    pub fn det_slope(&self) -> f64 {
        self.alpha_all()
            .zip(&self.logdets)
            .map(|(a, ld)| a * ld)
            .sum()
    }

    /// ln R(x) = ln Γ_m(xn + (m+1)/2) - Σ ln Γ_m(xα_i + (m+1)/2).
    pub fn ln_r(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        let half = self.half();
        let mut value = ln_gamma_m(self.m, x * self.n as f64 + half)?;
        for a in self.alpha_all() {
            value -= ln_gamma_m(self.m, x * a + half)?;
        }
        Ok(value)
    }

    pub fn ln_q(&self, x: f64) -> Result<f64> {
        Ok(self.ln_r(x)? + x * self.det_slope())
    }

    /// ln Q(0⁺) = ln R(0⁺) = -r · ln Γ_m((m+1)/2).
    pub fn ln_q_at_zero(&self) -> f64 {
        let half = self.half();
        -(self.r() as f64) * ln_gamma_m(self.m, half).expect("(m+1)/2 lies in the domain")
    }

    /// k-th derivative of ln Q, `1 ≤ k ≤ 10`, from multivariate polygammas.
    pub fn ln_q_derivative(&self, x: f64, order: u32) -> Result<f64> {
        Self::check_x(x)?;
        if order == 0 || order > MAX_DERIVATIVE_ORDER {
            return Err(domain(format!(
                "derivative order must lie in 1..={MAX_DERIVATIVE_ORDER}, got {order}"
            )));
        }
        let psi_order = PolyOrder::new(order - 1)?;
        let half = self.half();
        let k = order as i32;
        let n = self.n as f64;
        let mut value = n.powi(k) * psi_m(psi_order, self.m, x * n + half)?;
        for a in self.alpha_all() {
            value -= a.powi(k) * psi_m(psi_order, self.m, x * a + half)?;
        }
        if order == 1 {
            value += self.det_slope();
        }
        Ok(value)
    }

    /// lim_{x→∞} -(ln Q)'(x).
    pub fn limit_neg_lnq_prime(&self) -> f64 {
        let alpha: Vec<f64> = self.alpha_all().collect();
        neg_lnq_prime_limit(self.m, self.n as f64, &alpha, &self.logdets)
    }
}

/// `-m n Σ (α_i/n) ln(|M_i|^{1/m} / (α_i/n))` from the weights and
/// log-determinants of all `r + 1` matrices.
pub fn neg_lnq_prime_limit(m: usize, n: f64, alpha_all: &[f64], logdets: &[f64]) -> f64 {
    let mf = m as f64;
    -alpha_all
        .iter()
        .zip(logdets)
        .map(|(a, ld)| a * (ld / mf - (a / n).ln()))
        .sum::<f64>()
        * mf
}

/// `points` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        hi
                    } else {
                        (a + step * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Checks `(-1)^k (ln Q)^(k)(x) ≥ -1e-9` over a grid and orders `1..=max_order`.
/// Breakdown keys `order_k` hold the worst margin for each order; margins with
/// magnitude under the slack are counted as near zero.
pub fn check_lcm(inst: &QInstance, x_grid: &[f64], max_order: u32) -> Result<VerificationReport> {
    check_lcm_with_slack(inst, x_grid, max_order, SIGN_SLACK)
}

/// [`check_lcm`] with a caller-chosen sign slack.
pub fn check_lcm_with_slack(
    inst: &QInstance,
    x_grid: &[f64],
    max_order: u32,
    slack: f64,
) -> Result<VerificationReport> {
    if x_grid.is_empty() {
        return Err(domain("x grid must not be empty"));
    }
    if max_order == 0 || max_order > MAX_DERIVATIVE_ORDER {
        return Err(domain(format!(
            "max order must lie in 1..={MAX_DERIVATIVE_ORDER}, got {max_order}"
        )));
    }
    let mut report = VerificationReport::new("lcm");
    report.trials = 1;
    for &x in x_grid {
        for k in 1..=max_order {
            let d = inst.ln_q_derivative(x, k)?;
            let margin = if k % 2 == 0 { d } else { -d };
            report.observe(&format!("order_{k}"), margin, slack);
            if margin.abs() <= slack {
                report.mark_near_zero();
            }
        }
    }
    Ok(report)
}

/// Signed margins of the three R inequalities (non-negative = holds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm2Margins {
    /// Σ λ_k ln R(x_k) - ln R(Σ λ_k x_k)
    pub jensen: f64,
    pub jensen_equality: bool,
    /// ln R(Σ x_k) - Σ ln R(x_k)
    pub superadditive: f64,
    /// ln R(x₁) + ln R(x₂+x₃) - ln R(x₁+x₂) - ln R(x₃) with x₁ ≤ x₃;
    /// present when at least three points are given.
    pub three_factor: Option<f64>,
    pub three_factor_equality: Option<bool>,
}

/// Evaluates the three inequalities for `xs` with optional convex weights
/// (uniform when omitted). The three-factor check uses the first three points,
/// swapping the first and third if needed so that x₁ ≤ x₃.
pub fn thm2_margins(inst: &QInstance, xs: &[f64], weights: Option<&[f64]>) -> Result<Thm2Margins> {
    if xs.is_empty() {
        return Err(domain("at least one point is required"));
    }
    let uniform;
    let weights = match weights {
        Some(w) => {
            if w.len() != xs.len() {
                return Err(Error::DimensionMismatch {
                    expected: xs.len(),
                    found: w.len(),
                });
            }
            if w.iter().any(|v| v.is_nan() || *v <= 0.0)
                || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12
            {
                return Err(domain("weights must be positive and sum to 1"));
            }
            w
        }
        None => {
            uniform = vec![1.0 / xs.len() as f64; xs.len()];
            &uniform
        }
    };
    let ln_r = xs
        .iter()
        .map(|x| inst.ln_r(*x))
        .collect::<Result<Vec<_>>>()?;

    let mean: f64 = weights.iter().zip(xs).map(|(w, x)| w * x).sum();
    let mean_of_logs: f64 = weights.iter().zip(&ln_r).map(|(w, v)| w * v).sum();
    let jensen = mean_of_logs - inst.ln_r(mean)?;

    let total: f64 = xs.iter().sum();
    let superadditive = inst.ln_r(total)? - ln_r.iter().sum::<f64>();

    let three_factor = if xs.len() >= 3 {
        let (mut x1, x2, mut x3) = (xs[0], xs[1], xs[2]);
        if x1 > x3 {
            std::mem::swap(&mut x1, &mut x3);
        }
        Some(inst.ln_r(x1)? + inst.ln_r(x2 + x3)? - inst.ln_r(x1 + x2)? - inst.ln_r(x3)?)
    } else {
        None
    };

    Ok(Thm2Margins {
        jensen,
        jensen_equality: jensen.abs() < EQUALITY_TOL,
        superadditive,
        three_factor,
        three_factor_equality: three_factor.map(|t| t.abs() < EQUALITY_TOL),
    })
}

/// Report form of [`thm2_margins`]; equality diagnostics are tallied in the
/// counters `jensen_equality` and `three_factor_equality`.
pub fn check_thm2(
    inst: &QInstance,
    xs: &[f64],
    weights: Option<&[f64]>,
) -> Result<VerificationReport> {
    let margins = thm2_margins(inst, xs, weights)?;
    let mut report = VerificationReport::new("thm2");
    report.trials = 1;
    report.observe("jensen", margins.jensen, LOG_SLACK);
    report.observe("superadditive", margins.superadditive, LOG_SLACK);
    if margins.jensen_equality {
        report.count("jensen_equality");
        report.mark_near_zero();
    }
    if let Some(t) = margins.three_factor {
        report.observe("three_factor", t, LOG_SLACK);
        if t.abs() < EQUALITY_TOL {
            report.count("three_factor_equality");
            report.mark_near_zero();
        }
    }
    Ok(report)
}
