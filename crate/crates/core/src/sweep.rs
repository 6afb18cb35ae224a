//! Seeded verification sweeps.
//!
//! Trial `t` of a sweep draws everything it needs from
//! [`rng_stream`]`(seed, t)`, so trials are independent of each other and of
//! the number of worker threads. Per-trial reports are merged with the
//! associative [`VerificationReport::merge`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    generalized_multinomial_logpmf, multinomial_logpmf_reference, MultinomialParams,
};
use crate::error::{domain, Result};
use crate::lab::{
    self, check_h_convexity, check_lcm_with_slack, lemma_decomposition, lemma_j,
    lemma_leading_term, proof_g, proof_phi_star_shaped, proof_phi_superadditive, thm2_margins,
    LemmaArgs, QInstance, EQUALITY_TOL,
};
use crate::matrix::{
    minkowski_det_check, rng_stream, sample_simplex_interior, MatrixPartition, SymMatrix,
};
use crate::report::VerificationReport;

/// The claims a sweep can verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Lemma,
    Decomposition,
    Lcm,
    Thm2,
    Minkowski,
    Limit,
    HConvexity,
    Phi,
    G,
    M1Reduction,
}

impl Claim {
    pub const ALL: [Claim; 10] = [
        Claim::Lemma,
        Claim::Decomposition,
        Claim::Lcm,
        Claim::Thm2,
        Claim::Minkowski,
        Claim::Limit,
        Claim::HConvexity,
        Claim::Phi,
        Claim::G,
        Claim::M1Reduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::Lemma => "lemma",
            Claim::Decomposition => "decomposition",
            Claim::Lcm => "lcm",
            Claim::Thm2 => "thm2",
            Claim::Minkowski => "minkowski",
            Claim::Limit => "limit",
            Claim::HConvexity => "h-convexity",
            Claim::Phi => "phi",
            Claim::G => "g",
            Claim::M1Reduction => "m1-reduction",
        }
    }

    /// Tolerances used unless overridden, keyed by name.
    pub fn default_tolerances(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            Claim::Lemma => &[("slack", lab::DIRECT_SLACK), ("near_zero", 1e-12)],
            Claim::Decomposition => &[("relative", 1e-10)],
            Claim::Lcm => &[("slack", lab::SIGN_SLACK)],
            Claim::Thm2 => &[("slack", lab::LOG_SLACK), ("equality", EQUALITY_TOL)],
            Claim::Minkowski => &[("slack", crate::matrix::MINKOWSKI_SLACK)],
            Claim::Limit => &[("slack", lab::DIRECT_SLACK), ("agreement", 1e-2)],
            Claim::HConvexity | Claim::Phi | Claim::G => &[("slack", lab::DIRECT_SLACK)],
            Claim::M1Reduction => &[("relative", 1e-12), ("normalization", 1e-10)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Claim {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Claim::ALL.iter().map(|c| c.name()).collect();
                domain(format!(
                    "unknown claim {s:?}; expected one of {}",
                    known.join(", ")
                ))
            })
    }
}

/// Everything that determines a sweep's result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub claim: Claim,
    pub trials: u64,
    pub seed: u64,
    /// Overrides merged over [`Claim::default_tolerances`].
    pub tolerances: BTreeMap<String, f64>,
    /// Highest derivative order for `lcm`.
    pub max_order: u32,
    /// Log-grid size for `lcm`.
    pub grid_points: usize,
    /// Fixed instance for `lcm`, `thm2` and `limit`; random per trial otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<QInstance>,
}

impl SweepConfig {
    pub fn new(claim: Claim, trials: u64, seed: u64) -> Self {
        SweepConfig {
            claim,
            trials,
            seed,
            tolerances: BTreeMap::new(),
            max_order: 8,
            grid_points: 64,
            instance: None,
        }
    }

    /// Effective tolerances; unknown override keys are rejected.
    pub fn effective_tolerances(&self) -> Result<BTreeMap<String, f64>> {
        let mut tol = self.claim.default_tolerances();
        for (k, v) in &self.tolerances {
            if !tol.contains_key(k) {
                let known: Vec<_> = tol.keys().cloned().collect();
                return Err(domain(format!(
                    "unknown tolerance {k:?} for claim {}; expected one of {}",
                    self.claim,
                    known.join(", ")
                )));
            }
            if !(v.is_finite() && *v >= 0.0) {
                return Err(domain(format!("tolerance {k} must be finite and >= 0")));
            }
            tol.insert(k.clone(), *v);
        }
        Ok(tol)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain("trials must be at least 1"));
        }
        if self.max_order == 0 || self.max_order > lab::MAX_DERIVATIVE_ORDER {
            return Err(domain(format!(
                "max order must lie in 1..={}",
                lab::MAX_DERIVATIVE_ORDER
            )));
        }
        if self.grid_points == 0 {
            return Err(domain("grid must have at least one point"));
        }
        Ok(())
    }
}

/// Bounds for randomly generated Q instances.
const MAX_M: usize = 4;
const MAX_R: usize = 4;
const MAX_N: u32 = 6;

const LCM_GRID: (f64, f64) = (0.05, 50.0);
const THM2_RANGE: (f64, f64) = (0.05, 20.0);
const THM2_MIN_GAP: f64 = 1e-2;
const LIMIT_POINTS: [f64; 3] = [1e2, 1e3, 1e4];

struct Ctx<'a> {
    config: &'a SweepConfig,
    tol: BTreeMap<String, f64>,
    grid: Vec<f64>,
}

impl Ctx<'_> {
    fn tol(&self, key: &str) -> f64 {
        self.tol[key]
    }

    fn instance(&self, rng: &mut ChaCha8Rng) -> Result<QInstance> {
        match &self.config.instance {
            Some(q) => Ok(q.clone()),
            None => QInstance::random(rng, MAX_M, MAX_R, MAX_N),
        }
    }
}

/// Runs the sweep described by `config` on the current rayon pool.
pub fn run(config: &SweepConfig) -> Result<VerificationReport> {
    config.validate()?;
    let ctx = Ctx {
        config,
        tol: config.effective_tolerances()?,
        grid: lab::log_grid(LCM_GRID.0, LCM_GRID.1, config.grid_points),
    };
    let claim = config.claim;
    let mut report = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_stream(config.seed, t);
            let mut trial = VerificationReport::new(claim.name());
            run_trial(&ctx, t, &mut rng, &mut trial)?;
            Ok(trial)
        })
        .try_reduce(|| empty(claim), |a, b| Ok(a.merge(b)))?;

    report.trials = config.trials;
    report.seed = Some(config.seed);
    let mut cfg = serde_json::to_value(config).expect("config serializes");
    cfg["tolerances"] = serde_json::to_value(&ctx.tol).expect("tolerances serialize");
    if claim == Claim::Lcm {
        cfg["grid"] =
            serde_json::json!({ "lo": LCM_GRID.0, "hi": LCM_GRID.1, "points": config.grid_points });
    }
    report.config = cfg;
    report.timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    Ok(report)
}

fn empty(claim: Claim) -> VerificationReport {
    VerificationReport::new(claim.name())
}

fn run_trial(ctx: &Ctx, t: u64, rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    match ctx.config.claim {
        Claim::Lemma => lemma_trial(ctx, rng, out),
        Claim::Decomposition => decomposition_trial(ctx, rng, out),
        Claim::Lcm => {
            let inst = ctx.instance(rng)?;
            let r = check_lcm_with_slack(&inst, &ctx.grid, ctx.config.max_order, ctx.tol("slack"))?;
            *out = std::mem::replace(out, empty(Claim::Lcm)).merge(r);
            Ok(())
        }
        Claim::Thm2 => thm2_trial(ctx, t, rng, out),
        Claim::Minkowski => minkowski_trial(ctx, rng, out),
        Claim::Limit => limit_trial(ctx, rng, out),
        Claim::HConvexity => h_convexity_trial(rng, out),
        Claim::Phi => phi_trial(ctx, rng, out),
        Claim::G => g_trial(ctx, rng, out),
        Claim::M1Reduction => m1_trial(ctx, rng, out),
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// β ∈ [0, 10], y log-uniform on [1.001, 1000].
fn lemma_scalars(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let beta = rng.gen_range(0.0..=10.0);
    let y = log_uniform(rng, 1.001, 1e3);
    (beta, y)
}

fn lemma_args(rng: &mut ChaCha8Rng, min_r: usize) -> Result<LemmaArgs> {
    let r = rng.gen_range(min_r..=6);
    let u = sample_simplex_interior(r, rng)?;
    let (beta, y) = lemma_scalars(rng);
    LemmaArgs::new(beta, u, y)
}

fn lemma_trial(ctx: &Ctx, rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    let args = lemma_args(rng, 1)?;
    let j = lemma_j(&args);
    out.observe("J", j, ctx.tol("slack"));
    // J is compared with its own leading term; absolute smallness is expected
    // whenever y^β is large.
    if j <= ctx.tol("near_zero") * lemma_leading_term(&args) {
        out.mark_near_zero();
    }
    Ok(())
}

fn decomposition_trial(
    ctx: &Ctx,
    rng: &mut ChaCha8Rng,
    out: &mut VerificationReport,
) -> Result<()> {
    let args = lemma_args(rng, 2)?;
    let d = lemma_decomposition(&args)?;
    out.observe("relative_error", -d.relative_error(), ctx.tol("relative"));
    Ok(())
}

/// Draws `len` points from [`THM2_RANGE`] with pairwise gaps of at least
/// [`THM2_MIN_GAP`].
fn separated_points(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let xs: Vec<f64> = (0..len)
            .map(|_| rng.gen_range(THM2_RANGE.0..=THM2_RANGE.1))
            .collect();
        let separated = xs
            .iter()
            .enumerate()
            .all(|(i, a)| xs[i + 1..].iter().all(|b| (a - b).abs() >= THM2_MIN_GAP));
        if separated {
            return xs;
        }
    }
}

/// Every fifth trial repeats one point everywhere (both equalities expected),
/// the trial after it repeats only x₁ = x₃ (three-factor equality expected),
/// and the rest use well-separated points (no equality expected).
fn thm2_trial(ctx: &Ctx, t: u64, rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    let inst = ctx.instance(rng)?;
    let len = rng.gen_range(3..=5usize);
    let xs = match t % 5 {
        0 => vec![rng.gen_range(THM2_RANGE.0..=THM2_RANGE.1); len],
        1 => {
            let mut xs = separated_points(rng, len);
            xs[2] = xs[0];
            xs
        }
        _ => separated_points(rng, len),
    };
    let weights = sample_simplex_interior(len - 1, rng)?.coords();
    let m = thm2_margins(&inst, &xs, Some(&weights))?;

    let slack = ctx.tol("slack");
    let eq_tol = ctx.tol("equality");
    out.observe("jensen", m.jensen, slack);
    out.observe("superadditive", m.superadditive, slack);
    let three = m.three_factor.expect("at least three points");
    out.observe("three_factor", three, slack);

    let all_equal = xs.iter().all(|x| *x == xs[0]);
    let ends_equal = xs[0] == xs[2];
    for (name, fired, expected) in [
        ("jensen_equality", m.jensen.abs() < eq_tol, all_equal),
        ("three_factor_equality", three.abs() < eq_tol, ends_equal),
    ] {
        if fired {
            out.count(name);
            out.mark_near_zero();
        }
        if expected {
            out.count(&format!("{name}_expected"));
        }
        match (fired, expected) {
            (true, false) => out.flag_violation(&format!("{name}_spurious")),
            (false, true) => out.flag_violation(&format!("{name}_missed")),
            _ => {}
        }
    }
    Ok(())
}

/// `G Gᵀ` with `G` of size `m × p`; singular whenever `p < m`.
fn random_psd(rng: &mut ChaCha8Rng, m: usize) -> Result<SymMatrix> {
    let p = rng.gen_range(1..=m + 1);
    let g: Vec<f64> = (0..m * p)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            data[i * m + j] = (0..p).map(|k| g[i * p + k] * g[j * p + k]).sum();
        }
    }
    SymMatrix::from_row_major(m, data)
}

fn minkowski_trial(ctx: &Ctx, rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    let m = rng.gen_range(1..=5usize);
    let a = random_psd(rng, m)?;
    let b = random_psd(rng, m)?;
    let c = minkowski_det_check(&a, &b)?;
    out.observe("minkowski", c.lhs - c.rhs, ctx.tol("slack"));
    Ok(())
}

fn limit_trial(ctx: &Ctx, rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    let inst = ctx.instance(rng)?;
    let limit = inst.limit_neg_lnq_prime();
    out.observe("limit_nonnegative", limit, ctx.tol("slack"));
    let gaps = LIMIT_POINTS
        .iter()
        .map(|x| Ok((-inst.ln_q_derivative(*x, 1)? - limit).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let last = *gaps.last().expect("limit points");
    out.observe("agreement_at_1e4", ctx.tol("agreement") - last, 0.0);
    for w in gaps.windows(2) {
        out.observe("monotone_improvement", w[0] - w[1], 0.0);
    }
    Ok(())
}

fn h_convexity_trial(rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    let (beta, y) = lemma_scalars(rng);
    let grid: Vec<f64> = (0..9).map(|_| rng.gen_range(0.001..0.999)).collect();
    let r = check_h_convexity(y, beta, &grid)?;
    *out = std::mem::replace(out, empty(Claim::HConvexity)).merge(r);
    Ok(())
}

fn phi_trial(ctx: &Ctx, rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    let (beta, y) = lemma_scalars(rng);
    // one argument in ten is exactly zero to exercise φ(0) = 0
    let draw = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.1) {
            0.0
        } else {
            rng.gen_range(0.0..=1.0)
        }
    };
    let (u1, u2) = (draw(rng), draw(rng));
    let slack = ctx.tol("slack");
    let c = proof_phi_superadditive(y, beta, u1, u2)?;
    out.observe("superadditive", c.margin(), slack);
    let nu = rng.gen_range(0.0..=1.0);
    let t = rng.gen_range(0.0..=2.0);
    let c = proof_phi_star_shaped(y, beta, nu, t)?;
    out.observe("star_shaped", c.margin(), slack);
    Ok(())
}

fn g_trial(ctx: &Ctx, rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    let (beta, y) = lemma_scalars(rng);
    let s = rng.gen_range(1.0..=50.0);
    let margin = proof_g(1.0, y, beta)? - proof_g(s, y, beta)?;
    out.observe("g_below_g1", margin, ctx.tol("slack"));
    Ok(())
}

/// Calls `visit` with every `k ∈ N₀^r` with `Σk ≤ n`.
pub fn for_each_composition(r: usize, n: u64, visit: &mut dyn FnMut(&[u64])) {
    fn rec(prefix: &mut Vec<u64>, r: usize, left: u64, visit: &mut dyn FnMut(&[u64])) {
        if prefix.len() == r {
            visit(prefix);
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(prefix, r, left - k, visit);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(r), r, n, visit);
}

/// For r = 1..=3 and n = 1..=6: the generalized PMF at m = 1 matches the
/// classical multinomial at every k, and the PMF sums to 1.
fn m1_trial(ctx: &Ctx, rng: &mut ChaCha8Rng, out: &mut VerificationReport) -> Result<()> {
    let rel = ctx.tol("relative");
    let norm = ctx.tol("normalization");
    for r in 1..=3usize {
        let p = sample_simplex_interior(r, rng)?;
        let partition = MatrixPartition::from_probabilities(p.explicit())?;
        let probs = p.coords();
        for n in 1..=6u64 {
            let mut total = 0.0;
            let mut failure = None;
            for_each_composition(r, n, &mut |k| {
                let result = MultinomialParams::new(1, n, k.to_vec()).and_then(|params| {
                    let got = generalized_multinomial_logpmf(&params, &partition)?;
                    let want = multinomial_logpmf_reference(n, k, &probs)?;
                    Ok((got, want))
                });
                match result {
                    Ok((got, want)) => {
                        let err = (got - want).abs() / want.abs().max(1.0);
                        out.observe("agreement", -err, rel);
                        total += got.exp();
                    }
                    Err(e) => failure = Some(e),
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            out.observe("normalization", -(total - 1.0).abs(), norm);
        }
    }
    Ok(())
}
