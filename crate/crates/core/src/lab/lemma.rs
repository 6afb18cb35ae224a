//! The positivity function
//!
//! J(y) = 1/(y^β (y-1)) - Σ_{i=1}^{r+1} 1/(y^{β/u_i} (y^{1/u_i} - 1)),
//!
//! and the three single-variable functions whose convexity, super-additivity
//! and monotonicity each imply J > 0.

use serde::Serialize;

use super::DIRECT_SLACK;
use crate::error::{domain, Result};
use crate::matrix::SimplexPoint;
use crate::report::VerificationReport;

/// Smallest admissible `y` for [`LemmaArgs`].
pub const Y_FLOOR: f64 = 1.0 + 1e-6;

/// `1/(y^{β/u} (y^{1/u} - 1))` written as `e^{-(β+1)a} / (1 - e^{-a})` with
/// `a = ln(y)/u`, which neither overflows nor forms inf/inf. Huge `a`
/// underflows to an exact zero.
fn term(beta: f64, u: f64, ln_y: f64) -> f64 {
    let a = ln_y / u;
    (-(beta + 1.0) * a).exp() / -(-a).exp_m1()
}

fn check_y_beta(y: f64, beta: f64) -> Result<()> {
    if !(y.is_finite() && y > 1.0) {
        return Err(domain(format!("y must be a finite number > 1, got {y}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(domain(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaArgs {
    beta: f64,
    u: SimplexPoint,
    y: f64,
}

impl LemmaArgs {
    pub fn new(beta: f64, u: SimplexPoint, y: f64) -> Result<Self> {
        check_y_beta(y, beta)?;
        if y < Y_FLOOR {
            return Err(domain(format!("y must be at least {Y_FLOOR}, got {y}")));
        }
        Ok(LemmaArgs { beta, u, y })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn u(&self) -> &SimplexPoint {
        &self.u
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

/// J evaluated from `ln y` over all `r + 1` simplex coordinates.
fn j_from_log(beta: f64, coords: &[f64], ln_y: f64) -> f64 {
    let lead = term(beta, 1.0, ln_y);
    coords
        .iter()
        .fold(lead, |acc, u| acc - term(beta, *u, ln_y))
}

pub fn lemma_j(args: &LemmaArgs) -> f64 {
    j_from_log(args.beta, &args.u.coords(), args.y.ln())
}

/// The positive leading term `1/(y^β (y-1))`, the natural scale of J.
pub fn lemma_leading_term(args: &LemmaArgs) -> f64 {
    term(args.beta, 1.0, args.y.ln())
}

/// J split along the induction step: a rescaled r-part function at
/// `z = y^{1/‖u‖₁}`, `v_i = u_i/‖u‖₁`, plus the two-part function at `‖u‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub direct: f64,
    pub rescaled: f64,
    pub two_part: f64,
}

impl Decomposition {
    pub fn relative_error(&self) -> f64 {
        let recombined = self.rescaled + self.two_part;
        (self.direct - recombined).abs() / self.direct.abs()
    }
}

pub fn lemma_decomposition(args: &LemmaArgs) -> Result<Decomposition> {
    let u = args.u.explicit();
    if u.len() < 2 {
        return Err(domain(
            "the decomposition needs at least two explicit coordinates",
        ));
    }
    let ln_y = args.y.ln();
    let mass: f64 = u.iter().sum();
    let v: Vec<f64> = u.iter().map(|ui| ui / mass).collect();
    let rescaled = j_from_log(args.beta, &v, ln_y / mass);
    let two_part = j_from_log(args.beta, &[mass, args.u.last()], ln_y);
    Ok(Decomposition {
        direct: lemma_j(args),
        rescaled,
        two_part,
    })
}

/// `H(u) = 1/(y^{β/u} (y^{1/u} - 1))` for `u > 0`.
pub fn proof_h(y: f64, beta: f64, u: f64) -> Result<f64> {
    check_y_beta(y, beta)?;
    if !(u.is_finite() && u > 0.0) {
        return Err(domain(format!("u must be finite and > 0, got {u}")));
    }
    Ok(term(beta, u, y.ln()))
}

/// H extended to `[0, ∞)` by `φ(0) = 0`.
pub fn proof_phi(y: f64, beta: f64, u: f64) -> Result<f64> {
    if u == 0.0 {
        check_y_beta(y, beta)?;
        return Ok(0.0);
    }
    proof_h(y, beta, u)
}

/// `lhs ≤ rhs` within the direct-comparison slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            lhs,
            rhs,
            holds: lhs <= rhs + DIRECT_SLACK,
        }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `φ(u1) + φ(u2) ≤ φ(u1 + u2)`.
pub fn proof_phi_superadditive(y: f64, beta: f64, u1: f64, u2: f64) -> Result<InequalityCheck> {
    let lhs = proof_phi(y, beta, u1)? + proof_phi(y, beta, u2)?;
    let rhs = proof_phi(y, beta, u1 + u2)?;
    Ok(InequalityCheck::new(lhs, rhs))
}

/// `φ(ν t) ≤ ν φ(t)` for `ν ∈ [0, 1]`.
pub fn proof_phi_star_shaped(y: f64, beta: f64, nu: f64, t: f64) -> Result<InequalityCheck> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(domain(format!("nu must lie in [0, 1], got {nu}")));
    }
    let lhs = proof_phi(y, beta, nu * t)?;
    let rhs = nu * proof_phi(y, beta, t)?;
    Ok(InequalityCheck::new(lhs, rhs))
}

/// `g(s) = s / (y^{sβ} (y^s - 1))` for `s ≥ 1`.
pub fn proof_g(s: f64, y: f64, beta: f64) -> Result<f64> {
    check_y_beta(y, beta)?;
    if !(s.is_finite() && s >= 1.0) {
        return Err(domain(format!("s must be finite and >= 1, got {s}")));
    }
    Ok(s * term(beta, 1.0 / s, y.ln()))
}

/// Convexity of H on a grid in (0, 1) plus its boundary behaviour.
///
/// Per grid point: the centered second difference over `[3u/4, 5u/4]` must be
/// non-negative and `H(u) + H(1-u)` must stay below `H(1) = 1/(y^β (y-1))`.
/// Once per call: `H` near zero vanishes and `H(1-δ) → H(1)`.
pub fn check_h_convexity(y: f64, beta: f64, u_grid: &[f64]) -> Result<VerificationReport> {
    check_y_beta(y, beta)?;
    if u_grid.is_empty() {
        return Err(domain("u grid must not be empty"));
    }
    if let Some(bad) = u_grid.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
        return Err(domain(format!("grid point {bad} is outside (0, 1)")));
    }
    let ln_y = y.ln();
    let h = |u: f64| term(beta, u, ln_y);
    let h_one = h(1.0);

    let mut report = VerificationReport::new("h-convexity");
    report.trials = 1;
    for &u in u_grid {
        let step = 0.25 * u;
        let second = h(u + step) - 2.0 * h(u) + h(u - step);
        report.observe("second_difference", second, DIRECT_SLACK);
        if second.abs() <= DIRECT_SLACK {
            report.mark_near_zero();
        }
        report.observe(
            "pair_below_endpoint",
            h_one - h(u) - h(1.0 - u),
            DIRECT_SLACK,
        );
    }

    // a = ln(y)/u = 100 puts H below e^{-100}
    let near_zero = h(ln_y / 100.0);
    report.observe("limit_at_zero", DIRECT_SLACK - near_zero, 0.0);
    let near_one = h(1.0 - 1e-9);
    report.observe("limit_at_one", 1e-6 * h_one - (near_one - h_one).abs(), 0.0);
    Ok(report)
}
