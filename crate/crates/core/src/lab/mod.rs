//! Evaluators and checkers for the log-complete-monotonicity of the gamma
//! ratio `Q(x)` and the auxiliary functions used to establish it.

mod lemma;
mod ratio;

pub use lemma::{
    check_h_convexity, lemma_decomposition, lemma_j, lemma_leading_term, proof_g, proof_h,
    proof_phi, proof_phi_star_shaped, proof_phi_superadditive, Decomposition, InequalityCheck,
    LemmaArgs, Y_FLOOR,
};
pub use ratio::{
    check_lcm, check_lcm_with_slack, check_thm2, log_grid, neg_lnq_prime_limit, thm2_margins,
    QInstance, Thm2Margins, EQUALITY_TOL, MAX_DERIVATIVE_ORDER,
};

/// Slack for analytic inequalities compared in the log domain.
pub const LOG_SLACK: f64 = 1e-10;
/// Slack for analytic inequalities compared directly.
pub const DIRECT_SLACK: f64 = 1e-12;
/// Slack for derivative sign checks.
pub const SIGN_SLACK: f64 = 1e-9;
