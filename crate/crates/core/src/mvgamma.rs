//! Multivariate gamma function Γ_m and the derivatives of its logarithm.
//!
//! ln Γ_m(z) = m(m-1)/4 · ln π + Σ_{j=1}^{m} ln Γ(z - (j-1)/2), defined for z > (m-1)/2.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::special::{ln_gamma, polygamma, PolyOrder};

/// A validated argument pair `(m, z)` with `z > (m-1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvGammaArg {
    m: usize,
    z: f64,
}

impl MvGammaArg {
    pub fn new(m: usize, z: f64) -> Result<Self> {
        if m == 0 {
            return Err(domain("multivariate gamma needs dimension m >= 1"));
        }
        let bound = (m as f64 - 1.0) / 2.0;
        if !z.is_finite() || z <= bound {
            return Err(domain(format!(
                "multivariate gamma of dimension {m} requires z > (m-1)/2 = {bound}, got {z}"
            )));
        }
        Ok(MvGammaArg { m, z })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Shifted scalar arguments z - (j-1)/2 for j = 1..m.
    fn shifted(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| self.z - j as f64 / 2.0)
    }
}

pub fn ln_gamma_m(m: usize, z: f64) -> Result<f64> {
    let arg = MvGammaArg::new(m, z)?;
    let mf = m as f64;
    let mut total = mf * (mf - 1.0) / 4.0 * PI.ln();
    for s in arg.shifted() {
        total += ln_gamma(s)?;
    }
    Ok(total)
}

/// `k`-th derivative of ψ_m = (ln Γ_m)': Σ_j ψ^(k)(z - (j-1)/2).
pub fn psi_m(order: PolyOrder, m: usize, z: f64) -> Result<f64> {
    let arg = MvGammaArg::new(m, z)?;
    arg.shifted().map(|s| polygamma(order, s)).sum()
}
