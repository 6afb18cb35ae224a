//! Classical gamma-family functions on the positive real axis.
//!
//! Every function shifts its argument upward with the unit recurrence until it
//! clears a threshold, then sums the Stirling-type asymptotic series with
//! Bernoulli-number coefficients. Orders are capped at [`PolyOrder::MAX`].

use crate::error::{domain, Result};

/// Bernoulli numbers B_2, B_4, ..., B_20.
pub(crate) const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// ln(2π) / 2
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Arguments at or above this are handed straight to the asymptotic series.
const SHIFT_THRESHOLD: f64 = 10.0;

/// Derivative order of the digamma function: `0` is ψ itself, `k` is ψ^(k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolyOrder(u32);

impl PolyOrder {
    pub const MAX: u32 = 12;

    pub fn new(k: u32) -> Result<Self> {
        if k > Self::MAX {
            return Err(domain(format!(
                "polygamma order {k} exceeds the supported maximum {}",
                Self::MAX
            )));
        }
        Ok(Self(k))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for PolyOrder {
    type Error = crate::Error;

    fn try_from(k: u32) -> Result<Self> {
        Self::new(k)
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain(format!("{name} requires a finite x > 0, got {x}")));
    }
    Ok(())
}

/// k! as a float, exact for k ≤ 22.
pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// Natural logarithm of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    // (x-1)! is exact in f64 up to 22!
    if x.fract() == 0.0 && x <= 23.0 {
        return Ok(factorial(x as u32 - 1).ln());
    }
    // ln Γ(x) = ln Γ(x + s) - ln(x (x+1) ... (x+s-1))
    let mut z = x;
    let mut prod = 1.0;
    while z < SHIFT_THRESHOLD {
        prod *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = (i + 1) as f64;
        series += b / (2.0 * k * (2.0 * k - 1.0)) * pow;
        pow *= inv2;
    }
    let stirling = (z - 0.5) * z.ln() - z + HALF_LN_2PI + series;
    Ok(stirling - prod.ln())
}

/// Digamma ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    let mut z = x;
    let mut shift = 0.0;
    while z < SHIFT_THRESHOLD {
        shift += 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut pow = inv2;
    for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
        series += b / (2.0 * (i + 1) as f64) * pow;
        pow *= inv2;
    }
    Ok(z.ln() - 0.5 / z - series - shift)
}

/// Polygamma ψ^(k)(x) for x > 0; order 0 is [`digamma`].
pub fn polygamma(order: PolyOrder, x: f64) -> Result<f64> {
    let k = order.get();
    if k == 0 {
        return digamma(x);
    }
    check_positive("polygamma", x)?;

    // Both the shifted tail and the recurrence terms carry the sign (-1)^(k+1),
    // so the magnitudes are accumulated and the sign applied once.
    let kf = k as f64;
    let k_fact = factorial(k);
    let threshold = SHIFT_THRESHOLD + kf;
    let mut z = x;
    let mut shift = 0.0;
    while z < threshold {
        shift += z.powi(-(k as i32 + 1));
        z += 1.0;
    }
    shift *= k_fact;

    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let lead = factorial(k - 1) * inv.powi(k as i32);
    let mut tail = lead + 0.5 * k_fact * inv.powi(k as i32 + 1);
    // coeff_j = (2j + k - 1)! / (2j)!, updated incrementally
    let mut coeff = factorial(k - 1);
    let mut pow = inv.powi(k as i32);
    for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
        let j = (i + 1) as f64;
        coeff *= (2.0 * j + kf - 2.0) * (2.0 * j + kf - 1.0) / ((2.0 * j - 1.0) * (2.0 * j));
        pow *= inv2;
        tail += b * coeff * pow;
    }

    let magnitude = tail + shift;
    Ok(if k % 2 == 1 { magnitude } else { -magnitude })
}
