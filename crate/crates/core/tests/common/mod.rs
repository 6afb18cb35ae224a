//! Reference computations for the integration tests. None of these share code
//! paths with the library: series are summed term by term and their tails are
//! closed with Euler–Maclaurin corrections, derivatives come from extrapolated
//! finite differences, and integrals from tanh-sinh quadrature.

#![allow(dead_code)]

/// Neumaier-compensated sum.
pub struct Sum {
    total: f64,
    comp: f64,
}

impl Sum {
    pub fn new() -> Self {
        Sum {
            total: 0.0,
            comp: 0.0,
        }
    }

    pub fn add(&mut self, v: f64) {
        let t = self.total + v;
        if self.total.abs() >= v.abs() {
            self.comp += (self.total - t) + v;
        } else {
            self.comp += (v - t) + self.total;
        }
        self.total = t;
    }

    pub fn value(&self) -> f64 {
        self.total + self.comp
    }
}

/// Euler–Mascheroni constant: H_N − ln N with the Euler–Maclaurin correction
/// −1/(2N) + 1/(12N²) − 1/(120N⁴) + 1/(252N⁶), N = 10⁴.
pub fn euler_gamma() -> f64 {
    let n = 10_000u32;
    let mut h = Sum::new();
    for j in (1..=n).rev() {
        h.add(1.0 / j as f64);
    }
    let nf = n as f64;
    h.add(-nf.ln());
    h.add(-1.0 / (2.0 * nf));
    h.add(1.0 / (12.0 * nf * nf));
    h.add(-1.0 / (120.0 * nf.powi(4)));
    h.add(1.0 / (252.0 * nf.powi(6)));
    h.value()
}

/// Hurwitz zeta ζ(s, a) = Σ_{j≥0} (a+j)^{-s}, s > 1: N terms summed directly,
/// the tail closed by Euler–Maclaurin through the third derivative term.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    let n = 2_000u32;
    let mut sum = Sum::new();
    for j in (0..n).rev() {
        sum.add((a + j as f64).powf(-s));
    }
    let x = a + n as f64;
    // ∫_x^∞ t^{-s} dt + f(x)/2 - f'(x)/12 + f'''(x)/720 - f^(5)(x)/30240
    sum.add(x.powf(1.0 - s) / (s - 1.0));
    sum.add(0.5 * x.powf(-s));
    sum.add(s * x.powf(-s - 1.0) / 12.0);
    sum.add(-s * (s + 1.0) * (s + 2.0) * x.powf(-s - 3.0) / 720.0);
    sum.add(s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * x.powf(-s - 5.0) / 30240.0);
    sum.value()
}

/// ζ(s) for s > 1.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// ψ^(k)(x) = (−1)^{k+1} k! ζ(k+1, x), k ≥ 1.
pub fn polygamma(k: u32, x: f64) -> f64 {
    let fact: f64 = (1..=k).map(f64::from).product();
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * fact * hurwitz_zeta(k as f64 + 1.0, x)
}

/// ψ(x) = −γ + Σ_{j≥0} (1/(j+1) − 1/(j+x)); the tail from N is
/// ln((N+x)/(N+1)) + f(N)/2 − f'(N)/12.
pub fn digamma(x: f64) -> f64 {
    let n = 100_000u32;
    let f = |t: f64| 1.0 / (t + 1.0) - 1.0 / (t + x);
    let df = |t: f64| -1.0 / ((t + 1.0) * (t + 1.0)) + 1.0 / ((t + x) * (t + x));
    let mut sum = Sum::new();
    for j in (0..n).rev() {
        sum.add(f(j as f64));
    }
    let nf = n as f64;
    sum.add(((nf + x) / (nf + 1.0)).ln());
    sum.add(0.5 * f(nf));
    sum.add(-df(nf) / 12.0);
    sum.add(-euler_gamma());
    sum.value()
}

/// ln Γ at a positive integer or half-integer `x`, from exact products.
pub fn ln_gamma_lattice(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!((2.0 * x - twice).abs() < 1e-12 && twice >= 1.0);
    let mut sum = Sum::new();
    if (twice as u64).is_multiple_of(2) {
        // Γ(n) = (n-1)!
        for j in 1..(x as u64) {
            sum.add((j as f64).ln());
        }
    } else {
        // Γ(k + 1/2) = √π Π_{j=0}^{k-1} (j + 1/2)
        sum.add(0.5 * std::f64::consts::PI.ln());
        let k = (x - 0.5).round() as u64;
        for j in 0..k {
            sum.add((j as f64 + 0.5).ln());
        }
    }
    sum.value()
}

/// Central difference of order `k` (1..=4) with step `h`.
fn central(f: &dyn Fn(f64) -> f64, x: f64, k: u32, h: f64) -> f64 {
    match k {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => {
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h.powi(3))
        }
        4 => {
            (f(x + 2.0 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h))
                / h.powi(4)
        }
        _ => panic!("unsupported order {k}"),
    }
}

/// Ridders' extrapolation of central differences: returns the estimate of the
/// `k`-th derivative and its error estimate. Evaluation stays within
/// `[x - 2h0, x + 2h0]`.
pub fn richardson_derivative(f: &dyn Fn(f64) -> f64, x: f64, k: u32, h0: f64) -> (f64, f64) {
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 12;
    const SAFE: f64 = 2.0;
    let mut a = vec![vec![0.0; NTAB]; NTAB];
    let mut h = h0;
    a[0][0] = central(f, x, k, h);
    let mut best = a[0][0];
    let mut err = f64::MAX;
    for i in 1..NTAB {
        h /= CON;
        a[0][i] = central(f, x, k, h);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let errt = (a[j][i] - a[j - 1][i])
                .abs()
                .max((a[j][i] - a[j - 1][i - 1]).abs());
            if errt <= err {
                err = errt;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= SAFE * err {
            break;
        }
    }
    (best, err)
}

/// Tanh-sinh quadrature of `f` over (0, 1). `f` receives the node `x` and
/// `1 - x`, the latter computed without cancellation.
pub fn tanh_sinh_unit(f: &dyn Fn(f64, f64) -> f64) -> f64 {
    let h = 1.0 / 64.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut sum = Sum::new();
    let kmax = (6.0 / h) as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = half_pi * t.sinh();
        // x = (1 + tanh u)/2, weight = (π/4) cosh t / cosh² u
        let x = 1.0 / (1.0 + (-2.0 * u).exp());
        let xc = 1.0 / (1.0 + (2.0 * u).exp());
        let w = 0.5 * half_pi * t.cosh() / (u.cosh() * u.cosh());
        if !(x > 0.0 && xc > 0.0) || w == 0.0 {
            continue;
        }
        sum.add(h * w * f(x, xc));
    }
    sum.value()
}

/// Relative error with an absolute floor of 1.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}
