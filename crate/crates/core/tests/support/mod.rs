//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use optwave::{sample_terminal_prices, OptionKind, OptionParams};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, z);
                for j in 2..=n {
                    let q2 = ((2 * j - 1) as f64 * z * q1 - (j - 1) as f64 * q0) / j as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

/// Composite Gauss-Legendre quadrature with panels no wider than `panel`.
pub struct Quadrature {
    x: Vec<f64>,
    w: Vec<f64>,
    panel: f64,
}

impl Quadrature {
    pub fn new(order: usize, panel: f64) -> Self {
        let (x, w) = gauss_legendre(order);
        Self { x, w, panel }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let m = ((b - a).abs() / self.panel).ceil().max(1.0) as usize;
        let h = (b - a) / m as f64;
        let mut total = 0.0;
        for p in 0..m {
            let mid = a + (p as f64 + 0.5) * h;
            let mut acc = 0.0;
            for (xi, wi) in self.x.iter().zip(&self.w) {
                acc += wi * f(mid + 0.5 * h * xi);
            }
            total += 0.5 * h * acc;
        }
        total
    }
}

/// `2/sqrt(pi) int_0^x e^{-t^2} dt`.
pub fn erf_by_quadrature(q: &Quadrature, x: f64) -> f64 {
    std::f64::consts::FRAC_2_SQRT_PI * q.integrate(|t| (-t * t).exp(), 0.0, x)
}

/// Incomplete elliptic integral of the first kind `F(phi | m)` by quadrature.
pub fn elliptic_f(q: &Quadrature, phi: f64, m: f64) -> f64 {
    q.integrate(|th| 1.0 / (1.0 - m * th.sin().powi(2)).sqrt(), 0.0, phi)
}

/// Amplitude `phi` with `F(phi | m) = u`, so that `sn = sin phi` and
/// `cn = cos phi`.
pub fn jacobi_amplitude(q: &Quadrature, u: f64, m: f64) -> f64 {
    // 1 <= dF/dphi <= 1/sqrt(1-m) brackets the root between u sqrt(1-m) and u.
    let (mut lo, mut hi) = if u >= 0.0 {
        (u * (1.0 - m).sqrt(), u)
    } else {
        (u, u * (1.0 - m).sqrt())
    };
    let mut phi = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = elliptic_f(q, phi, m) - u;
        if g > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let mut next = phi - g * (1.0 - m * phi.sin().powi(2)).sqrt();
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - phi).abs() < 1e-15 * phi.abs().max(1.0) {
            return next;
        }
        phi = next;
    }
    phi
}

/// Discounted Monte Carlo price with its standard error.
pub fn monte_carlo_price(
    s0: f64,
    p: &OptionParams<f64>,
    kind: OptionKind,
    n_paths: usize,
    seed: u64,
) -> (f64, f64) {
    let terminal = sample_terminal_prices(
        s0,
        p.rate - p.dividend_yield,
        p.volatility,
        p.maturity,
        n_paths,
        seed,
    )
    .unwrap();
    let disc = (-p.rate * p.maturity).exp();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for s in terminal {
        let pay = disc
            * match kind {
                OptionKind::Call => (s - p.strike).max(0.0),
                OptionKind::Put => (p.strike - s).max(0.0),
            };
        sum += pay;
        sum_sq += pay * pay;
    }
    let n = n_paths as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ridders' extrapolation of a difference quotient `q(h)` whose error is a
/// series in `h^2`, starting from step `h0`.
pub fn ridders(q: impl Fn(f64) -> f64, h0: f64) -> f64 {
    const SHRINK: f64 = 1.4;
    const N: usize = 12;
    let mut table = [[0.0f64; N]; N];
    let mut h = h0;
    table[0][0] = q(h);
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..N {
        h /= SHRINK;
        table[0][i] = q(h);
        let mut fac = SHRINK * SHRINK;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let e = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
    }
    best
}

pub fn derivative(f: impl Fn(f64) -> f64, x: f64, h0: f64) -> f64 {
    ridders(|h| (f(x + h) - f(x - h)) / (2.0 * h), h0)
}

pub fn second_derivative(f: impl Fn(f64) -> f64, x: f64, h0: f64) -> f64 {
    ridders(|h| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h), h0)
}

/// Observed orders `log2(e_i / e_{i+1})` of a halving sequence.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}
