//! Reference computations shared by the integration tests. Nothing here calls
//! into the library's numerics.

#![allow(dead_code)]

use equidiv::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn base_case() -> ModelParams {
    ModelParams {
        mu: 2.0,
        sigma: 1.0,
        delta: 0.1,
        beta: 0.2,
        lmax: 1.9,
        lambda: -50.0,
        alpha: 0.5,
    }
}

pub fn figure1() -> ModelParams {
    ModelParams {
        mu: 2.0,
        sigma: 1.0,
        delta: 0.1,
        beta: 0.2,
        lmax: 4.0,
        lambda: -10.0,
        alpha: 0.01,
    }
}

/// Parameters for which the unpenalized barrier is zero.
pub fn small_classical() -> ModelParams {
    ModelParams {
        mu: 1.0,
        sigma: 2.0,
        delta: 0.5,
        beta: 0.2,
        lmax: 0.5,
        lambda: -1.0,
        alpha: 0.5,
    }
}

/// Draws from the box used by the randomized checks.
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams {
        mu: rng.random_range(0.5..3.0),
        sigma: rng.random_range(0.5..2.0),
        delta: rng.random_range(0.02..0.5),
        beta: rng.random_range(0.02..1.0),
        lmax: rng.random_range(0.2..5.0),
        lambda: rng.random_range(-100.0..0.0),
        alpha: rng.random_range(0.05..1.0),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Roots of `sigma^2/2 r^2 + drift r - rate = 0` by the textbook formula,
/// returned as `(positive, negative)`.
pub fn naive_roots(sigma: f64, drift: f64, rate: f64) -> (f64, f64) {
    let a = 0.5 * sigma * sigma;
    let disc = (drift * drift + 4.0 * a * rate).sqrt();
    ((-drift + disc) / (2.0 * a), (-drift - disc) / (2.0 * a))
}

/// Plain bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "bisection needs a sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-region linear ODE
/// `sigma^2/2 v'' + drift(x) v' - rate v + source(x) = 0` on `[0, x_max]`,
/// with `drift, source` switching from the `lo` to the `hi` values at `b`,
/// `v(0) = 0`, and far field `v -> far` imposed through the exact Robin
/// condition `v' = decay (v - far)` at `x_max`.
#[derive(Debug, Clone, Copy)]
pub struct TwoRegionBvp {
    pub sigma: f64,
    pub rate: f64,
    pub drift_lo: f64,
    pub drift_hi: f64,
    pub source_lo: f64,
    pub source_hi: f64,
    pub b: f64,
    pub x_max: f64,
    pub far: f64,
    pub decay: f64,
}

impl TwoRegionBvp {
    /// Central differences on `n` equal cells with `b` on a node; the node at
    /// `b` averages the two regional equations.
    pub fn solve(&self, n: usize) -> Vec<f64> {
        let h = self.x_max / n as f64;
        let k = 0.5 * self.sigma * self.sigma / (h * h);
        let node_b = (self.b / h).round() as usize;
        let mut sub = vec![0.0; n + 1];
        let mut diag = vec![0.0; n + 1];
        let mut sup = vec![0.0; n + 1];
        let mut rhs = vec![0.0; n + 1];
        diag[0] = 1.0;
        for i in 1..=n {
            let (drift, source) = if i < node_b {
                (self.drift_lo, self.source_lo)
            } else if i > node_b {
                (self.drift_hi, self.source_hi)
            } else {
                (
                    0.5 * (self.drift_lo + self.drift_hi),
                    0.5 * (self.source_lo + self.source_hi),
                )
            };
            let g = drift / (2.0 * h);
            sub[i] = k - g;
            diag[i] = -2.0 * k - self.rate;
            sup[i] = k + g;
            rhs[i] = -source;
            if i == n {
                // ghost node: v_{n+1} = v_{n-1} + 2h decay (v_n - far)
                sub[i] += sup[i];
                diag[i] += sup[i] * 2.0 * h * self.decay;
                rhs[i] += sup[i] * 2.0 * h * self.decay * self.far;
                sup[i] = 0.0;
            }
        }
        thomas(&sub, &diag, &sup, &rhs)
    }

    /// Solution on the `n`-cell grid after two rounds of Richardson
    /// extrapolation using grids of `2n` and `4n` cells.
    ///
    /// Rounding in the tridiagonal solve grows like `h^-2`, so a coarse base
    /// spacing (around `8e-3`) gives the most accurate extrapolant.
    pub fn solve_extrapolated(&self, n: usize) -> Vec<f64> {
        let v1 = self.solve(n);
        let v2 = self.solve(2 * n);
        let v4 = self.solve(4 * n);
        (0..=n)
            .map(|i| {
                let r1 = (4.0 * v2[2 * i] - v1[i]) / 3.0;
                let r2 = (4.0 * v4[4 * i] - v2[2 * i]) / 3.0;
                // second-level step removes the h^3 term left by the interface node
                (8.0 * r2 - r1) / 7.0
            })
            .collect()
    }
}

/// Tridiagonal solve; `sub[0]` and `sup[n]` are ignored.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Boundary-value problem for the dividend part at threshold `b`.
pub fn dividend_bvp(p: &ModelParams, b: f64, x_max: f64) -> TwoRegionBvp {
    TwoRegionBvp {
        sigma: p.sigma,
        rate: p.delta,
        drift_lo: p.mu,
        drift_hi: p.mu - p.lmax,
        source_lo: 0.0,
        source_hi: p.lmax,
        b,
        x_max,
        far: p.lmax / p.delta,
        decay: naive_roots(p.sigma, p.mu - p.lmax, p.delta).1,
    }
}

/// Boundary-value problem for the penalty part at threshold `b` (`beta > 0`).
pub fn penalty_bvp(p: &ModelParams, b: f64, x_max: f64) -> TwoRegionBvp {
    TwoRegionBvp {
        sigma: p.sigma,
        rate: p.beta,
        drift_lo: p.mu,
        drift_hi: p.mu - p.lmax,
        source_lo: -p.lambda * p.beta,
        source_hi: -p.lambda * p.beta,
        b,
        x_max,
        far: -p.lambda,
        decay: naive_roots(p.sigma, p.mu - p.lmax, p.beta).1,
    }
}

/// Base spacing for the finite-difference oracle: coarse enough to keep
/// rounding small, fine enough that `h |r| <= 0.04` for every root `r`.
pub fn oracle_spacing(p: &ModelParams) -> f64 {
    let roots = [
        naive_roots(p.sigma, p.mu, p.delta),
        naive_roots(p.sigma, p.mu - p.lmax, p.delta),
        naive_roots(p.sigma, p.mu, p.beta),
        naive_roots(p.sigma, p.mu - p.lmax, p.beta),
    ];
    let largest = roots
        .iter()
        .flat_map(|(a, b)| [a.abs(), b.abs()])
        .fold(0.0, f64::max);
    (0.04 / largest).min(8e-3)
}

/// Grid size with spacing near `h` and `b` on a node.
pub fn cells_for(b: f64, x_max: f64, h: f64) -> (usize, f64) {
    if b == 0.0 {
        return ((x_max / h).ceil() as usize, x_max);
    }
    let per_b = (b / h).ceil().max(1.0);
    let h = b / per_b;
    let n = (x_max / h).ceil() as usize;
    (n, n as f64 * h)
}
