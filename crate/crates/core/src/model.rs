//! Problem parameters and the characteristic exponents of the value ODEs.
//!
//! The surplus follows `dX = (mu - l) dt + sigma dW` with a payout rate
//! `l in [0, lmax]`. Dividends are discounted at `delta`, the ruin penalty at
//! `beta`. Every closed form in this crate is a sum of exponentials whose
//! exponents solve `sigma^2/2 y^2 + drift y - rate = 0` for one of four
//! (drift, rate) pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Drift of the uncontrolled surplus.
    pub mu: f64,
    /// Volatility.
    pub sigma: f64,
    /// Dividend discount rate.
    pub delta: f64,
    /// Penalty discount rate; `0` selects the ruin-probability limit.
    pub beta: f64,
    /// Maximal payout rate.
    pub lmax: f64,
    /// Penalty weight (Lagrange multiplier), non-positive.
    pub lambda: f64,
    /// Constraint level.
    pub alpha: f64,
}

impl ModelParams {
    /// Checks every bound and reports all violations at once.
    pub fn validate(self) -> Result<Self> {
        let mut problems = Vec::new();
        let fields = [
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("delta", self.delta),
            ("beta", self.beta),
            ("lmax", self.lmax),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                problems.push(format!("{name} must be finite"));
            }
        }
        if self.mu.is_finite() && self.mu <= 0.0 {
            problems.push("mu must be > 0".to_string());
        }
        if self.sigma.is_finite() && self.sigma <= 0.0 {
            problems.push("sigma must be > 0".to_string());
        }
        if self.delta.is_finite() && self.delta <= 0.0 {
            problems.push("delta must be > 0".to_string());
        }
        if self.beta.is_finite() && self.beta < 0.0 {
            problems.push("beta must be ≥ 0".to_string());
        }
        if self.lmax.is_finite() && self.lmax <= 0.0 {
            problems.push("lmax must be > 0".to_string());
        }
        if self.lambda.is_finite() && self.lambda > 0.0 {
            problems.push("lambda must be ≤ 0".to_string());
        }
        if self.alpha.is_finite() && !(self.alpha > 0.0 && self.alpha <= 1.0) {
            problems.push("alpha must lie in (0,1]".to_string());
        }
        if problems.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(problems))
        }
    }

    /// Drift of the surplus while paying at the maximal rate.
    pub fn paying_drift(&self) -> f64 {
        self.mu - self.lmax
    }
}

/// Characteristic exponents. Index 1 is the `+` branch, index 2 the `-` branch.
///
/// `a`: drift `mu`, rate `delta`; `b`: drift `mu - lmax`, rate `delta`;
/// `c`: drift `mu`, rate `beta`; `d`: drift `mu - lmax`, rate `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharRoots {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Roots `(plus, minus)` of `sigma^2/2 y^2 + drift y - rate = 0` for `rate > 0`.
///
/// The larger-magnitude root comes from the quadratic formula with the sign
/// that avoids cancellation; the other follows from the product of roots.
pub fn quadratic_roots(sigma: f64, drift: f64, rate: f64) -> (f64, f64) {
    let half_var = 0.5 * sigma * sigma;
    let disc = drift * drift + 4.0 * half_var * rate;
    let sign = if drift >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (drift + sign * disc.sqrt());
    let big = q / half_var;
    let small = -rate / q;
    if big > small {
        (big, small)
    } else {
        (small, big)
    }
}

/// Characteristic roots, with `beta = 0` handled as the exact analytic limit.
pub fn characteristic_roots(params: &ModelParams) -> CharRoots {
    let var = params.sigma * params.sigma;
    let paying = params.paying_drift();
    let (a1, a2) = quadratic_roots(params.sigma, params.mu, params.delta);
    let (b1, b2) = quadratic_roots(params.sigma, paying, params.delta);
    let (c1, c2, d1, d2) = if params.beta == 0.0 {
        let c2 = -2.0 * params.mu / var;
        let (d1, d2) = if paying > 0.0 {
            (0.0, -2.0 * paying / var)
        } else {
            (-2.0 * paying / var, 0.0)
        };
        (0.0, c2, d1, d2)
    } else {
        let (c1, c2) = quadratic_roots(params.sigma, params.mu, params.beta);
        let (d1, d2) = quadratic_roots(params.sigma, paying, params.beta);
        (c1, c2, d1, d2)
    };
    CharRoots {
        a1,
        a2,
        b1,
        b2,
        c1,
        c2,
        d1,
        d2,
    }
}

/// Validated parameters bundled with their characteristic roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    params: ModelParams,
    roots: CharRoots,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        let params = params.validate()?;
        Ok(Self {
            params,
            roots: characteristic_roots(&params),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn roots(&self) -> &CharRoots {
        &self.roots
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(ModelParams {
            lambda,
            ..self.params
        })
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(ModelParams {
            beta,
            ..self.params
        })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(ModelParams {
            alpha,
            ..self.params
        })
    }

    /// True for `beta = 0` with `mu <= lmax`, where ruin is certain under
    /// every finite threshold and the penalty component has no bounded form.
    pub fn penalty_degenerate(&self) -> bool {
        self.params.beta == 0.0 && self.params.paying_drift() <= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn figure1() -> ModelParams {
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

    fn residual(sigma: f64, drift: f64, rate: f64, y: f64) -> f64 {
        0.5 * sigma * sigma * y * y + drift * y - rate
    }

    #[test]
    fn accepts_figure_one_parameters() {
        assert_eq!(figure1().validate().unwrap(), figure1());
    }

    #[test]
    fn rejects_positive_lambda() {
        let err = ModelParams {
            lambda: 1.0,
            ..figure1()
        }
        .validate()
        .unwrap_err();
        assert!(err.to_string().contains("lambda must be ≤ 0"), "{err}");
    }

    #[test]
    fn rejects_zero_alpha() {
        let err = ModelParams {
            alpha: 0.0,
            ..figure1()
        }
        .validate()
        .unwrap_err();
        assert!(err.to_string().contains("alpha must lie in (0,1]"), "{err}");
    }

    #[test]
    fn reports_every_violation() {
        let err = ModelParams {
            sigma: 0.0,
            lambda: 2.0,
            alpha: 1.5,
            delta: f64::NAN,
            ..figure1()
        }
        .validate()
        .unwrap_err();
        match err {
            Error::InvalidParams(v) => assert_eq!(v.len(), 4, "{v:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn a_roots_match_naive_formula() {
        // sigma^2/2 y^2 + 2y - 0.1 = 0  =>  y = -2 ± sqrt(4 + 0.2)
        let r = characteristic_roots(&figure1());
        let naive_plus = -2.0 + 4.2f64.sqrt();
        let naive_minus = -2.0 - 4.2f64.sqrt();
        assert!((r.a1 - naive_plus).abs() < 1e-14);
        assert!((r.a2 - naive_minus).abs() < 1e-14);
        assert!((r.a1 - 0.049390).abs() < 1e-6);
        assert!((r.a2 + 4.049390).abs() < 1e-6);
    }

    #[test]
    fn zero_paying_drift_gives_symmetric_b_roots() {
        let p = ModelParams {
            lmax: 2.0,
            ..figure1()
        };
        let r = characteristic_roots(&p);
        let s = (2.0 * p.delta / (p.sigma * p.sigma)).sqrt();
        assert!((r.b1 - s).abs() < 1e-15);
        assert!((r.b2 + s).abs() < 1e-15);
    }

    #[test]
    fn beta_zero_limits() {
        let p = ModelParams {
            beta: 0.0,
            ..figure1()
        };
        let r = characteristic_roots(&p);
        assert_eq!(r.c1, 0.0);
        assert_eq!(r.c2, -4.0);
        // mu < lmax: d1 = -2(mu - lmax)/sigma^2 = 4, d2 = 0
        assert_eq!(r.d1, 4.0);
        assert_eq!(r.d2, 0.0);

        let p = ModelParams {
            beta: 0.0,
            lmax: 1.5,
            ..figure1()
        };
        let r = characteristic_roots(&p);
        assert_eq!(r.d1, 0.0);
        assert_eq!(r.d2, -1.0);
    }

    fn arb_params() -> impl Strategy<Value = ModelParams> {
        (
            0.05f64..5.0,
            0.1f64..3.0,
            1e-4f64..2.0,
            1e-4f64..2.0,
            0.05f64..8.0,
            -200.0f64..0.0,
            0.001f64..1.0,
        )
            .prop_map(
                |(mu, sigma, delta, beta, lmax, lambda, alpha)| ModelParams {
                    mu,
                    sigma,
                    delta,
                    beta,
                    lmax,
                    lambda,
                    alpha,
                },
            )
    }

    proptest! {
        #[test]
        fn roots_solve_their_quadratics(p in arb_params()) {
            let r = characteristic_roots(&p);
            let paying = p.paying_drift();
            let cases = [
                (p.mu, p.delta, r.a1, r.a2),
                (paying, p.delta, r.b1, r.b2),
                (p.mu, p.beta, r.c1, r.c2),
                (paying, p.beta, r.d1, r.d2),
            ];
            let var = p.sigma * p.sigma;
            for (drift, rate, plus, minus) in cases {
                prop_assert!(plus > 0.0 && minus < 0.0);
                for y in [plus, minus] {
                    let scale = (0.5 * var * y * y).abs().max(drift.abs() * y.abs()).max(rate).max(1.0);
                    prop_assert!(residual(p.sigma, drift, rate, y).abs() / scale < 1e-12);
                }
                // Vieta
                let sum_scale = (2.0 * drift / var).abs().max(1.0);
                prop_assert!(((plus + minus) + 2.0 * drift / var).abs() / sum_scale < 1e-12);
                let prod_scale = (2.0 * rate / var).max(1e-300);
                prop_assert!(((plus * minus) + 2.0 * rate / var).abs() / prod_scale < 1e-12);
            }
        }

        #[test]
        fn small_beta_approaches_limit(p in arb_params()) {
            // near mu = lmax the d roots scale like sqrt(beta), not beta
            prop_assume!((p.mu - p.lmax).abs() > 0.01);
            let zero = characteristic_roots(&ModelParams { beta: 0.0, ..p });
            let tiny = characteristic_roots(&ModelParams { beta: 1e-10, ..p });
            for (a, b) in [(zero.c1, tiny.c1), (zero.c2, tiny.c2), (zero.d1, tiny.d1), (zero.d2, tiny.d2)] {
                prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            }
        }
    }
}
