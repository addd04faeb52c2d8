//! Closed-form value components for threshold strategies.
//!
//! For a threshold `b` the value splits into a dividend part `V1(x; b)` and a
//! penalty part `V2(x; b) = lambda (w(x, b) - 1)`, where `w` is the Laplace
//! transform of the ruin time. Both parts are sums of two exponentials on each
//! side of `b`. All branches are stored with the dominant exponential already
//! factored out so that evaluation stays finite for arbitrarily large `b`.

use crate::error::{Error, Result};
use crate::model::Model;

/// Which side of the threshold a piecewise quantity is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The `[0, b)` branch (no payout).
    Below,
    /// The `[b, inf)` branch (payout at `lmax`).
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coef: f64,
    rate: f64,
    anchor: f64,
}

impl Term {
    const ZERO: Term = Term {
        coef: 0.0,
        rate: 0.0,
        anchor: 0.0,
    };

    fn new(coef: f64, rate: f64, anchor: f64) -> Self {
        Self { coef, rate, anchor }
    }

    fn eval(&self, x: f64, order: u32) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        self.coef * self.rate.powi(order as i32) * (self.rate * (x - self.anchor)).exp()
    }
}

/// `offset + (t0(x) + t1(x)) / divisor` with `t_i(x) = coef_i exp(rate_i (x - anchor_i))`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch {
    offset: f64,
    terms: [Term; 2],
    divisor: f64,
}

impl Branch {
    fn derivative(&self, x: f64, order: u32) -> f64 {
        let s = (self.terms[0].eval(x, order) + self.terms[1].eval(x, order)) / self.divisor;
        if order == 0 {
            self.offset + s
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Piecewise {
    b: f64,
    below: Branch,
    above: Branch,
}

impl Piecewise {
    fn side_of(&self, x: f64) -> Side {
        if x < self.b {
            Side::Below
        } else {
            Side::Above
        }
    }

    fn branch(&self, side: Side) -> &Branch {
        match side {
            Side::Below => &self.below,
            Side::Above => &self.above,
        }
    }

    fn derivative(&self, x: f64, order: u32) -> f64 {
        self.branch(self.side_of(x)).derivative(x, order)
    }
}

/// Coefficients `A1, B2, C1, D2` of the threshold value components.
///
/// `A2 = -A1`, `C2 = lambda - C1` and `B1 = D1 = 0`. For very large `b` the
/// raw coefficients can overflow or underflow; evaluation never goes through
/// them (see [`ThresholdValue`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdCoefficients {
    pub b: f64,
    pub coef_a1: f64,
    pub coef_b2: f64,
    pub coef_c1: f64,
    pub coef_d2: f64,
}

impl ThresholdCoefficients {
    pub fn coef_a2(&self) -> f64 {
        -self.coef_a1
    }

    pub fn coef_c2(&self, lambda: f64) -> f64 {
        lambda - self.coef_c1
    }
}

/// Evaluator for `V1`, `w`, `V2` and `nu` at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdValue {
    b: f64,
    delta: f64,
    beta: f64,
    lambda: f64,
    alpha: f64,
    dividend: Piecewise,
    /// `None` when ruin is certain (`beta = 0`, `mu <= lmax`): then `w = 1`, `V2 = 0`.
    laplace: Option<Piecewise>,
}

impl ThresholdValue {
    pub fn threshold(&self) -> f64 {
        self.b
    }

    pub fn v1(&self, x: f64) -> f64 {
        self.dividend.derivative(x, 0)
    }

    /// `order`-th derivative of `V1` in `x`.
    pub fn v1_dx(&self, x: f64, order: u32) -> f64 {
        self.dividend.derivative(x, order)
    }

    pub fn v1_side(&self, x: f64, order: u32, side: Side) -> f64 {
        self.dividend.branch(side).derivative(x, order)
    }

    pub fn w(&self, x: f64) -> f64 {
        self.w_dx(x, 0)
    }

    pub fn w_dx(&self, x: f64, order: u32) -> f64 {
        match &self.laplace {
            Some(p) => p.derivative(x, order),
            None if order == 0 => 1.0,
            None => 0.0,
        }
    }

    pub fn w_side(&self, x: f64, order: u32, side: Side) -> f64 {
        match &self.laplace {
            Some(p) => p.branch(side).derivative(x, order),
            None if order == 0 => 1.0,
            None => 0.0,
        }
    }

    pub fn v2(&self, x: f64) -> f64 {
        self.lambda * (self.w(x) - 1.0)
    }

    pub fn v2_dx(&self, x: f64, order: u32) -> f64 {
        if order == 0 {
            self.v2(x)
        } else {
            self.lambda * self.w_dx(x, order)
        }
    }

    pub fn v2_side(&self, x: f64, order: u32, side: Side) -> f64 {
        if order == 0 {
            self.lambda * (self.w_side(x, 0, side) - 1.0)
        } else {
            self.lambda * self.w_side(x, order, side)
        }
    }

    fn discounts(&self, r: f64, t: f64) -> (f64, f64) {
        ((-self.delta * (t - r)).exp(), (-self.beta * (t - r)).exp())
    }

    /// `nu(r, t, x) = e^{-delta(t-r)} V1 + e^{-beta(t-r)} V2 + lambda (1 - alpha)`.
    pub fn nu(&self, r: f64, t: f64, x: f64) -> f64 {
        let (dd, db) = self.discounts(r, t);
        dd * self.v1(x) + db * self.v2(x) + self.lambda * (1.0 - self.alpha)
    }

    /// `order`-th spatial derivative of `nu` (order ≥ 1).
    pub fn nu_dx(&self, r: f64, t: f64, x: f64, order: u32) -> f64 {
        if order == 0 {
            return self.nu(r, t, x);
        }
        let (dd, db) = self.discounts(r, t);
        dd * self.v1_dx(x, order) + db * self.v2_dx(x, order)
    }

    pub fn nu_dx_side(&self, r: f64, t: f64, x: f64, order: u32, side: Side) -> f64 {
        let (dd, db) = self.discounts(r, t);
        let base = if order == 0 {
            self.lambda * (1.0 - self.alpha)
        } else {
            0.0
        };
        dd * self.v1_side(x, order, side) + db * self.v2_side(x, order, side) + base
    }

    /// Partial derivative of `nu` in the time argument `t`.
    pub fn nu_dt(&self, r: f64, t: f64, x: f64) -> f64 {
        let (dd, db) = self.discounts(r, t);
        -self.delta * dd * self.v1(x) - self.beta * db * self.v2(x)
    }
}

fn check_level(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be finite and ≥ 0, got {value}"
        )))
    }
}

/// Ruin probability `exp(-2 (mu - l) x / sigma^2)` of the surplus under a
/// constant payout rate `l`.
pub fn ruin_probability(x: f64, l: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_level("x", x)?;
    let drift = mu - l;
    if !(drift > 0.0) {
        return Err(Error::Domain(format!(
            "drift mu - l = {drift} is not positive; ruin is certain"
        )));
    }
    Ok((-2.0 * drift * x / (sigma * sigma)).exp())
}

impl Model {
    fn dividend_piecewise(&self, b: f64) -> Piecewise {
        let p = self.params();
        let r = self.roots();
        let cap = p.lmax / p.delta;
        let spread = ((r.a2 - r.a1) * b).exp();
        let den = (r.a1 - r.b2) + (r.b2 - r.a2) * spread;
        let k = -cap * r.b2;
        // V1(0) is exactly zero: both lower terms evaluate exp(a1 * (0 - b)).
        let lower_second = -k * (r.a1 * (0.0 - b)).exp();
        Piecewise {
            b,
            below: Branch {
                offset: 0.0,
                terms: [Term::new(k, r.a1, b), Term::new(lower_second, r.a2, 0.0)],
                divisor: den,
            },
            above: Branch {
                offset: cap,
                terms: [
                    Term::new(-cap * (r.a1 - r.a2 * spread), r.b2, b),
                    Term::ZERO,
                ],
                divisor: den,
            },
        }
    }

    fn laplace_piecewise(&self, b: f64) -> Option<Piecewise> {
        if self.penalty_degenerate() {
            return None;
        }
        let r = self.roots();
        let tail = (r.c2 * b).exp();
        let lead = (r.d2 - r.c2) * tail;
        // Same arithmetic as the lower numerator at x = 0, so w(0, b) == 1 exactly.
        let den = lead * (r.c1 * (0.0 - b)).exp() + (r.c1 - r.d2);
        Some(Piecewise {
            b,
            below: Branch {
                offset: 0.0,
                terms: [Term::new(lead, r.c1, b), Term::new(r.c1 - r.d2, r.c2, 0.0)],
                divisor: den,
            },
            above: Branch {
                offset: 0.0,
                terms: [Term::new((r.c1 - r.c2) * tail, r.d2, b), Term::ZERO],
                divisor: den,
            },
        })
    }

    fn build_value(&self, b: f64, laplace: Option<Piecewise>) -> ThresholdValue {
        let p = self.params();
        ThresholdValue {
            b,
            delta: p.delta,
            beta: p.beta,
            lambda: p.lambda,
            alpha: p.alpha,
            dividend: self.dividend_piecewise(b),
            laplace,
        }
    }

    /// Value evaluator for threshold `b`.
    ///
    /// Fails for `beta = 0` with `mu <= lmax`, where `V2` has no bounded form
    /// with limit `-lambda`.
    pub fn threshold_value(&self, b: f64) -> Result<ThresholdValue> {
        check_level("b", b)?;
        if self.penalty_degenerate() {
            return Err(Error::DegeneratePenalty);
        }
        Ok(self.build_value(b, self.laplace_piecewise(b)))
    }

    /// Evaluator with the penalty component fixed at `V2 = 0` (`w = 1`).
    ///
    /// This is the value under certain ruin, where the penalty contributes
    /// only the constant `lambda (1 - alpha)`.
    pub(crate) fn threshold_value_certain_ruin(&self, b: f64) -> ThresholdValue {
        self.build_value(b, None)
    }

    pub fn coefficients(&self, b: f64) -> Result<ThresholdCoefficients> {
        let value = self.threshold_value(b)?;
        let r = self.roots();
        let lambda = self.params().lambda;
        let div = &value.dividend;
        let coef_a1 = div.below.terms[0].coef * (-r.a1 * b).exp() / div.below.divisor;
        let coef_b2 = div.above.terms[0].coef * (-r.b2 * b).exp() / div.above.divisor;
        let lap = value.laplace.expect("non-degenerate penalty");
        let coef_c1 = lambda * lap.below.terms[0].coef * (-r.c1 * b).exp() / lap.below.divisor;
        let coef_d2 = lambda * lap.above.terms[0].coef * (-r.d2 * b).exp() / lap.above.divisor;
        Ok(ThresholdCoefficients {
            b,
            coef_a1,
            coef_b2,
            coef_c1,
            coef_d2,
        })
    }

    /// Expected discounted dividends `V1(x; b)` of the threshold-`b` strategy.
    pub fn v1(&self, x: f64, b: f64) -> f64 {
        debug_assert!(x >= 0.0 && b >= 0.0);
        self.dividend_piecewise(b).derivative(x, 0)
    }

    pub fn v2(&self, x: f64, b: f64) -> Result<f64> {
        check_level("x", x)?;
        Ok(self.threshold_value(b)?.v2(x))
    }

    pub fn nu(&self, r: f64, t: f64, x: f64, b: f64) -> Result<f64> {
        check_level("r", r)?;
        check_level("t", t)?;
        check_level("x", x)?;
        Ok(self.threshold_value(b)?.nu(r, t, x))
    }

    /// Laplace transform `E[exp(-beta tau)]` of the ruin time under threshold `b`.
    ///
    /// With `beta = 0` this is the ruin probability; it equals one when
    /// `mu <= lmax`.
    pub fn laplace_w(&self, x: f64, b: f64) -> f64 {
        debug_assert!(x >= 0.0 && b >= 0.0);
        match self.laplace_piecewise(b) {
            Some(p) => p.derivative(x, 0),
            None => 1.0,
        }
    }

    /// Dividend part of the threshold equation: slope of `V1` at `b-`.
    pub(crate) fn dividend_slope_at_threshold(&self, b: f64) -> f64 {
        let p = self.params();
        let r = self.roots();
        let spread = ((r.a2 - r.a1) * b).exp();
        let den = (r.a1 - r.b2) + (r.b2 - r.a2) * spread;
        p.lmax / p.delta * (-r.b2) * (r.a1 - r.a2 * spread) / den
    }

    /// Penalty part of the threshold equation per unit `lambda`: slope of `w` at `b-`.
    pub(crate) fn laplace_slope_at_threshold(&self, b: f64) -> f64 {
        let r = self.roots();
        if r.d2 == 0.0 {
            return 0.0;
        }
        let num = (r.c2 - r.c1) * r.d2 * (r.c2 * b).exp();
        let den = (r.d2 - r.c1) + (r.c2 - r.d2) * ((r.c2 - r.c1) * b).exp();
        num / den
    }

    /// Threshold equation `G(b)`; its root is the equilibrium threshold.
    ///
    /// `G(b) = nu_x(t, t, b-; b) - 1`. With `beta = 0` the limiting roots make
    /// this coincide with [`Model::g0_of_b`].
    pub fn g_of_b(&self, b: f64) -> f64 {
        self.dividend_slope_at_threshold(b)
            + self.params().lambda * self.laplace_slope_at_threshold(b)
            - 1.0
    }

    /// Threshold equation in the `beta -> 0` limit, written out explicitly.
    /// The `beta` field is ignored.
    pub fn g0_of_b(&self, b: f64) -> f64 {
        let p = self.params();
        let classical = self.dividend_slope_at_threshold(b) - 1.0;
        let paying = p.paying_drift();
        if paying <= 0.0 {
            return classical;
        }
        let var = p.sigma * p.sigma;
        // 2mu/sigma^2 (mu - L) / (-(mu - L) e^{2 mu b / sigma^2} - L), scaled by e^{-2 mu b / sigma^2}
        let decay = (-2.0 * p.mu * b / var).exp();
        let penalty = 2.0 * p.mu / var * paying * decay / (-paying - p.lmax * decay);
        classical + p.lambda * penalty
    }

    /// Left-hand side of the positivity condition for the equilibrium
    /// threshold, `(-b2) lmax/delta + lambda d2 - 1` (equal to `G(0)`).
    pub fn threshold_condition(&self) -> f64 {
        let p = self.params();
        let r = self.roots();
        -r.b2 * p.lmax / p.delta + p.lambda * r.d2 - 1.0
    }

    /// Optimal barrier of the unpenalized problem (zero if paying everywhere is optimal).
    pub fn classical_threshold(&self) -> f64 {
        let p = self.params();
        let r = self.roots();
        if -r.b2 * p.lmax / p.delta - 1.0 > 0.0 {
            let ratio = (r.a2 * (r.b2 - r.a2)) / (r.a1 * (r.b2 - r.a1));
            (ratio.ln() / (r.a1 - r.a2)).max(0.0)
        } else {
            0.0
        }
    }

    /// Critical penalty weight: thresholds are positive exactly for `lambda < Lambda`.
    pub fn capital_lambda(&self) -> Result<f64> {
        if self.penalty_degenerate() {
            return Err(Error::DegeneratePenalty);
        }
        let p = self.params();
        let r = self.roots();
        Ok((1.0 + r.b2 * p.lmax / p.delta) / r.d2)
    }

    /// Penalty weight for which `b` is the equilibrium threshold.
    ///
    /// Defined for all `b ≥ 0` when `Lambda ≤ 0`, and for `b ≥ b_bar` otherwise.
    pub fn lambda_of_b(&self, b: f64) -> Result<f64> {
        check_level("b", b)?;
        let capital = self.capital_lambda()?;
        let mut floor = 0.0;
        if capital > 0.0 {
            floor = self.classical_threshold();
            if b < floor {
                return Err(Error::Domain(format!(
                    "b = {b} lies below the classical threshold {floor}; no lambda ≤ 0 matches"
                )));
            }
            if b == floor {
                return Ok(0.0);
            }
        }
        let lambda =
            (1.0 - self.dividend_slope_at_threshold(b)) / self.laplace_slope_at_threshold(b);
        if b == 0.0 {
            return Ok(capital);
        }
        // 1 - N1(b) ≥ 0 on the domain; rounding just above b_bar must not leak a positive sign.
        Ok(if capital > 0.0 && b > floor {
            lambda.min(0.0)
        } else {
            lambda
        })
    }

    /// Smallest initial surplus from which `w(x, b) ≤ alpha` is reachable:
    /// `ln(alpha) / c2`. Zero for `alpha = 1`.
    pub fn x_bar(&self) -> f64 {
        let alpha = self.params().alpha;
        if alpha == 1.0 {
            0.0
        } else {
            alpha.ln() / self.roots().c2
        }
    }

    /// Smallest surplus meeting a ruin-probability constraint without dividends:
    /// `-(sigma^2/2) ln(alpha) / mu`.
    pub fn min_unconstrained_x(&self) -> f64 {
        let p = self.params();
        if p.alpha == 1.0 {
            0.0
        } else {
            -0.5 * p.sigma * p.sigma * p.alpha.ln() / p.mu
        }
    }
}
