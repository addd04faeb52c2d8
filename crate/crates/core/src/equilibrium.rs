//! Equilibrium thresholds, regime classification and constraint matching.

use std::fmt;

use crate::closed_form::ThresholdValue;
use crate::error::{Error, Result};
use crate::model::{Model, ModelParams};
use crate::roots::{find_root, RootOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// The unpenalized threshold is positive, hence so is the equilibrium one.
    PositiveClassical,
    /// The unpenalized threshold is zero, but the penalty pushes it up.
    PenaltyForced,
    /// The penalty is too weak: pay at the maximal rate everywhere.
    Degenerate,
    /// `beta = 0` with `mu <= lmax`: ruin is certain and the classical threshold is used.
    Beta0Classical,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PositiveClassical => "POSITIVE_CLASSICAL",
            Regime::PenaltyForced => "PENALTY_FORCED",
            Regime::Degenerate => "DEGENERATE",
            Regime::Beta0Classical => "BETA0_CLASSICAL",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Equilibrium threshold together with an evaluator of the value function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSolution {
    pub b_star: f64,
    pub regime: Regime,
    pub params: ModelParams,
    /// `|G(b_star)|` when a root was searched, zero otherwise.
    pub residual: f64,
    value: ThresholdValue,
}

impl EquilibriumSolution {
    /// Evaluator of `V1`, `V2` and `nu` at `b_star`.
    pub fn value(&self) -> &ThresholdValue {
        &self.value
    }

    pub fn nu(&self, r: f64, t: f64, x: f64) -> f64 {
        self.value.nu(r, t, x)
    }
}

/// Outcome of the regime table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub b_bar: f64,
    /// `None` when `beta = 0` and `mu <= lmax`.
    pub capital_lambda: Option<f64>,
    /// `G(0)`; a positive threshold exists iff this is positive.
    pub condition: f64,
    pub classical_positive: bool,
}

pub fn classify_regime(model: &Model) -> RegimeReport {
    let b_bar = model.classical_threshold();
    let classical_positive = b_bar > 0.0;
    if model.penalty_degenerate() {
        return RegimeReport {
            regime: Regime::Beta0Classical,
            b_bar,
            capital_lambda: None,
            condition: model.g0_of_b(0.0),
            classical_positive,
        };
    }
    let condition = model.threshold_condition();
    let regime = if classical_positive {
        Regime::PositiveClassical
    } else if condition > 0.0 {
        Regime::PenaltyForced
    } else {
        Regime::Degenerate
    };
    RegimeReport {
        regime,
        b_bar,
        capital_lambda: model.capital_lambda().ok(),
        condition,
        classical_positive,
    }
}

/// Solves the threshold equation `G(b) = 0`.
pub fn solve_threshold(model: &Model) -> Result<EquilibriumSolution> {
    let params = *model.params();
    let report = classify_regime(model);
    if report.regime == Regime::Beta0Classical {
        let b = report.b_bar;
        return Ok(EquilibriumSolution {
            b_star: b,
            regime: report.regime,
            params,
            residual: 0.0,
            value: model.threshold_value_certain_ruin(b),
        });
    }
    if report.regime == Regime::Degenerate {
        return Ok(EquilibriumSolution {
            b_star: 0.0,
            regime: report.regime,
            params,
            residual: 0.0,
            value: model.threshold_value(0.0)?,
        });
    }
    let b = if params.beta == 0.0 {
        find_root(|b| model.g0_of_b(b), 0.0, RootOptions::default())?
    } else {
        find_root(|b| model.g_of_b(b), 0.0, RootOptions::default())?
    };
    let residual = if params.beta == 0.0 {
        model.g0_of_b(b)
    } else {
        model.g_of_b(b)
    }
    .abs();
    Ok(EquilibriumSolution {
        b_star: b,
        regime: report.regime,
        params,
        residual,
        value: model.threshold_value(b)?,
    })
}

/// Value function when the equilibrium strategy pays at `lmax` everywhere.
pub fn degenerate_value(model: &Model, r: f64, t: f64, x: f64) -> Result<f64> {
    if model.penalty_degenerate() {
        return Err(Error::DegeneratePenalty);
    }
    let condition = model.threshold_condition();
    if condition > 0.0 {
        return Err(Error::Precondition(format!(
            "equilibrium threshold is positive (G(0) = {condition})"
        )));
    }
    let p = model.params();
    let rt = model.roots();
    Ok(
        (-p.delta * (t - r)).exp() * p.lmax / p.delta * (1.0 - (rt.b2 * x).exp())
            + (-p.beta * (t - r)).exp() * p.lambda * ((rt.d2 * x).exp() - 1.0)
            + p.lambda * (1.0 - p.alpha),
    )
}

fn check_feasible(x: f64, model: &Model) -> Result<()> {
    if model.penalty_degenerate() {
        return Err(Error::CertainRuin);
    }
    let x_bar = model.x_bar();
    if !(x > x_bar) {
        return Err(Error::Infeasible { x0: x, x_bar });
    }
    Ok(())
}

/// Optimal threshold of the constrained problem `max V1(x; b)` s.t. `w(x, b) <= alpha`.
pub fn constrained_threshold(x: f64, model: &Model, alpha: f64) -> Result<f64> {
    let model = model.with_alpha(alpha)?;
    check_feasible(x, &model)?;
    let b_bar = model.classical_threshold();
    if model.laplace_w(x, b_bar) <= alpha {
        return Ok(b_bar);
    }
    find_root(
        |b| model.laplace_w(x, b) - alpha,
        b_bar,
        RootOptions::default(),
    )
}

/// Threshold and multiplier pair meeting the constraint at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintMatch {
    pub x0: f64,
    pub alpha: f64,
    pub b_star: f64,
    pub lambda_star: f64,
    pub binding: bool,
    /// `alpha - w(x0, b_star)`.
    pub slack: f64,
}

impl ConstraintMatch {
    /// `w(x0, b_star)`.
    pub fn w(&self) -> f64 {
        self.alpha - self.slack
    }

    /// Adapted constraint level `e^{-beta t} w(x_t, b_star)` after elapsed time `t`.
    pub fn alpha_level(&self, model: &Model, t: f64, x_t: f64) -> f64 {
        alpha_process_level(model, self, t, x_t)
    }
}

/// Matches `(b*, lambda*)` to the constraint `w(x0, b*) <= alpha`.
///
/// The `lambda` and `alpha` fields of `base` are ignored.
pub fn match_constraint(x0: f64, base: &Model, alpha: f64) -> Result<ConstraintMatch> {
    let model = base.with_alpha(alpha)?.with_lambda(0.0)?;
    check_feasible(x0, &model)?;
    let b_bar = model.classical_threshold();
    let w_floor = model.laplace_w(x0, b_bar);
    let (b_star, lambda_star, binding) = if w_floor <= alpha {
        (b_bar, 0.0, false)
    } else {
        let b = find_root(
            |b| model.laplace_w(x0, b) - alpha,
            b_bar,
            RootOptions::default(),
        )?;
        (b, model.lambda_of_b(b)?, true)
    };
    Ok(ConstraintMatch {
        x0,
        alpha,
        b_star,
        lambda_star,
        binding,
        slack: alpha - model.laplace_w(x0, b_star),
    })
}

/// `e^{-beta t} w(x_t, b*)`, the constraint level carried forward along a path.
pub fn alpha_process_level(model: &Model, matched: &ConstraintMatch, t: f64, x_t: f64) -> f64 {
    (-model.params().beta * t).exp() * model.laplace_w(x_t.max(0.0), matched.b_star)
}

/// Threshold maximizing `nu(t, t, x; b)` over `b >= 0` for a fixed initial
/// surplus `x` (a precommitment choice; it depends on `x`).
pub fn precommitment_threshold(x: f64, model: &Model) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("x must be finite and ≥ 0, got {x}")));
    }
    let objective = |b: f64| -> Result<f64> {
        Ok(if model.penalty_degenerate() {
            model.v1(x, b)
        } else {
            model.nu(0.0, 0.0, x, b)?
        })
    };
    let upper = 2.0 * (model.classical_threshold().max(x) + 10.0);
    let n = 800;
    let step = upper / n as f64;
    let mut best = (0usize, objective(0.0)?);
    for k in 1..=n {
        let v = objective(k as f64 * step)?;
        if v > best.1 {
            best = (k, v);
        }
    }
    // golden-section refinement on the neighbouring cells
    let mut lo = best.0.saturating_sub(1) as f64 * step;
    let mut hi = ((best.0 + 1).min(n)) as f64 * step;
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while hi - lo > 1e-10 * (1.0 + hi) {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = objective(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = objective(d)?;
        }
    }
    Ok(0.5 * (lo + hi))
}
