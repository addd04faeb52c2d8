//! Residual checks of the extended HJB system for a computed equilibrium.

use crate::closed_form::Side;
use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::model::Model;

/// Reward rate `H(r, s, l) = e^{-delta(s-r)} l - lambda beta e^{-beta(s-r)}`.
pub fn reward_rate(model: &Model, r: f64, s: f64, l: f64) -> f64 {
    let p = model.params();
    (-p.delta * (s - r)).exp() * l - p.lambda * p.beta * (-p.beta * (s - r)).exp()
}

/// Evaluation grid for [`hjb_residual`].
#[derive(Debug, Clone, PartialEq)]
pub struct HjbGrid {
    pub r_values: Vec<f64>,
    /// Length of the `t` window `[r, r + t_span]`.
    pub t_span: f64,
    pub t_points: usize,
    /// Upper end of the `x` range beyond `b*`.
    pub x_margin: f64,
    pub x_points: usize,
}

impl Default for HjbGrid {
    fn default() -> Self {
        Self {
            r_values: vec![0.0, 0.5, 1.0],
            t_span: 5.0,
            t_points: 51,
            x_margin: 10.0,
            x_points: 401,
        }
    }
}

impl HjbGrid {
    fn validate(&self) -> Result<()> {
        if self.r_values.is_empty() || self.r_values.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidGrid(
                "r values must be finite, nonnegative and non-empty".into(),
            ));
        }
        if !(self.t_span.is_finite() && self.t_span >= 0.0) {
            return Err(Error::InvalidGrid("t span must be finite and ≥ 0".into()));
        }
        if !(self.x_margin.is_finite() && self.x_margin > 0.0) {
            return Err(Error::InvalidGrid("x margin must be finite and > 0".into()));
        }
        if self.t_points < 1 || self.x_points < 3 {
            return Err(Error::InvalidGrid(
                "need at least 1 t point and 3 x points".into(),
            ));
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    };
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HjbResidualReport {
    pub grid: HjbGrid,
    pub b_star: f64,
    /// Largest residual on `[0, b*)`.
    pub max_residual_below: f64,
    /// Largest residual on `[b*, x_max]`.
    pub max_residual_above: f64,
    /// Largest `|nu(r, t, 0) - lambda (1 - alpha)|`.
    pub boundary_deviation: f64,
    /// Largest amount by which the rejected extreme control beats the chosen one at `r = t`.
    pub sup_violation: f64,
    /// Points evaluated in the interior.
    pub points: usize,
}

impl HjbResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.max_residual_below.max(self.max_residual_above)
    }
}

/// Evaluates the two PDE branches, the boundary condition and the
/// maximization over `l in {0, lmax}` on a grid.
///
/// Points within one `x` step of `b*` are skipped because the second
/// derivative is only one-sided there.
pub fn hjb_residual(
    model: &Model,
    solution: &EquilibriumSolution,
    grid: &HjbGrid,
) -> Result<HjbResidualReport> {
    grid.validate()?;
    let p = model.params();
    let value = solution.value();
    let b = solution.b_star;
    let x_max = b + grid.x_margin;
    let h = x_max / (grid.x_points - 1) as f64;
    let boundary_target = p.lambda * (1.0 - p.alpha);

    let mut report = HjbResidualReport {
        grid: grid.clone(),
        b_star: b,
        max_residual_below: 0.0,
        max_residual_above: 0.0,
        boundary_deviation: 0.0,
        sup_violation: 0.0,
        points: 0,
    };
    for &r in &grid.r_values {
        for t in linspace(r, r + grid.t_span, grid.t_points) {
            report.boundary_deviation = report
                .boundary_deviation
                .max((value.nu(r, t, 0.0) - boundary_target).abs());
            for x in linspace(0.0, x_max, grid.x_points) {
                if (x - b).abs() < h {
                    continue;
                }
                let rate = if x < b { 0.0 } else { p.lmax };
                let residual = value.nu_dt(r, t, x)
                    + (p.mu - rate) * value.nu_dx(r, t, x, 1)
                    + 0.5 * p.sigma * p.sigma * value.nu_dx(r, t, x, 2)
                    + reward_rate(model, r, t, rate);
                let slot = if x < b {
                    &mut report.max_residual_below
                } else {
                    &mut report.max_residual_above
                };
                *slot = slot.max(residual.abs());
                report.points += 1;
            }
        }
    }
    // Hamiltonian at r = t is linear in l with slope 1 - nu_x; compare both extremes.
    for x in linspace(0.0, x_max, grid.x_points) {
        let slope = 1.0 - value.nu_dx(0.0, 0.0, x, 1);
        let chosen = if x < b { 0.0 } else { p.lmax };
        let other = p.lmax - chosen;
        let gain = (other - chosen) * slope;
        report.sup_violation = report.sup_violation.max(gain.max(0.0));
    }
    Ok(report)
}

/// Continuity gaps at a threshold `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothFitReport {
    pub b: f64,
    /// `|V1(b-) - V1(b+)|`, `|V2(b-) - V2(b+)|`.
    pub value_gap: [f64; 2],
    /// `|V1'(b-) - V1'(b+)|`, `|V2'(b-) - V2'(b+)|`.
    pub slope_gap: [f64; 2],
    /// `|nu_x(t, t, b-) - 1|`.
    pub equilibrium_gap: f64,
    /// `|nu_xx(t, t, b-) - nu_xx(t, t, b+)|`.
    pub curvature_gap: f64,
}

pub fn smooth_fit_check(model: &Model, b: f64) -> Result<SmoothFitReport> {
    let v = if model.penalty_degenerate() {
        model.threshold_value_certain_ruin(b)
    } else {
        model.threshold_value(b)?
    };
    let gap = |f: &dyn Fn(Side) -> f64| (f(Side::Below) - f(Side::Above)).abs();
    Ok(SmoothFitReport {
        b,
        value_gap: [gap(&|s| v.v1_side(b, 0, s)), gap(&|s| v.v2_side(b, 0, s))],
        slope_gap: [gap(&|s| v.v1_side(b, 1, s)), gap(&|s| v.v2_side(b, 1, s))],
        equilibrium_gap: (v.nu_dx_side(0.0, 0.0, b, 1, Side::Below) - 1.0).abs(),
        curvature_gap: gap(&|s| v.nu_dx_side(0.0, 0.0, b, 2, s)),
    })
}

/// Monotonicity and concavity of `x -> nu(t, t, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeReport {
    pub min_slope: f64,
    pub max_curvature: f64,
    /// `nu_x > 1` at every grid point below `b*`.
    pub slope_above_one_below: bool,
    /// `nu_x <= 1` at every grid point at or above `b*`.
    pub slope_at_most_one_above: bool,
    pub slope_at_zero: f64,
}

impl ShapeReport {
    pub fn ok(&self) -> bool {
        self.min_slope > 0.0
            && self.max_curvature < 0.0
            && self.slope_above_one_below
            && self.slope_at_most_one_above
    }
}

pub fn shape_check(solution: &EquilibriumSolution, x_points: usize) -> Result<ShapeReport> {
    if x_points < 2 {
        return Err(Error::InvalidGrid("need at least 2 x points".into()));
    }
    let v = solution.value();
    let b = solution.b_star;
    let mut report = ShapeReport {
        min_slope: f64::INFINITY,
        max_curvature: f64::NEG_INFINITY,
        slope_above_one_below: true,
        slope_at_most_one_above: true,
        slope_at_zero: v.nu_dx(0.0, 0.0, 0.0, 1),
    };
    let x_max = b + 10.0;
    for x in linspace(0.0, x_max, x_points).chain(std::iter::once(b)) {
        let slope = v.nu_dx(0.0, 0.0, x, 1);
        let curvature = v.nu_dx(0.0, 0.0, x, 2);
        report.min_slope = report.min_slope.min(slope);
        report.max_curvature = report.max_curvature.max(curvature);
        if x < b {
            report.slope_above_one_below &= slope > 1.0;
        } else {
            report.slope_at_most_one_above &= slope <= 1.0 + 1e-12;
        }
    }
    Ok(report)
}
